#pragma once

#include "glat/error.hpp"
#include "glat/types.hpp"

#include <string>
#include <vector>

namespace glat {

/// Sigma for the Gaussian kernel: either a fixed positive value or the
/// median of the nonzero pairwise embedding distances (fallback 1 when all
/// distances vanish).
struct SigmaSpec {
    bool use_median = true;
    double value = 1.0;

    static SigmaSpec median_rule() { return {true, 1.0}; }
    static SigmaSpec fixed(double v) { return {false, v}; }
};

SigmaSpec sigma_spec_from_string(const std::string& s);
std::string to_string(const SigmaSpec& spec);

/// Similarity graph over one selected patch set: adjacency W, degrees,
/// combinatorial Laplacian L = D - W.
struct LaplacianBundle {
    Matrix W;
    Vector degrees;  // D_ii = sum_j W_ij
    Matrix L;
    double sigma = 1.0;
    std::vector<PatchId> node_ids;

    Index size() const { return W.rows(); }

    /// W symmetric with unit diagonal and entries in [0,1], L rows sum to 0
    /// within 1e-9. Throws on violation.
    void validate() const;
};

double resolve_sigma(const Matrix& embeddings, const SigmaSpec& spec);

/// W_ij = exp(-|E_i - E_j|^2 / (2 sigma^2)), computed once per unordered
/// pair so symmetry is exact.
Matrix adjacency_gaussian(const Matrix& embeddings, double sigma);

/// Degree and Laplacian of a symmetric adjacency. Rejects asymmetry beyond
/// 1e-12.
LaplacianBundle laplacian(const Matrix& w);

LaplacianBundle build_laplacian_bundle(const Matrix& embeddings, const SigmaSpec& spec,
                                       std::vector<PatchId> node_ids = {});

/// Polynomial spectral filter L_theta = c_0 I + sum_{k>=1} c_k L^k.
/// Order is capped at 4; identity initialization is c = (1, 0, ..., 0).
struct FilterParams {
    Vector coeffs;  // c_0 .. c_K

    int order() const { return static_cast<int>(coeffs.size()) - 1; }
    static FilterParams identity(int order);
};

inline constexpr int kMaxFilterOrder = 4;

Matrix filter_matrix(const FilterParams& params, const Matrix& l);

struct FilteredQkv {
    Matrix q;
    Matrix k;
    Matrix v;
};

FilteredQkv apply_filter(const Matrix& l_theta, const Matrix& q, const Matrix& k, const Matrix& v);

}  // namespace glat

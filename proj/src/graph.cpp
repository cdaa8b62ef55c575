#include "glat/graph.hpp"

#include "glat/textfmt.hpp"

#include <algorithm>
#include <cmath>

namespace glat {

SigmaSpec sigma_spec_from_string(const std::string& s) {
    if (s == "median") return SigmaSpec::median_rule();
    double v = 0.0;
    try {
        v = parse_double(s, "sigma");
    } catch (const FormatError&) {
        throw ConfigError("sigma must be 'median' or a positive number, got '" + s + "'");
    }
    if (!(v > 0.0)) throw ConfigError("sigma must be positive, got '" + s + "'");
    return SigmaSpec::fixed(v);
}

std::string to_string(const SigmaSpec& spec) {
    return spec.use_median ? "median" : format_double(spec.value);
}

void LaplacianBundle::validate() const {
    const Index m = W.rows();
    if (W.cols() != m || L.rows() != m || L.cols() != m || degrees.size() != m)
        throw DimensionError("laplacian bundle: inconsistent shapes");
    if (!W.allFinite() || !L.allFinite()) throw Error("laplacian bundle: non-finite entry");
    for (Index i = 0; i < m; ++i) {
        if (std::abs(W(i, i) - 1.0) > 1e-12)
            throw Error("laplacian bundle: diagonal W(" + std::to_string(i) + ") != 1");
        for (Index j = 0; j < m; ++j) {
            if (W(i, j) != W(j, i)) throw Error("laplacian bundle: W not symmetric");
            if (W(i, j) < 0.0 || W(i, j) > 1.0)
                throw Error("laplacian bundle: W entry outside [0,1]");
        }
        if (std::abs(L.row(i).sum()) > 1e-9)
            throw Error("laplacian bundle: L row " + std::to_string(i) + " sums to " +
                        std::to_string(L.row(i).sum()));
    }
    if (!node_ids.empty() && static_cast<Index>(node_ids.size()) != m)
        throw DimensionError("laplacian bundle: node id count mismatch");
}

double resolve_sigma(const Matrix& embeddings, const SigmaSpec& spec) {
    if (!spec.use_median) {
        if (!(spec.value > 0.0)) throw Error("sigma must be positive");
        return spec.value;
    }
    const Index m = embeddings.rows();
    std::vector<double> dists;
    dists.reserve(static_cast<std::size_t>(m * (m - 1) / 2));
    for (Index i = 0; i < m; ++i)
        for (Index j = i + 1; j < m; ++j) {
            const double dist = (embeddings.row(i) - embeddings.row(j)).norm();
            if (dist > 0.0) dists.push_back(dist);
        }
    if (dists.empty()) return 1.0;
    std::sort(dists.begin(), dists.end());
    const std::size_t n = dists.size();
    return (n % 2 == 1) ? dists[n / 2] : 0.5 * (dists[n / 2 - 1] + dists[n / 2]);
}

Matrix adjacency_gaussian(const Matrix& embeddings, double sigma) {
    if (embeddings.rows() < 1) throw Error("adjacency_gaussian: empty embedding set");
    if (!embeddings.allFinite()) throw Error("adjacency_gaussian: non-finite embeddings");
    if (!(sigma > 0.0)) throw Error("adjacency_gaussian: sigma must be positive");
    const Index m = embeddings.rows();
    const double denom = 2.0 * sigma * sigma;
    Matrix w = Matrix::Ones(m, m);
    for (Index i = 0; i < m; ++i)
        for (Index j = i + 1; j < m; ++j) {
            const double sq = (embeddings.row(i) - embeddings.row(j)).squaredNorm();
            const double wij = std::exp(-sq / denom);
            w(i, j) = wij;
            w(j, i) = wij;
        }
    return w;
}

LaplacianBundle laplacian(const Matrix& w) {
    const Index m = w.rows();
    if (w.cols() != m) throw DimensionError("laplacian: adjacency must be square");
    if (!w.allFinite()) throw Error("laplacian: non-finite adjacency");
    for (Index i = 0; i < m; ++i)
        for (Index j = i + 1; j < m; ++j)
            if (std::abs(w(i, j) - w(j, i)) > 1e-12)
                throw Error("laplacian: adjacency asymmetric at (" + std::to_string(i) + "," +
                            std::to_string(j) + ")");
    LaplacianBundle b;
    b.W = w;
    b.degrees = w.rowwise().sum();
    b.L = Matrix(b.degrees.asDiagonal());
    b.L -= w;
    return b;
}

LaplacianBundle build_laplacian_bundle(const Matrix& embeddings, const SigmaSpec& spec,
                                       std::vector<PatchId> node_ids) {
    const double sigma = resolve_sigma(embeddings, spec);
    LaplacianBundle b = laplacian(adjacency_gaussian(embeddings, sigma));
    b.sigma = sigma;
    b.node_ids = std::move(node_ids);
    b.validate();
    return b;
}

FilterParams FilterParams::identity(int order) {
    if (order < 0 || order > kMaxFilterOrder)
        throw ConfigError("filter order must be in [0," + std::to_string(kMaxFilterOrder) + "], got " +
                          std::to_string(order));
    FilterParams p;
    p.coeffs = Vector::Zero(order + 1);
    p.coeffs(0) = 1.0;
    return p;
}

Matrix filter_matrix(const FilterParams& params, const Matrix& l) {
    const int order = params.order();
    if (order < 0 || order > kMaxFilterOrder)
        throw ConfigError("filter order must be in [0," + std::to_string(kMaxFilterOrder) + "], got " +
                          std::to_string(order));
    if (l.rows() != l.cols()) throw DimensionError("filter_matrix: L must be square");
    if (!params.coeffs.allFinite()) throw Error("filter_matrix: non-finite coefficients");
    const Index m = l.rows();
    Matrix out = params.coeffs(0) * Matrix::Identity(m, m);
    Matrix power = Matrix::Identity(m, m);
    for (int k = 1; k <= order; ++k) {
        power = power * l;  // L^k by repeated multiplication
        out += params.coeffs(k) * power;
    }
    return out;
}

FilteredQkv apply_filter(const Matrix& l_theta, const Matrix& q, const Matrix& k, const Matrix& v) {
    const Index m = l_theta.rows();
    if (l_theta.cols() != m) throw DimensionError("apply_filter: L_theta must be square");
    if (q.rows() != m || k.rows() != m || v.rows() != m)
        throw DimensionError("apply_filter: Q/K/V row count must match L_theta");
    return {l_theta * q, l_theta * k, l_theta * v};
}

}  // namespace glat

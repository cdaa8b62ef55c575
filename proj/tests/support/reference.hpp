#pragma once

// Independent scalar re-implementations used as oracles. Everything here is
// written with plain loops and explicit arithmetic on purpose; none of it
// calls into the library under test.

#include "glat/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

namespace ref {

using glat::Index;
using glat::Matrix;
using glat::Vector;

inline Matrix matmul(const Matrix& a, const Matrix& b) {
    Matrix out = Matrix::Zero(a.rows(), b.cols());
    for (Index i = 0; i < a.rows(); ++i)
        for (Index j = 0; j < b.cols(); ++j) {
            double acc = 0.0;
            for (Index k = 0; k < a.cols(); ++k) acc += a(i, k) * b(k, j);
            out(i, j) = acc;
        }
    return out;
}

inline Matrix transpose(const Matrix& a) {
    Matrix out(a.cols(), a.rows());
    for (Index i = 0; i < a.rows(); ++i)
        for (Index j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
    return out;
}

inline Matrix row_softmax(const Matrix& z) {
    Matrix out(z.rows(), z.cols());
    for (Index i = 0; i < z.rows(); ++i) {
        double mx = z(i, 0);
        for (Index j = 1; j < z.cols(); ++j) mx = std::max(mx, z(i, j));
        double denom = 0.0;
        for (Index j = 0; j < z.cols(); ++j) denom += std::exp(z(i, j) - mx);
        for (Index j = 0; j < z.cols(); ++j) out(i, j) = std::exp(z(i, j) - mx) / denom;
    }
    return out;
}

/// Frozen attention: row_softmax((E Wq)(E Wk)^T / sqrt(d_k)).
inline Matrix attention(const Matrix& e, const Matrix& wq, const Matrix& wk) {
    const Matrix q = matmul(e, wq);
    const Matrix k = matmul(e, wk);
    Matrix z = matmul(q, transpose(k));
    const double s = 1.0 / std::sqrt(static_cast<double>(wq.cols()));
    for (Index i = 0; i < z.rows(); ++i)
        for (Index j = 0; j < z.cols(); ++j) z(i, j) *= s;
    return row_softmax(z);
}

/// Column-mean importance scores of a row-stochastic map.
inline Vector received_scores(const Matrix& a) {
    Vector s = Vector::Zero(a.cols());
    for (Index j = 0; j < a.cols(); ++j) {
        double acc = 0.0;
        for (Index i = 0; i < a.rows(); ++i) acc += a(i, j);
        s[j] = acc / static_cast<double>(a.rows());
    }
    return s;
}

// --- splitmix64 stream, re-implemented from its published definition ---

struct SplitMix {
    std::uint64_t state;

    explicit SplitMix(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        state += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    std::uint64_t below(std::uint64_t n) { return next() % n; }
};

inline std::uint64_t splitmix_finalize(std::uint64_t x) {
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
    return splitmix_finalize(seed + (tag + 1) * 0x9E3779B97F4A7C15ULL);
}

template <typename T>
void fisher_yates(SplitMix& gen, std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(gen.below(static_cast<std::uint64_t>(i)));
        std::swap(items[i - 1], items[j]);
    }
}

/// Jacobi eigenvalue iteration for a symmetric matrix; plenty for the
/// small graphs used in tests.
inline std::vector<double> jacobi_eigenvalues(Matrix a, int sweeps = 100) {
    const Index n = a.rows();
    for (int sweep = 0; sweep < sweeps; ++sweep) {
        double off = 0.0;
        for (Index p = 0; p < n; ++p)
            for (Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        if (off < 1e-24) break;
        for (Index p = 0; p < n; ++p) {
            for (Index q = p + 1; q < n; ++q) {
                if (std::abs(a(p, q)) < 1e-18) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (Index k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (Index k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
            }
        }
    }
    std::vector<double> eig(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) eig[static_cast<std::size_t>(i)] = a(i, i);
    std::sort(eig.begin(), eig.end());
    return eig;
}

/// AUC by exhaustive pair counting: P(score_pos > score_neg) + 0.5 ties.
inline double pair_count_auc(const std::vector<double>& scores, const std::vector<bool>& positive) {
    double wins = 0.0;
    long pairs = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!positive[i]) continue;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (positive[j]) continue;
            ++pairs;
            if (scores[i] > scores[j]) wins += 1.0;
            else if (scores[i] == scores[j]) wins += 0.5;
        }
    }
    return wins / static_cast<double>(pairs);
}

/// One AdamW step on a scalar parameter; mirrors the published update rule.
struct ScalarAdam {
    double m = 0.0, v = 0.0;
    long t = 0;

    double step(double param, double grad, double lr, double b1, double b2, double eps, double wd) {
        t += 1;
        m = b1 * m + (1.0 - b1) * grad;
        v = b2 * v + (1.0 - b2) * grad * grad;
        const double mh = m / (1.0 - std::pow(b1, static_cast<double>(t)));
        const double vh = v / (1.0 - std::pow(b2, static_cast<double>(t)));
        return param - lr * (mh / (std::sqrt(vh) + eps) + wd * param);
    }
};

/// Horner evaluation of c_0 I + c_1 L + ... + c_K L^K.
inline Matrix horner_filter(const Vector& coeffs, const Matrix& l) {
    const Index n = l.rows();
    Matrix acc = Matrix::Zero(n, n);
    for (Index i = 0; i < n; ++i) acc(i, i) = coeffs[coeffs.size() - 1];
    for (Index k = coeffs.size() - 2; k >= 0; --k) {
        acc = matmul(acc, l);
        for (Index i = 0; i < n; ++i) acc(i, i) += coeffs[k];
    }
    return acc;
}

}  // namespace ref

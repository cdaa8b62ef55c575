#pragma once

#include "glat/types.hpp"

#include <cmath>

namespace glat {

// Row-wise softmax with per-row max subtraction. Stable for logits of any
// finite magnitude; every output row sums to 1.
template <class Derived>
MatrixX<typename Derived::Scalar> row_softmax(const Eigen::MatrixBase<Derived>& logits) {
    using Scalar = typename Derived::Scalar;
    MatrixX<Scalar> out = logits;
    for (Index i = 0; i < out.rows(); ++i) {
        const Scalar m = out.row(i).maxCoeff();
        out.row(i) = (out.row(i).array() - m).exp();
        out.row(i) /= out.row(i).sum();
    }
    return out;
}

// Softmax of a vector, max-subtracted.
template <class Derived>
VectorX<typename Derived::Scalar> softmax(const Eigen::MatrixBase<Derived>& logits) {
    using Scalar = typename Derived::Scalar;
    VectorX<Scalar> out = logits;
    const Scalar m = out.maxCoeff();
    out = (out.array() - m).exp();
    out /= out.sum();
    return out;
}

// Backward of y = softmax(x) given dy: dx = y .* (dy - <y, dy>).
template <typename Scalar>
VectorX<Scalar> softmax_backward(const VectorX<Scalar>& y, const VectorX<Scalar>& dy) {
    const Scalar dot = y.dot(dy);
    return y.array() * (dy.array() - dot);
}

template <class Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
    return m.allFinite();
}

}  // namespace glat

#pragma once

#include <Eigen/Dense>

#include <cstdint>

namespace glat {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Matrix = MatrixX<double>;
using Vector = VectorX<double>;
using Index = Eigen::Index;

using PatchId = std::int64_t;

// Grading classes: 0 = normal (ISUP 1-2), 1..3 = grade 3..5.
inline constexpr int kNumClasses = 4;

}  // namespace glat

#pragma once

#include "glat/types.hpp"

#include <array>
#include <span>
#include <string>

namespace glat {

enum class KappaWeighting { None, Quadratic };

KappaWeighting kappa_weighting_from_string(const std::string& s);

/// Macro-averaged one-vs-rest AUC from per-class probabilities, rank-based
/// with tied scores sharing their average rank. Classes absent from the
/// labels are skipped; fewer than two distinct labels is an error.
double auc_metric(const Matrix& probs, std::span<const int> labels);

struct KappaResult {
    double kappa = 0.0;
    /// Chance agreement reached 1 (all mass in one cell of both marginals);
    /// kappa is reported as 0 with this flag set.
    bool degenerate = false;
};

KappaResult kappa_metric(std::span<const int> predicted, std::span<const int> truth, KappaWeighting w);

double accuracy(std::span<const int> predicted, std::span<const int> truth);

/// Argmax with ties to the lower class index.
int argmax_class(const Vector& probs);

struct MetricsReport {
    double auc = 0.0;
    double kappa = 0.0;
    double acc = 0.0;
    bool kappa_degenerate = false;
    std::array<int, kNumClasses> truth_counts{};
};

MetricsReport compute_metrics(const Matrix& probs, std::span<const int> labels, KappaWeighting w);

}  // namespace glat

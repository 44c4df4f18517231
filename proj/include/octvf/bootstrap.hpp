#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>

#include "octvf/common.hpp"

namespace octvf {

/// Statistic over paired flattened data; may throw on degenerate input.
using PairedStatistic =
    std::function<double(const Eigen::VectorXd& measured, const Eigen::VectorXd& predicted)>;

struct BootstrapInterval {
    double low = 0.0;
    double high = 0.0;
};

/// Percentile bootstrap over exam-level resampling: rows of the (n x k)
/// matrices are whole exams; a resample draws n rows with replacement and
/// the statistic sees the flattened (sample, point) pairs. Per-iteration
/// seeding is counter-based (hash of seed and iteration), so a parallel run
/// with jobs > 1 equals the serial one. Degenerate resamples (statistic
/// throws) are redrawn up to a retry cap.
BootstrapInterval bootstrap_ci(const PairedStatistic& statistic,
                               const Eigen::MatrixXd& measured,
                               const Eigen::MatrixXd& predicted, int iterations, double level,
                               uint64_t seed, int jobs = 1);

/// Linear-interpolation quantile of a sorted vector (same scheme as the
/// binning order statistics).
double sorted_quantile(const std::vector<double>& sorted, double p);

}  // namespace octvf

#pragma once

#include <Eigen/Core>
#include <vector>

#include "octvf/retest.hpp"

namespace octvf {

/// Order statistics of predictions per 2-dB measured bin, Figure-3 style.
struct BinnedStats {
    struct Bin {
        int count = 0;
        double median = 0, q25 = 0, q75 = 0, p5 = 0, p95 = 0;
    };
    double step = 2.0;
    double range_lo = 0.0;
    double range_hi = 40.0;
    std::vector<Bin> bins;

    double bin_center(size_t k) const { return range_lo + (k + 0.5) * step; }
    int populated() const {
        int n = 0;
        for (const auto& b : bins) n += b.count > 0;
        return n;
    }
};

/// Bins [k*step, (k+1)*step) over [0,40]; the last bin is closed at 40 and
/// out-of-range measured values clamp into the boundary bins so that bin
/// counts always sum to n. Empty bins keep count 0.
BinnedStats bin_by_measured(const Eigen::VectorXd& measured, const Eigen::VectorXd& predicted,
                            double step = 2.0);

struct RetestCoverage {
    int inside = 0;
    int total_whiskers = 0;
    double fraction = 0.0;
};

/// For each populated bin, the p5 and p95 whisker endpoints each count as
/// inside iff they lie within [lower, upper] of the CI row nearest to the
/// bin center. Throws if a populated bin center lies outside the table.
RetestCoverage retest_coverage(const BinnedStats& binned, const RetestCITable& ci);

}  // namespace octvf

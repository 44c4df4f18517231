#include "octvf/binning.hpp"

#include <algorithm>
#include <cmath>

#include "octvf/bootstrap.hpp"

namespace octvf {

BinnedStats bin_by_measured(const Eigen::VectorXd& measured, const Eigen::VectorXd& predicted,
                            double step) {
    if (measured.size() != predicted.size()) throw Error("bin_by_measured: size mismatch");
    if (!(step > 0.0)) throw Error("bin_by_measured: step must be > 0");

    BinnedStats out;
    out.step = step;
    const int n_bins = static_cast<int>(std::ceil((out.range_hi - out.range_lo) / step));
    std::vector<std::vector<double>> members(n_bins);
    for (Eigen::Index i = 0; i < measured.size(); ++i) {
        int k = static_cast<int>(std::floor((measured[i] - out.range_lo) / step));
        k = std::clamp(k, 0, n_bins - 1);
        members[k].push_back(predicted[i]);
    }

    out.bins.resize(n_bins);
    for (int k = 0; k < n_bins; ++k) {
        auto& vals = members[k];
        auto& bin = out.bins[k];
        bin.count = static_cast<int>(vals.size());
        if (vals.empty()) continue;
        std::sort(vals.begin(), vals.end());
        bin.p5 = sorted_quantile(vals, 0.05);
        bin.q25 = sorted_quantile(vals, 0.25);
        bin.median = sorted_quantile(vals, 0.50);
        bin.q75 = sorted_quantile(vals, 0.75);
        bin.p95 = sorted_quantile(vals, 0.95);
    }
    return out;
}

RetestCoverage retest_coverage(const BinnedStats& binned, const RetestCITable& ci) {
    RetestCoverage cov;
    for (size_t k = 0; k < binned.bins.size(); ++k) {
        const auto& bin = binned.bins[k];
        if (bin.count == 0) continue;
        const auto& row = ci.nearest(binned.bin_center(k));
        for (double whisker : {bin.p5, bin.p95}) {
            ++cov.total_whiskers;
            if (whisker >= row.lower_db && whisker <= row.upper_db) ++cov.inside;
        }
    }
    cov.fraction = cov.total_whiskers > 0
                       ? static_cast<double>(cov.inside) / cov.total_whiskers
                       : 0.0;
    return cov;
}

}  // namespace octvf

#include "octvf/metrics.hpp"

#include <cmath>

namespace octvf {

namespace {

void check_paired(VecRef a, VecRef b, const char* what) {
    if (a.size() != b.size()) {
        throw Error(std::string(what) + ": size mismatch " + std::to_string(a.size()) + " vs " +
                    std::to_string(b.size()));
    }
    if (a.size() == 0) throw Error(std::string(what) + ": empty input");
}

}  // namespace

double r2(VecRef measured, VecRef predicted) {
    check_paired(measured, predicted, "r2");
    if (measured.size() < 2) throw Error("r2: need at least 2 elements");
    const double mean = measured.mean();
    const double ss_tot = (measured.array() - mean).square().sum();
    if (ss_tot == 0.0) throw Error("r2: measured values are constant (zero total variance)");
    const double ss_res = (measured - predicted).array().square().sum();
    return 1.0 - ss_res / ss_tot;
}

double pearson_r(VecRef measured, VecRef predicted) {
    check_paired(measured, predicted, "pearson_r");
    if (measured.size() < 2) throw Error("pearson_r: need at least 2 elements");
    const Eigen::ArrayXd dx = measured.array() - measured.mean();
    const Eigen::ArrayXd dy = predicted.array() - predicted.mean();
    const double sx = dx.square().sum();
    const double sy = dy.square().sum();
    if (sx == 0.0 || sy == 0.0) throw Error("pearson_r: zero variance input");
    return (dx * dy).sum() / std::sqrt(sx * sy);
}

double mae(VecRef measured, VecRef predicted) {
    check_paired(measured, predicted, "mae");
    return (measured - predicted).array().abs().mean();
}

double mse(VecRef measured, VecRef predicted) {
    check_paired(measured, predicted, "mse");
    return (measured - predicted).array().square().mean();
}

double baseline_mae(VecRef measured) {
    if (measured.size() == 0) throw Error("baseline_mae: empty input");
    return (measured.array() - measured.mean()).abs().mean();
}

}  // namespace octvf

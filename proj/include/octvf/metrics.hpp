#pragma once

#include <Eigen/Core>

#include "octvf/common.hpp"

namespace octvf {

using VecRef = Eigen::Ref<const Eigen::VectorXd>;

/// Coefficient of determination, 1 - SSres/SStot. Requires >= 2 elements and
/// non-constant measured values.
double r2(VecRef measured, VecRef predicted);

/// Sample correlation in [-1, 1]. Requires both inputs non-constant.
double pearson_r(VecRef measured, VecRef predicted);

double mae(VecRef measured, VecRef predicted);

double mse(VecRef measured, VecRef predicted);

/// MAE of the constant predictor equal to the evaluation-set mean.
double baseline_mae(VecRef measured);

}  // namespace octvf

#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>

#include "octvf/vf_grid.hpp"

namespace octvf {

enum class Eye : uint8_t { OD = 0, OS = 1 };

std::string eye_name(Eye eye);
Eye parse_eye(const std::string& name);

/// One 24-2 exam: 52 thresholds on the active grid indices plus the global
/// indices reported alongside.
struct VFExam {
    Eigen::VectorXf thresholds;  // size 52, dB, canonical active order
    float md = 0.0f;             // dB
    float fp = 0.0f;             // fractions in [0,1]
    float fn = 0.0f;
    float fl = 0.0f;
    Eye eye = Eye::OD;
    uint32_t patient_id = 0;
    int64_t exam_time = 0;  // unix seconds

    void validate() const;
};

struct ReliabilityLimits {
    float fp_max = 0.15f;
    float fn_max = 0.33f;
    float fl_max = 0.20f;
};

/// "Not exceeding" the limits reads inclusively: equality passes.
bool passes_reliability(const VFExam& exam, const ReliabilityLimits& limits = {});

/// Toggles laterality and re-indexes thresholds by (x,y) -> (-x,y) on the
/// grid's mirror permutation. md/fp/fn/fl are global and stay put.
VFExam mirror_exam(const VFExam& exam, const VFGrid& grid = grid_24_2());

}  // namespace octvf

#include "octvf/vf_exam.hpp"

#include <cmath>

namespace octvf {

std::string eye_name(Eye eye) {
    return eye == Eye::OD ? "OD" : "OS";
}

Eye parse_eye(const std::string& name) {
    if (name == "OD") return Eye::OD;
    if (name == "OS") return Eye::OS;
    throw Error("unknown eye '" + name + "', expected OD or OS");
}

void VFExam::validate() const {
    if (thresholds.size() != kActivePoints) {
        throw Error("exam: expected " + std::to_string(kActivePoints) + " thresholds, got " +
                    std::to_string(thresholds.size()));
    }
    for (Eigen::Index i = 0; i < thresholds.size(); ++i) {
        const float t = thresholds[i];
        if (!std::isfinite(t) || t < -1.0f || t > 50.0f) {
            throw Error("exam: threshold " + std::to_string(i) + " outside [-1,50] dB");
        }
    }
    if (!std::isfinite(md)) throw Error("exam: non-finite md");
    for (auto [v, name] : {std::pair{fp, "fp"}, {fn, "fn"}, {fl, "fl"}}) {
        if (!std::isfinite(v) || v < 0.0f || v > 1.0f) {
            throw Error(std::string("exam: ") + name + " outside [0,1]");
        }
    }
}

bool passes_reliability(const VFExam& exam, const ReliabilityLimits& limits) {
    return exam.fp <= limits.fp_max && exam.fn <= limits.fn_max && exam.fl <= limits.fl_max;
}

VFExam mirror_exam(const VFExam& exam, const VFGrid& grid) {
    if (exam.thresholds.size() != grid.active_count()) {
        throw Error("mirror_exam: exam not indexed on the given grid");
    }
    VFExam out = exam;
    out.eye = exam.eye == Eye::OD ? Eye::OS : Eye::OD;
    const auto& perm = grid.mirror_permutation();
    for (int a = 0; a < grid.active_count(); ++a) {
        out.thresholds[perm[a]] = exam.thresholds[a];
    }
    return out;
}

}  // namespace octvf

#pragma once

#include <Eigen/Core>
#include <array>
#include <optional>
#include <string>

#include "octvf/container.hpp"
#include "octvf/sectors.hpp"

namespace octvf {

/// Synthetic exam generator. Rings render a bright horizontal band whose
/// per-column thickness follows a per-sector damage profile (column maps to
/// circumpapillary angle, TSNIT order); thresholds follow a monotone
/// logistic law of normalized band thickness, so a trained model has a known
/// performance ceiling given by oracle_predictor.
struct SynthConfig {
    int n_patients = 300;
    int exams_per_patient = 2;
    int ring_width = 192, ring_height = 128;
    int slo_size = 128;
    double base_thickness_px = 32.0;
    /// Max thinning per sector in [0,1]. Values that leave a sub-pixel but
    /// non-zero band are rejected; exactly 1 is allowed and encodes complete
    /// loss (zero-thickness band, threshold at the law floor).
    std::array<double, kSectorCount> sector_amplitudes = {1, 1, 1, 1, 1, 1};
    double ceiling_db = 35.0;
    double floor_db = 0.0;
    double law_slope = 6.0;
    double noise_db = 0.0;
    double noise_px = 0.0;
    double unreliable_prob = 0.1;
    uint64_t seed = 0;
    /// When set, every exam uses exactly this per-sector damage vector
    /// instead of random patient trends (boundary-case fixtures).
    std::optional<std::array<double, kSectorCount>> fixed_damage;

    void validate() const;
};

struct SynthOutput {
    std::string container_bytes;
    std::string truth_csv;  // exam_id,patient_id,severity,damage per sector
};

SynthOutput generate_dataset(const SynthConfig& config);

/// Scaled logistic with s(0)=0 and s(1)=1; monotone and invertible.
double synth_law(const SynthConfig& config, double thickness_norm);

/// VF sector whose damage drives the band thickness at circumpapillary
/// angle `deg` (0 temporal, 90 superior, TSNIT order, right eye).
Sector sector_of_angle(double deg);

/// Rendering scale of a ring relative to the 3.5 mm ring.
double ring_thickness_factor(float diameter_mm);

/// Analytic inversion of the rendering: per-column band thickness from the
/// three ring images, averaged per sector, pushed through the law. The
/// reference ceiling for any trained model.
Eigen::VectorXd oracle_predictor(const SynthConfig& config, const ExamPair& exam);

}  // namespace octvf

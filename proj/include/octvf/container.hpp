#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "octvf/raster.hpp"
#include "octvf/vf_exam.hpp"

namespace octvf {

/// The three GMPE circumpapillary ring diameters, in millimetres.
inline constexpr std::array<float, 3> kRingDiameters = {3.5f, 4.1f, 4.7f};

struct OctRing {
    float diameter_mm = 0.0f;
    RasterImage image;
};

/// One matched OCT-VF sample.
struct ExamPair {
    uint32_t patient_id = 0;
    Eye eye = Eye::OD;
    int64_t exam_time = 0;
    std::array<OctRing, 3> rings;  // ascending diameter: 3.5, 4.1, 4.7
    RasterImage slo;
    VFExam vf;

    void validate() const;
};

enum class Modality { Ring35 = 0, Ring41 = 1, Ring47 = 2, Slo = 3 };

std::string modality_name(Modality m);
Modality parse_modality(const std::string& name);
const RasterImage& modality_image(const ExamPair& exam, Modality m);

/// Exam container, "OCTVF01\n" magic, version 1, all little-endian:
///   magic[8] | u16 version | u32 exam_count | exams...
/// Each exam:
///   u32 patient_id | u8 eye (0=OD,1=OS) | i64 unix_seconds
///   VF block: 54 x f32 thresholds in canonical grid order (blind-spot
///             slots NaN) | f32 md | f32 fp | f32 fn | f32 fl
///   3 ring blocks, ascending diameter: f32 diameter_mm | u32 w | u32 h |
///             w*h x f32 pixels (row-major)
///   SLO block: u32 w | u32 h | w*h x f32 pixels
/// Serialization is canonical: field order fixed, so equal exam lists give
/// equal bytes.
std::string write_container(const std::vector<ExamPair>& exams);
std::vector<ExamPair> parse_container(const std::string& bytes);

void write_container_file(const std::string& path, const std::vector<ExamPair>& exams);
std::vector<ExamPair> parse_container_file(const std::string& path);

/// Which image payloads a selective parse retains.
struct ImageSelect {
    bool rings[3] = {true, true, true};
    bool slo = true;

    static ImageSelect all() { return {}; }
    static ImageSelect none() { return {{false, false, false}, false}; }
    static ImageSelect only(Modality m) {
        ImageSelect s = none();
        if (m == Modality::Slo) {
            s.slo = true;
        } else {
            s.rings[static_cast<int>(m)] = true;
        }
        return s;
    }
};

/// Memory-lean variant: unselected image payloads are validated but not
/// retained (their RasterImage keeps dimensions with empty pixel storage).
std::vector<ExamPair> parse_container_select(const std::string& bytes, ImageSelect keep);
std::vector<ExamPair> parse_container_file_select(const std::string& path, ImageSelect keep);

/// Closed-form byte size of the canonical serialization.
size_t container_byte_size(const std::vector<ExamPair>& exams);

/// Stable identifier for exam `ordinal` within its container: "e000042".
std::string exam_id(size_t ordinal);

}  // namespace octvf

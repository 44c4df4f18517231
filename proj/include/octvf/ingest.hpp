#pragma once

#include <string>
#include <vector>

#include "octvf/container.hpp"

namespace octvf {

/// Binary or ASCII PGM (P5/P2), 8- or 16-bit, rescaled to [0,1] by maxval.
RasterImage read_pgm(const std::string& bytes, const std::string& what);
RasterImage read_pgm_file(const std::string& path);
void write_pgm_file(const std::string& path, const RasterImage& img);

/// Parses `patient_id,eye,exam_time,md,fp,fn,fl,t01..t54` rows. Blind-spot
/// columns (t26, t35) must be empty. Threshold sentinel -1 ("<0 dB" printout
/// entries) is normalized to 0 dB.
std::vector<VFExam> load_vf_csv(const std::string& csv_text);
std::vector<VFExam> load_vf_csv_file(const std::string& path);

/// Builds ExamPairs by joining VF rows with PGM images found in `image_dir`,
/// named {patient_id}_{eye}_{exam_time}_{ring3.5|ring4.1|ring4.7|slo}.pgm.
/// With normalize_od, OS exams are mirrored to right-eye orientation and
/// their ring/SLO images flipped horizontally.
std::vector<ExamPair> ingest_exams(const std::string& vf_csv_path,
                                   const std::string& image_dir, bool normalize_od);

}  // namespace octvf

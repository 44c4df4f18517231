#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "octvf/container.hpp"

namespace octvf {

struct SplitRatios {
    double train = 0.6;
    double val = 0.2;
    double test = 0.2;
};

/// Exam indices per partition, in container order.
struct Partition {
    std::string name;
    std::vector<size_t> exam_refs;
};

struct Split {
    Partition train{"train", {}};
    Partition val{"val", {}};
    Partition test{"test", {}};
};

/// Core allocator over one patient id per exam. Patients are shuffled by the
/// seeded RNG, then allocated by cumulative-floor quota over the patient
/// count: train gets floor(r_train*P), val gets floor((r_train+r_val)*P)
/// minus train, test gets the remainder. Every exam follows its patient.
Split split_by_patient_ids(const std::vector<uint32_t>& patient_ids, SplitRatios ratios,
                           uint64_t seed);

Split split_by_patient(const std::vector<ExamPair>& exams, SplitRatios ratios, uint64_t seed);

/// Keeps only reliable exams in val and test; train is never filtered
/// (unreliable training fields act as label noise augmentation).
Split apply_reliability_policy(const Split& split, const std::vector<ExamPair>& exams,
                               const ReliabilityLimits& limits = {});

/// Manifest files: one exam id per line.
void write_manifest(const std::string& path, const Partition& partition);
std::vector<size_t> read_manifest(const std::string& path);

}  // namespace octvf

#include "octvf/split.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "octvf/bytes.hpp"
#include "octvf/csv.hpp"
#include "octvf/rng.hpp"

namespace octvf {

Split split_by_patient_ids(const std::vector<uint32_t>& patient_ids, SplitRatios ratios,
                           uint64_t seed) {
    const double sum = ratios.train + ratios.val + ratios.test;
    if (std::abs(sum - 1.0) > 1e-9) {
        throw Error("split: ratios sum to " + std::to_string(sum) + ", expected 1");
    }
    if (ratios.train < 0 || ratios.val < 0 || ratios.test < 0) {
        throw Error("split: negative ratio");
    }

    // Unique patients in first-appearance order, then a seeded shuffle.
    std::vector<uint32_t> patients;
    std::map<uint32_t, std::vector<size_t>> exams_of;
    for (size_t i = 0; i < patient_ids.size(); ++i) {
        auto [it, inserted] = exams_of.try_emplace(patient_ids[i]);
        if (inserted) patients.push_back(patient_ids[i]);
        it->second.push_back(i);
    }

    const size_t p = patients.size();
    int nonzero = (ratios.train > 0) + (ratios.val > 0) + (ratios.test > 0);
    if (p < static_cast<size_t>(nonzero)) {
        throw Error("split: " + std::to_string(p) + " patients, fewer than " +
                    std::to_string(nonzero) + " non-empty partitions");
    }

    Rng rng(seed);
    rng.shuffle(patients);

    const size_t n_train = static_cast<size_t>(std::floor(ratios.train * p));
    const size_t n_train_val =
        static_cast<size_t>(std::floor((ratios.train + ratios.val) * p));

    Split split;
    for (size_t i = 0; i < p; ++i) {
        Partition& part = i < n_train ? split.train : i < n_train_val ? split.val : split.test;
        const auto& exams = exams_of[patients[i]];
        part.exam_refs.insert(part.exam_refs.end(), exams.begin(), exams.end());
    }
    for (Partition* part : {&split.train, &split.val, &split.test}) {
        std::sort(part->exam_refs.begin(), part->exam_refs.end());
    }
    return split;
}

Split split_by_patient(const std::vector<ExamPair>& exams, SplitRatios ratios, uint64_t seed) {
    std::vector<uint32_t> ids;
    ids.reserve(exams.size());
    for (const auto& e : exams) ids.push_back(e.patient_id);
    return split_by_patient_ids(ids, ratios, seed);
}

Split apply_reliability_policy(const Split& split, const std::vector<ExamPair>& exams,
                               const ReliabilityLimits& limits) {
    Split out;
    out.train = split.train;
    for (auto [src, dst] : {std::pair{&split.val, &out.val}, {&split.test, &out.test}}) {
        dst->name = src->name;
        for (size_t ref : src->exam_refs) {
            if (passes_reliability(exams.at(ref).vf, limits)) {
                dst->exam_refs.push_back(ref);
            }
        }
    }
    return out;
}

void write_manifest(const std::string& path, const Partition& partition) {
    std::string out;
    for (size_t ref : partition.exam_refs) out += exam_id(ref) + "\n";
    write_file_bytes(path, out);
}

std::vector<size_t> read_manifest(const std::string& path) {
    std::istringstream in(read_file_bytes(path));
    std::vector<size_t> refs;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line.size() < 2 || line[0] != 'e') {
            throw Error("manifest " + path + ": bad exam id '" + line + "'");
        }
        refs.push_back(static_cast<size_t>(parse_int(line.substr(1), "manifest " + path)));
    }
    return refs;
}

}  // namespace octvf

#include "octvf/container.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "octvf/bytes.hpp"

namespace octvf {

namespace {

constexpr char kMagic[8] = {'O', 'C', 'T', 'V', 'F', '0', '1', '\n'};
constexpr uint16_t kVersion = 1;

void check_ring_order(const ExamPair& exam) {
    for (int i = 0; i < 3; ++i) {
        if (exam.rings[i].diameter_mm != kRingDiameters[i]) {
            throw Error("exam: ring " + std::to_string(i) + " has diameter " +
                        std::to_string(exam.rings[i].diameter_mm) + ", expected " +
                        std::to_string(kRingDiameters[i]));
        }
    }
}

void write_image(ByteWriter& w, const RasterImage& img) {
    w.u32(static_cast<uint32_t>(img.width));
    w.u32(static_cast<uint32_t>(img.height));
    static_assert(sizeof(float) == 4);
    w.raw(img.pixels.data(), img.pixels.size() * sizeof(float));
}

RasterImage read_image(ByteReader& r, bool keep_pixels, const char* what) {
    const uint32_t w = r.u32();
    const uint32_t h = r.u32();
    if (w < 1 || h < 1) {
        throw ParseError(r.offset(), std::string(what) + ": non-positive dimensions");
    }
    const size_t count = static_cast<size_t>(w) * h;
    r.require(count * 4, what);
    RasterImage img;
    img.width = static_cast<int>(w);
    img.height = static_cast<int>(h);
    if (keep_pixels) {
        img.pixels.resize(static_cast<Eigen::Index>(count));
        const size_t base = r.offset();
        r.raw(img.pixels.data(), count * 4, what);
        for (size_t i = 0; i < count; ++i) {
            const float v = img.pixels[static_cast<Eigen::Index>(i)];
            if (std::isnan(v)) {
                throw ParseError(base + i * 4, std::string(what) + ": NaN pixel");
            }
            if (!std::isfinite(v) || v < 0.0f || v > 1.0f) {
                throw ParseError(base + i * 4, std::string(what) + ": pixel outside [0,1]");
            }
        }
    } else {
        // Validate without retaining. Pixel floats are read in place.
        const size_t base = r.offset();
        for (size_t i = 0; i < count; ++i) {
            const float v = r.f32();
            if (std::isnan(v)) {
                throw ParseError(base + i * 4, std::string(what) + ": NaN pixel");
            }
            if (!std::isfinite(v) || v < 0.0f || v > 1.0f) {
                throw ParseError(base + i * 4, std::string(what) + ": pixel outside [0,1]");
            }
        }
    }
    return img;
}

}  // namespace

void ExamPair::validate() const {
    check_ring_order(*this);
    for (const auto& ring : rings) ring.image.validate("ring image");
    slo.validate("slo image");
    vf.validate();
    if (vf.eye != eye || vf.patient_id != patient_id || vf.exam_time != exam_time) {
        throw Error("exam: VF metadata disagrees with exam metadata");
    }
}

std::string modality_name(Modality m) {
    switch (m) {
        case Modality::Ring35: return "ring3.5";
        case Modality::Ring41: return "ring4.1";
        case Modality::Ring47: return "ring4.7";
        case Modality::Slo: return "slo";
    }
    throw Error("bad modality");
}

Modality parse_modality(const std::string& name) {
    for (Modality m : {Modality::Ring35, Modality::Ring41, Modality::Ring47, Modality::Slo}) {
        if (modality_name(m) == name) return m;
    }
    throw Error("unknown modality '" + name + "', expected ring3.5|ring4.1|ring4.7|slo");
}

const RasterImage& modality_image(const ExamPair& exam, Modality m) {
    if (m == Modality::Slo) return exam.slo;
    return exam.rings[static_cast<int>(m)].image;
}

std::string write_container(const std::vector<ExamPair>& exams) {
    const VFGrid& grid = grid_24_2();
    ByteWriter w;
    w.raw(kMagic, sizeof kMagic);
    w.u16(kVersion);
    w.u32(static_cast<uint32_t>(exams.size()));
    for (const ExamPair& exam : exams) {
        exam.validate();
        w.u32(exam.patient_id);
        w.u8(static_cast<uint8_t>(exam.eye));
        w.i64(exam.exam_time);
        for (int i = 0; i < grid.size(); ++i) {
            const int a = grid.active_index(i);
            w.f32(a < 0 ? std::numeric_limits<float>::quiet_NaN() : exam.vf.thresholds[a]);
        }
        w.f32(exam.vf.md);
        w.f32(exam.vf.fp);
        w.f32(exam.vf.fn);
        w.f32(exam.vf.fl);
        for (const OctRing& ring : exam.rings) {
            w.f32(ring.diameter_mm);
            write_image(w, ring.image);
        }
        write_image(w, exam.slo);
    }
    return w.take();
}

std::vector<ExamPair> parse_container_select(const std::string& bytes, ImageSelect keep) {
    const VFGrid& grid = grid_24_2();
    ByteReader r(bytes);

    char magic[8];
    r.raw(magic, sizeof magic, "magic");
    if (std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
        throw ParseError(0, "bad magic, not an OCTVF container");
    }
    const size_t version_at = r.offset();
    const uint16_t version = r.u16();
    if (version != kVersion) {
        throw ParseError(version_at, "unsupported version " + std::to_string(version));
    }
    const uint32_t count = r.u32();

    std::vector<ExamPair> exams;
    exams.reserve(count);
    for (uint32_t e = 0; e < count; ++e) {
        ExamPair exam;
        exam.patient_id = r.u32();
        const size_t eye_at = r.offset();
        const uint8_t eye = r.u8();
        if (eye > 1) throw ParseError(eye_at, "bad eye code " + std::to_string(eye));
        exam.eye = static_cast<Eye>(eye);
        exam.exam_time = r.i64();

        exam.vf.thresholds.resize(grid.active_count());
        for (int i = 0; i < grid.size(); ++i) {
            const size_t at = r.offset();
            const float t = r.f32();
            const int a = grid.active_index(i);
            if (a < 0) {
                if (!std::isnan(t)) {
                    throw ParseError(at, "blind-spot slot " + std::to_string(i) +
                                             " must be NaN");
                }
            } else {
                if (!std::isfinite(t) || t < -1.0f || t > 50.0f) {
                    throw ParseError(at, "threshold slot " + std::to_string(i) +
                                             " outside [-1,50] dB");
                }
                exam.vf.thresholds[a] = t;
            }
        }
        exam.vf.md = r.f32();
        exam.vf.fp = r.f32();
        exam.vf.fn = r.f32();
        exam.vf.fl = r.f32();
        exam.vf.eye = exam.eye;
        exam.vf.patient_id = exam.patient_id;
        exam.vf.exam_time = exam.exam_time;

        // Ring blocks must appear in ascending diameter order; the
        // serialization is canonical, so any other order is invalid.
        for (int i = 0; i < 3; ++i) {
            const size_t diam_at = r.offset();
            const float diam = r.f32();
            int which = -1;
            for (int d = 0; d < 3; ++d) {
                if (diam == kRingDiameters[d]) which = d;
            }
            if (which < 0) {
                throw ParseError(diam_at, "unknown ring diameter " + std::to_string(diam));
            }
            if (which < i) {
                throw ParseError(diam_at, "duplicate ring diameter " + std::to_string(diam));
            }
            if (which > i) {
                throw ParseError(diam_at, "ring diameter " + std::to_string(diam) +
                                              " out of order, expected " +
                                              std::to_string(kRingDiameters[i]));
            }
            exam.rings[which].diameter_mm = diam;
            exam.rings[which].image = read_image(r, keep.rings[which], "ring image");
        }
        exam.slo = read_image(r, keep.slo, "slo image");

        if (!std::isfinite(exam.vf.md)) throw ParseError(r.offset(), "non-finite md");
        for (auto [v, name] : {std::pair{exam.vf.fp, "fp"}, {exam.vf.fn, "fn"},
                               {exam.vf.fl, "fl"}}) {
            if (!std::isfinite(v) || v < 0.0f || v > 1.0f) {
                throw ParseError(r.offset(), std::string("reliability index ") + name +
                                                 " outside [0,1]");
            }
        }
        exams.push_back(std::move(exam));
    }
    if (!r.eof()) {
        throw ParseError(r.offset(), "trailing bytes after last exam");
    }
    return exams;
}

std::vector<ExamPair> parse_container(const std::string& bytes) {
    return parse_container_select(bytes, ImageSelect::all());
}

std::vector<ExamPair> parse_container_file_select(const std::string& path, ImageSelect keep) {
    return parse_container_select(read_file_bytes(path), keep);
}

void write_container_file(const std::string& path, const std::vector<ExamPair>& exams) {
    write_file_bytes(path, write_container(exams));
}

std::vector<ExamPair> parse_container_file(const std::string& path) {
    return parse_container(read_file_bytes(path));
}

size_t container_byte_size(const std::vector<ExamPair>& exams) {
    size_t size = 8 + 2 + 4;  // magic, version, count
    for (const ExamPair& exam : exams) {
        size += 4 + 1 + 8;                     // patient, eye, time
        size += (kGridPoints + 4) * 4;         // thresholds + md/fp/fn/fl
        for (const OctRing& ring : exam.rings) {
            size += 4 + 8 + static_cast<size_t>(ring.image.width) * ring.image.height * 4;
        }
        size += 8 + static_cast<size_t>(exam.slo.width) * exam.slo.height * 4;
    }
    return size;
}

std::string exam_id(size_t ordinal) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "e%06zu", ordinal);
    return buf;
}

}  // namespace octvf

#include "octvf/ingest.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>

#include "octvf/augment.hpp"
#include "octvf/bytes.hpp"
#include "octvf/csv.hpp"

namespace octvf {

namespace {

// PGM token scanner: skips whitespace and '#' comments.
struct PgmScanner {
    const std::string& bytes;
    size_t pos = 0;

    std::string token(const std::string& what) {
        for (;;) {
            while (pos < bytes.size() && std::isspace(static_cast<unsigned char>(bytes[pos]))) {
                ++pos;
            }
            if (pos < bytes.size() && bytes[pos] == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
                continue;
            }
            break;
        }
        size_t start = pos;
        while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
            ++pos;
        }
        if (start == pos) throw Error(what + ": truncated PGM header");
        return bytes.substr(start, pos - start);
    }
};

}  // namespace

RasterImage read_pgm(const std::string& bytes, const std::string& what) {
    PgmScanner scan{bytes};
    const std::string magic = scan.token(what);
    if (magic != "P5" && magic != "P2") {
        throw Error(what + ": not a PGM file (magic '" + magic + "')");
    }
    const long long w = parse_int(scan.token(what), what + " width");
    const long long h = parse_int(scan.token(what), what + " height");
    const long long maxval = parse_int(scan.token(what), what + " maxval");
    if (w < 1 || h < 1) throw Error(what + ": non-positive dimensions");
    if (maxval < 1 || maxval > 65535) throw Error(what + ": bad maxval");

    RasterImage img(static_cast<int>(w), static_cast<int>(h));
    const size_t count = static_cast<size_t>(w) * h;
    if (magic == "P2") {
        for (size_t i = 0; i < count; ++i) {
            const long long v = parse_int(scan.token(what), what + " pixel");
            img.pixels[static_cast<Eigen::Index>(i)] =
                static_cast<float>(static_cast<double>(v) / maxval);
        }
    } else {
        scan.pos += 1;  // single whitespace byte after maxval
        const int bpp = maxval > 255 ? 2 : 1;
        if (bytes.size() - scan.pos < count * bpp) {
            throw Error(what + ": truncated PGM payload");
        }
        const unsigned char* p = reinterpret_cast<const unsigned char*>(bytes.data()) + scan.pos;
        for (size_t i = 0; i < count; ++i) {
            unsigned v = bpp == 1 ? p[i] : (static_cast<unsigned>(p[2 * i]) << 8) | p[2 * i + 1];
            img.pixels[static_cast<Eigen::Index>(i)] =
                static_cast<float>(static_cast<double>(v) / maxval);
        }
    }
    img.validate(what.c_str());
    return img;
}

RasterImage read_pgm_file(const std::string& path) {
    return read_pgm(read_file_bytes(path), path);
}

void write_pgm_file(const std::string& path, const RasterImage& img) {
    img.validate("pgm output");
    std::string out = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) +
                      "\n65535\n";
    out.reserve(out.size() + static_cast<size_t>(img.width) * img.height * 2);
    for (Eigen::Index i = 0; i < img.pixels.size(); ++i) {
        const unsigned v = static_cast<unsigned>(std::lround(img.pixels[i] * 65535.0f));
        out.push_back(static_cast<char>((v >> 8) & 0xff));
        out.push_back(static_cast<char>(v & 0xff));
    }
    write_file_bytes(path, out);
}

std::vector<VFExam> load_vf_csv(const std::string& csv_text) {
    const Csv csv = Csv::parse(csv_text);
    const VFGrid& grid = grid_24_2();
    for (const char* name : {"patient_id", "eye", "exam_time", "md", "fp", "fn", "fl"}) {
        if (csv.column(name) < 0) throw Error(std::string("vf csv: missing column ") + name);
    }
    std::vector<int> t_cols(grid.size());
    for (int i = 0; i < grid.size(); ++i) {
        char name[16];
        std::snprintf(name, sizeof name, "t%02d", i + 1);
        t_cols[i] = csv.column(name);
        if (t_cols[i] < 0) throw Error(std::string("vf csv: missing column ") + name);
    }

    std::vector<VFExam> exams;
    for (size_t r = 0; r < csv.rows.size(); ++r) {
        const std::string where = "vf csv row " + std::to_string(r + 2);
        const auto& row = csv.rows[r];
        VFExam exam;
        exam.patient_id =
            static_cast<uint32_t>(parse_int(row[csv.column("patient_id")], where));
        exam.eye = parse_eye(row[csv.column("eye")]);
        exam.exam_time = parse_int(row[csv.column("exam_time")], where);
        exam.md = static_cast<float>(parse_double(row[csv.column("md")], where));
        exam.fp = static_cast<float>(parse_double(row[csv.column("fp")], where));
        exam.fn = static_cast<float>(parse_double(row[csv.column("fn")], where));
        exam.fl = static_cast<float>(parse_double(row[csv.column("fl")], where));
        exam.thresholds.resize(grid.active_count());
        for (int i = 0; i < grid.size(); ++i) {
            const std::string& cell = row[t_cols[i]];
            const int a = grid.active_index(i);
            if (a < 0) {
                if (!cell.empty()) {
                    throw Error(where + ": blind-spot column t" + std::to_string(i + 1) +
                                " must be empty");
                }
                continue;
            }
            float t = static_cast<float>(parse_double(cell, where));
            if (t < -1.0f || t > 50.0f) {
                throw Error(where + ": threshold t" + std::to_string(i + 1) +
                            " outside [-1,50] dB");
            }
            if (t < 0.0f) t = 0.0f;  // "<0 dB" sentinel clamps to 0
            exam.thresholds[a] = t;
        }
        exam.validate();
        exams.push_back(std::move(exam));
    }
    return exams;
}

std::vector<VFExam> load_vf_csv_file(const std::string& path) {
    return load_vf_csv(read_file_bytes(path));
}

std::vector<ExamPair> ingest_exams(const std::string& vf_csv_path, const std::string& image_dir,
                                   bool normalize_od) {
    std::vector<VFExam> vf = load_vf_csv_file(vf_csv_path);
    std::vector<ExamPair> exams;
    exams.reserve(vf.size());
    for (VFExam& exam : vf) {
        const std::string stem = image_dir + "/" + std::to_string(exam.patient_id) + "_" +
                                 eye_name(exam.eye) + "_" + std::to_string(exam.exam_time) + "_";
        ExamPair pair;
        const bool mirror = normalize_od && exam.eye == Eye::OS;
        for (int i = 0; i < 3; ++i) {
            pair.rings[i].diameter_mm = kRingDiameters[i];
            static const char* ring_names[] = {"ring3.5", "ring4.1", "ring4.7"};
            pair.rings[i].image = read_pgm_file(stem + ring_names[i] + ".pgm");
            if (mirror) pair.rings[i].image = flip_horizontal(pair.rings[i].image);
        }
        pair.slo = read_pgm_file(stem + "slo.pgm");
        if (mirror) pair.slo = flip_horizontal(pair.slo);
        pair.vf = mirror ? mirror_exam(exam) : exam;
        pair.patient_id = pair.vf.patient_id;
        pair.eye = pair.vf.eye;
        pair.exam_time = pair.vf.exam_time;
        pair.validate();
        exams.push_back(std::move(pair));
    }
    return exams;
}

}  // namespace octvf

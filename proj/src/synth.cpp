#include "octvf/synth.hpp"

#include <cmath>

#include "octvf/csv.hpp"
#include "octvf/rng.hpp"

namespace octvf {

namespace {

constexpr double kBackground = 0.08;
constexpr double kBandIntensity = 0.70;  // band adds this on top of background

double logistic(double x) {
    return 1.0 / (1.0 + std::exp(-x));
}

}  // namespace

void SynthConfig::validate() const {
    if (n_patients < 1 || exams_per_patient < 1) throw Error("synth: empty dataset");
    if (ring_width < 8 || ring_height < 8 || slo_size < 8) {
        throw Error("synth: image dimensions too small");
    }
    if (!(base_thickness_px >= 2.0 && base_thickness_px <= ring_height / 2.0)) {
        throw Error("synth: base thickness must lie in [2, height/2]");
    }
    for (double amp : sector_amplitudes) {
        if (!(amp >= 0.0 && amp <= 1.0)) throw Error("synth: amplitude outside [0,1]");
        const double min_px = base_thickness_px * (1.0 - amp);
        if (amp != 1.0 && min_px < 1.0) {
            throw Error("synth: amplitude leaves a sub-pixel band; use 1 for complete loss");
        }
    }
    if (fixed_damage) {
        for (double d : *fixed_damage) {
            if (!(d >= 0.0 && d <= 1.0)) throw Error("synth: fixed damage outside [0,1]");
        }
    }
    if (!(ceiling_db > floor_db)) throw Error("synth: ceiling must exceed floor");
    if (ceiling_db > 40.0) throw Error("synth: ceiling above 40 dB");
    if (!(law_slope > 0.0)) throw Error("synth: law slope must be > 0");
    if (noise_db < 0.0 || noise_px < 0.0) throw Error("synth: negative noise");
    if (!(unreliable_prob >= 0.0 && unreliable_prob <= 1.0)) {
        throw Error("synth: unreliable_prob outside [0,1]");
    }
}

double synth_law(const SynthConfig& config, double thickness_norm) {
    const double k = config.law_slope;
    const double lo = logistic(-k / 2.0);
    const double hi = logistic(k / 2.0);
    const double s = (logistic(k * (thickness_norm - 0.5)) - lo) / (hi - lo);
    return config.floor_db + (config.ceiling_db - config.floor_db) * s;
}

Sector sector_of_angle(double deg) {
    double a = std::fmod(deg, 360.0);
    if (a < 0) a += 360.0;
    // Disc sectors for a right eye, 0 at the temporal horizontal, angles
    // increasing through superior (TSNIT). Each maps to the VF sector its
    // fiber bundle serves (superior disc serves inferior field and so on).
    if (a >= 311.0 || a < 40.0) return Sector::Central;        // temporal disc
    if (a < 80.0) return Sector::Inferior;                     // superotemporal
    if (a < 120.0) return Sector::InferiorNasal;               // superonasal
    if (a < 230.0) return Sector::Temporal;                    // nasal
    if (a < 270.0) return Sector::SuperiorNasal;               // inferonasal
    return Sector::Superior;                                   // inferotemporal
}

double ring_thickness_factor(float diameter_mm) {
    return std::sqrt(3.5 / static_cast<double>(diameter_mm));
}

namespace {

RasterImage render_ring(const SynthConfig& cfg, const std::array<double, kSectorCount>& damage,
                        float diameter_mm, Rng& rng) {
    RasterImage img(cfg.ring_width, cfg.ring_height);
    const double factor = ring_thickness_factor(diameter_mm);
    for (int x = 0; x < cfg.ring_width; ++x) {
        const double angle = 360.0 * (x + 0.5) / cfg.ring_width;
        const Sector s = sector_of_angle(angle);
        const double thickness =
            cfg.base_thickness_px * factor * (1.0 - damage[static_cast<int>(s)]);
        const double y0 = cfg.ring_height / 2.0 - thickness / 2.0;
        const double y1 = y0 + thickness;
        for (int y = 0; y < cfg.ring_height; ++y) {
            // Fractional coverage of [y, y+1) by the band keeps the column
            // sum an exact linear readout of thickness at zero noise.
            const double cover =
                std::max(0.0, std::min<double>(y + 1, y1) - std::max<double>(y, y0));
            double v = kBackground + kBandIntensity * cover;
            if (cfg.noise_px > 0.0) v += rng.normal(0.0, cfg.noise_px);
            img.at(x, y) = static_cast<float>(std::clamp(v, 0.0, 1.0));
        }
    }
    return img;
}

RasterImage render_slo(const SynthConfig& cfg, double mean_damage, Rng& rng) {
    RasterImage img(cfg.slo_size, cfg.slo_size);
    const double cx = 0.32 * cfg.slo_size;
    const double cy = 0.50 * cfg.slo_size;
    const double radius = 0.13 * cfg.slo_size;
    const double brightness = 0.65 * (1.0 - 0.5 * mean_damage);
    for (int y = 0; y < cfg.slo_size; ++y) {
        for (int x = 0; x < cfg.slo_size; ++x) {
            const double d2 = ((x - cx) * (x - cx) + (y - cy) * (y - cy)) / (radius * radius);
            double v = 0.15 + brightness * std::exp(-0.5 * d2);
            if (cfg.noise_px > 0.0) v += rng.normal(0.0, cfg.noise_px);
            img.at(x, y) = static_cast<float>(std::clamp(v, 0.0, 1.0));
        }
    }
    return img;
}

}  // namespace

SynthOutput generate_dataset(const SynthConfig& cfg) {
    cfg.validate();
    const VFGrid& grid = grid_24_2();
    const SectorMap& sectors = default_sector_map();

    std::vector<ExamPair> exams;
    std::string truth = "exam_id,patient_id,severity";
    for (int s = 0; s < kSectorCount; ++s) {
        truth += ",damage_" + sector_name(static_cast<Sector>(s));
    }
    truth += "\n";

    size_t ordinal = 0;
    for (int p = 0; p < cfg.n_patients; ++p) {
        Rng patient_rng(hash_combine(cfg.seed, 0x70000000u + static_cast<uint64_t>(p)));
        const double severity = patient_rng.uniform(0.05, 0.95);
        std::array<double, kSectorCount> trend;
        for (int s = 0; s < kSectorCount; ++s) {
            trend[s] = std::clamp(severity * patient_rng.uniform(0.25, 1.25), 0.0, 1.0) *
                       cfg.sector_amplitudes[s];
        }

        for (int e = 0; e < cfg.exams_per_patient; ++e) {
            Rng rng(hash_combine(hash_combine(cfg.seed, 0xe0000000u + p), e));
            std::array<double, kSectorCount> damage;
            double mean_damage = 0.0;
            for (int s = 0; s < kSectorCount; ++s) {
                if (cfg.fixed_damage) {
                    damage[s] = (*cfg.fixed_damage)[s];
                } else {
                    // Exams of one patient share the trend, with a small drift.
                    damage[s] = std::clamp(trend[s] + rng.normal(0.0, 0.02), 0.0,
                                           cfg.sector_amplitudes[s]);
                }
                mean_damage += damage[s] / kSectorCount;
            }

            ExamPair exam;
            exam.patient_id = static_cast<uint32_t>(p + 1);
            exam.eye = Eye::OD;
            exam.exam_time = 1600000000 + static_cast<int64_t>(p) * 2592000 +
                             static_cast<int64_t>(e) * 86400;
            for (int r = 0; r < 3; ++r) {
                exam.rings[r].diameter_mm = kRingDiameters[r];
                exam.rings[r].image = render_ring(cfg, damage, kRingDiameters[r], rng);
            }
            exam.slo = render_slo(cfg, mean_damage, rng);

            exam.vf.thresholds.resize(grid.active_count());
            for (int a = 0; a < grid.active_count(); ++a) {
                const int s = static_cast<int>(sectors.sector(a));
                double t = synth_law(cfg, 1.0 - damage[s]);
                if (cfg.noise_db > 0.0) t += rng.normal(0.0, cfg.noise_db);
                exam.vf.thresholds[a] = static_cast<float>(std::clamp(t, 0.0, 50.0));
            }
            // MD against the flat healthy reference (the law ceiling).
            exam.vf.md = static_cast<float>(
                exam.vf.thresholds.cast<double>().mean() - cfg.ceiling_db);

            if (rng.uniform() < cfg.unreliable_prob) {
                const int which = static_cast<int>(rng.uniform_int(3));
                const double fp = which == 0 ? 0.15 * (1.05 + rng.uniform(0.0, 0.5))
                                             : rng.uniform(0.0, 0.15);
                const double fn = which == 1 ? 0.33 * (1.05 + rng.uniform(0.0, 0.5))
                                             : rng.uniform(0.0, 0.33);
                const double fl = which == 2 ? 0.20 * (1.05 + rng.uniform(0.0, 0.5))
                                             : rng.uniform(0.0, 0.20);
                exam.vf.fp = static_cast<float>(std::min(fp, 1.0));
                exam.vf.fn = static_cast<float>(std::min(fn, 1.0));
                exam.vf.fl = static_cast<float>(std::min(fl, 1.0));
            } else {
                exam.vf.fp = static_cast<float>(rng.uniform(0.0, 0.15));
                exam.vf.fn = static_cast<float>(rng.uniform(0.0, 0.33));
                exam.vf.fl = static_cast<float>(rng.uniform(0.0, 0.20));
            }
            exam.vf.eye = exam.eye;
            exam.vf.patient_id = exam.patient_id;
            exam.vf.exam_time = exam.exam_time;

            truth += exam_id(ordinal) + "," + std::to_string(exam.patient_id) + "," +
                     format_f64(severity);
            for (int s = 0; s < kSectorCount; ++s) truth += "," + format_f64(damage[s]);
            truth += "\n";
            ++ordinal;
            exams.push_back(std::move(exam));
        }
    }

    SynthOutput out;
    out.container_bytes = write_container(exams);
    out.truth_csv = std::move(truth);
    return out;
}

Eigen::VectorXd oracle_predictor(const SynthConfig& cfg, const ExamPair& exam) {
    const VFGrid& grid = grid_24_2();
    const SectorMap& sectors = default_sector_map();

    // Mean normalized thickness per sector, averaged over the three rings.
    std::array<double, kSectorCount> u_sum{};
    std::array<int, kSectorCount> u_count{};
    for (const OctRing& ring : exam.rings) {
        const RasterImage& img = ring.image;
        if (img.width == 0) throw Error("oracle: ring image missing");
        const double factor = ring_thickness_factor(ring.diameter_mm);
        for (int x = 0; x < img.width; ++x) {
            double sum = 0.0;
            for (int y = 0; y < img.height; ++y) sum += img.at(x, y);
            const double thickness = (sum - kBackground * img.height) / kBandIntensity;
            const double u = std::clamp(thickness / (cfg.base_thickness_px * factor), 0.0, 1.0);
            const Sector s = sector_of_angle(360.0 * (x + 0.5) / img.width);
            u_sum[static_cast<int>(s)] += u;
            u_count[static_cast<int>(s)] += 1;
        }
    }

    Eigen::VectorXd out(grid.active_count());
    for (int a = 0; a < grid.active_count(); ++a) {
        const int s = static_cast<int>(sectors.sector(a));
        if (u_count[s] == 0) throw Error("oracle: sector with no ring columns");
        out[a] = synth_law(cfg, u_sum[s] / u_count[s]);
    }
    return out;
}

}  // namespace octvf

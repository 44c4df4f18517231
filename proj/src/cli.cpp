#include "octvf/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <map>
#include <set>

#include "octvf/bytes.hpp"
#include "octvf/csv.hpp"
#include "octvf/gradcheck.hpp"
#include "octvf/ingest.hpp"
#include "octvf/metrics.hpp"
#include "octvf/report.hpp"
#include "octvf/synth.hpp"
#include "octvf/trainer.hpp"

namespace octvf {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

/// Everything a pipeline stage may need, JSON-configurable with flag
/// overrides. Seeds are always explicit; nothing defaults to wall clock.
struct RunConfig {
    std::string container;
    std::string out_dir;
    uint64_t seed = 0;
    int jobs = 1;
    SplitRatios ratios;
    ReliabilityLimits limits;
    TrainConfig train;
    AugmentConfig augment;
    ModelSpec model;
    int bootstrap_iterations = 5000;
    double ci_level = 0.95;
    std::string retest_ci_path;   // empty: bundled default table
    std::string sector_map_path;  // empty: bundled default map
    SynthConfig synth;
};

#define TRY_FIELD(name, ...)                                             \
    try {                                                                 \
        __VA_ARGS__;                                                      \
    } catch (const json::exception& e) {                                  \
        problems.push_back(std::string(name) + ": " + e.what());          \
    }

RunConfig parse_run_config(const json& j, std::vector<std::string>& problems) {
    RunConfig cfg;
    static const std::set<std::string> known = {
        "container", "out_dir", "seed", "jobs",  "split", "reliability",
        "train",     "augment", "model", "eval", "synth",
    };
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!known.count(it.key())) problems.push_back("unknown config key '" + it.key() + "'");
    }

    TRY_FIELD("container", cfg.container = j.value("container", ""));
    TRY_FIELD("out_dir", cfg.out_dir = j.value("out_dir", ""));
    TRY_FIELD("seed", cfg.seed = j.value("seed", uint64_t{0}));
    TRY_FIELD("jobs", cfg.jobs = j.value("jobs", 1));
    if (cfg.jobs < 1) problems.push_back("jobs: must be >= 1");

    if (j.contains("split")) {
        const json& s = j["split"];
        TRY_FIELD("split.ratios",
            {
                if (s.contains("ratios")) {
                    auto r = s["ratios"].get<std::vector<double>>();
                    if (r.size() != 3) {
                        problems.push_back("split.ratios: expected 3 values");
                    } else {
                        cfg.ratios = {r[0], r[1], r[2]};
                    }
                }
            });
        if (std::abs(cfg.ratios.train + cfg.ratios.val + cfg.ratios.test - 1.0) > 1e-9) {
            problems.push_back("split.ratios: must sum to 1");
        }
    }
    if (j.contains("reliability")) {
        const json& r = j["reliability"];
        TRY_FIELD("reliability.fp_max", cfg.limits.fp_max = r.value("fp_max", cfg.limits.fp_max));
        TRY_FIELD("reliability.fn_max", cfg.limits.fn_max = r.value("fn_max", cfg.limits.fn_max));
        TRY_FIELD("reliability.fl_max", cfg.limits.fl_max = r.value("fl_max", cfg.limits.fl_max));
        for (auto [v, name] : {std::pair{cfg.limits.fp_max, "fp_max"},
                               {cfg.limits.fn_max, "fn_max"},
                               {cfg.limits.fl_max, "fl_max"}}) {
            if (v < 0.0f || v > 1.0f) {
                problems.push_back(std::string("reliability.") + name + ": outside [0,1]");
            }
        }
    }
    if (j.contains("train")) {
        const json& t = j["train"];
        TRY_FIELD("train.lr0", cfg.train.lr0 = t.value("lr0", cfg.train.lr0));
        TRY_FIELD("train.batch_size", cfg.train.batch_size = t.value("batch_size", cfg.train.batch_size));
        TRY_FIELD("train.steps_per_epoch", cfg.train.steps_per_epoch = t.value("steps_per_epoch", cfg.train.steps_per_epoch));
        TRY_FIELD("train.plateau_patience", cfg.train.plateau_patience = t.value("plateau_patience", cfg.train.plateau_patience));
        TRY_FIELD("train.plateau_factor", cfg.train.plateau_factor = t.value("plateau_factor", cfg.train.plateau_factor));
        TRY_FIELD("train.max_epochs", cfg.train.max_epochs = t.value("max_epochs", cfg.train.max_epochs));
        TRY_FIELD("train.early_stop_patience",
                  cfg.train.early_stop_patience =
                      t.value("early_stop_patience", cfg.train.early_stop_patience));
        TRY_FIELD("train.target",
            {
                if (t.contains("target")) cfg.train.target = parse_target(t["target"]);
            });
        TRY_FIELD("train.modality",
            {
                if (t.contains("modality")) cfg.train.modality = parse_modality(t["modality"]);
            });
        TRY_FIELD("train.seed", cfg.train.seed = t.value("seed", cfg.seed));
        try {
            cfg.train.validate();
        } catch (const Error& e) {
            problems.push_back(e.what());
        }
    } else {
        cfg.train.seed = cfg.seed;
    }
    if (j.contains("augment")) {
        const json& a = j["augment"];
        TRY_FIELD("augment.hflip_prob", cfg.augment.hflip_prob = a.value("hflip_prob", cfg.augment.hflip_prob));
        TRY_FIELD("augment.flip_labels", cfg.augment.flip_labels = a.value("flip_labels", cfg.augment.flip_labels));
        TRY_FIELD("augment.elastic_alpha", cfg.augment.elastic_alpha = a.value("elastic_alpha", cfg.augment.elastic_alpha));
        TRY_FIELD("augment.elastic_sigma", cfg.augment.elastic_sigma = a.value("elastic_sigma", cfg.augment.elastic_sigma));
        TRY_FIELD("augment.cutout_fraction",
                  cfg.augment.cutout_fraction =
                      a.value("cutout_fraction", cfg.augment.cutout_fraction));
        try {
            cfg.augment.validate();
        } catch (const Error& e) {
            problems.push_back(e.what());
        }
    }
    if (j.contains("model")) {
        TRY_FIELD("model",
            {
                cfg.model = ModelSpec::from_json(j["model"].dump());
            });
    }
    if (j.contains("eval")) {
        const json& ev = j["eval"];
        TRY_FIELD("eval.bootstrap_iterations",
                  cfg.bootstrap_iterations =
                      ev.value("bootstrap_iterations", cfg.bootstrap_iterations));
        TRY_FIELD("eval.ci_level", cfg.ci_level = ev.value("ci_level", cfg.ci_level));
        TRY_FIELD("eval.retest_ci", cfg.retest_ci_path = ev.value("retest_ci", ""));
        TRY_FIELD("eval.sector_map", cfg.sector_map_path = ev.value("sector_map", ""));
        if (cfg.bootstrap_iterations < 1) problems.push_back("eval.bootstrap_iterations: < 1");
        if (!(cfg.ci_level > 0.0 && cfg.ci_level < 1.0)) {
            problems.push_back("eval.ci_level: outside (0,1)");
        }
    }
    if (j.contains("synth")) {
        const json& s = j["synth"];
        TRY_FIELD("synth.n_patients", cfg.synth.n_patients = s.value("n_patients", cfg.synth.n_patients));
        TRY_FIELD("synth.exams_per_patient",
                  cfg.synth.exams_per_patient =
                      s.value("exams_per_patient", cfg.synth.exams_per_patient));
        TRY_FIELD("synth.ring_width", cfg.synth.ring_width = s.value("ring_width", cfg.synth.ring_width));
        TRY_FIELD("synth.ring_height", cfg.synth.ring_height = s.value("ring_height", cfg.synth.ring_height));
        TRY_FIELD("synth.slo_size", cfg.synth.slo_size = s.value("slo_size", cfg.synth.slo_size));
        TRY_FIELD("synth.base_thickness_px",
                  cfg.synth.base_thickness_px =
                      s.value("base_thickness_px", cfg.synth.base_thickness_px));
        TRY_FIELD("synth.ceiling_db", cfg.synth.ceiling_db = s.value("ceiling_db", cfg.synth.ceiling_db));
        TRY_FIELD("synth.floor_db", cfg.synth.floor_db = s.value("floor_db", cfg.synth.floor_db));
        TRY_FIELD("synth.law_slope", cfg.synth.law_slope = s.value("law_slope", cfg.synth.law_slope));
        TRY_FIELD("synth.noise_db", cfg.synth.noise_db = s.value("noise_db", cfg.synth.noise_db));
        TRY_FIELD("synth.noise_px", cfg.synth.noise_px = s.value("noise_px", cfg.synth.noise_px));
        TRY_FIELD("synth.unreliable_prob",
                  cfg.synth.unreliable_prob =
                      s.value("unreliable_prob", cfg.synth.unreliable_prob));
        TRY_FIELD("synth.seed", cfg.synth.seed = s.value("seed", cfg.seed));
        try {
            cfg.synth.validate();
        } catch (const Error& e) {
            problems.push_back(e.what());
        }
    } else {
        cfg.synth.seed = cfg.seed;
    }

    for (auto [path, name] : {std::pair{&cfg.container, "container"},
                              {&cfg.retest_ci_path, "eval.retest_ci"},
                              {&cfg.sector_map_path, "eval.sector_map"}}) {
        if (!path->empty() && !fs::exists(*path)) {
            problems.push_back(std::string(name) + ": file does not exist: " + *path);
        }
    }
    return cfg;
}

#undef TRY_FIELD

RunConfig load_run_config(const std::string& path) {
    json j;
    try {
        j = json::parse(read_file_bytes(path));
    } catch (const json::exception& e) {
        throw Error("config " + path + ": " + e.what());
    }
    std::vector<std::string> problems;
    RunConfig cfg = parse_run_config(j, problems);
    if (!problems.empty()) {
        std::string msg = "config " + path + " is invalid:";
        for (const auto& p : problems) msg += "\n  - " + p;
        throw Error(msg);
    }
    return cfg;
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error("cannot create directory " + dir + ": " + ec.message());
}

SectorMap resolve_sector_map(const RunConfig& cfg) {
    return cfg.sector_map_path.empty() ? default_sector_map()
                                       : load_sector_map_file(cfg.sector_map_path);
}

RetestCITable resolve_retest(const RunConfig& cfg) {
    return cfg.retest_ci_path.empty() ? load_retest_ci(default_retest_ci_csv())
                                      : load_retest_ci_file(cfg.retest_ci_path);
}

/// Measured targets for the manifest exams, plus their ids.
struct EvalData {
    std::vector<std::string> ids;
    Eigen::MatrixXd measured;
};

EvalData measured_for(const std::string& container_path, const std::string& ids_path,
                      Target target) {
    const auto exams = parse_container_file_select(container_path, ImageSelect::none());
    const auto refs = read_manifest(ids_path);
    EvalData out;
    out.measured.resize(refs.size(), target == Target::MD ? 1 : kActivePoints);
    for (size_t i = 0; i < refs.size(); ++i) {
        if (refs[i] >= exams.size()) {
            throw Error("manifest refers to exam " + exam_id(refs[i]) + " but container has " +
                        std::to_string(exams.size()) + " exams");
        }
        const VFExam& vf = exams[refs[i]].vf;
        if (target == Target::MD) {
            out.measured(i, 0) = vf.md;
        } else {
            out.measured.row(i) = vf.thresholds.cast<double>().transpose();
        }
        out.ids.push_back(exam_id(refs[i]));
    }
    return out;
}

void require_matching_ids(const EvalData& data, const PredictionsFile& pred,
                          const std::string& pred_path) {
    if (data.ids.size() != pred.exam_ids.size()) {
        throw Error("prediction/exam count mismatch: " + pred_path + " has " +
                    std::to_string(pred.exam_ids.size()) + " rows, manifest selects " +
                    std::to_string(data.ids.size()) + " exams");
    }
    for (size_t i = 0; i < data.ids.size(); ++i) {
        if (data.ids[i] != pred.exam_ids[i]) {
            throw Error("prediction/exam id mismatch at row " + std::to_string(i + 1) + ": " +
                        pred.exam_ids[i] + " vs " + data.ids[i]);
        }
    }
}

// --- subcommand implementations ---

int cmd_synth_gen(const RunConfig& cfg) {
    ensure_dir(cfg.out_dir);
    const SynthOutput out = generate_dataset(cfg.synth);
    write_file_bytes(cfg.out_dir + "/container.octvf", out.container_bytes);
    write_file_bytes(cfg.out_dir + "/truth.csv", out.truth_csv);
    std::printf("wrote %s/container.octvf (%d exams) and truth.csv\n", cfg.out_dir.c_str(),
                cfg.synth.n_patients * cfg.synth.exams_per_patient);
    return 0;
}

int cmd_ingest(const std::string& csv_path, const std::string& image_dir,
               const std::string& out_path, bool normalize_od) {
    const auto exams = ingest_exams(csv_path, image_dir, normalize_od);
    write_container_file(out_path, exams);
    std::printf("wrote %s (%zu exams)\n", out_path.c_str(), exams.size());
    return 0;
}

int cmd_split(const RunConfig& cfg) {
    ensure_dir(cfg.out_dir);
    const auto exams = parse_container_file_select(cfg.container, ImageSelect::none());
    Split split = split_by_patient(exams, cfg.ratios, cfg.seed);
    split = apply_reliability_policy(split, exams, cfg.limits);
    write_manifest(cfg.out_dir + "/train.ids", split.train);
    write_manifest(cfg.out_dir + "/val.ids", split.val);
    write_manifest(cfg.out_dir + "/test.ids", split.test);
    std::printf("split %zu exams: train %zu, val %zu, test %zu (reliability-filtered)\n",
                exams.size(), split.train.exam_refs.size(), split.val.exam_refs.size(),
                split.test.exam_refs.size());
    return 0;
}

int cmd_train(const RunConfig& cfg, const std::string& split_dir) {
    ensure_dir(cfg.out_dir);
    ModelSpec spec = cfg.model;
    spec.out_channels = cfg.train.target == Target::MD ? 1 : kActivePoints;

    const auto exams = parse_container_file_select(cfg.container,
                                                   ImageSelect::only(cfg.train.modality));
    const Dataset train_set = Dataset::from_exams(exams, read_manifest(split_dir + "/train.ids"),
                                                  cfg.train.modality, spec.input_w, spec.input_h);
    const Dataset val_set = Dataset::from_exams(exams, read_manifest(split_dir + "/val.ids"),
                                                cfg.train.modality, spec.input_w, spec.input_h);

    const TrainResult result = fit(train_set, val_set, spec, cfg.train, cfg.augment);
    const std::string stem = modality_name(cfg.train.modality) + "_" +
                             target_name(cfg.train.target);
    write_file_bytes(cfg.out_dir + "/checkpoint_" + stem + ".bin", result.best_checkpoint);
    write_file_bytes(cfg.out_dir + "/train_log_" + stem + ".csv", training_log_csv(result.log));
    std::printf("trained %s: best epoch %d, val_r2 %.4f (%zu epochs run)\n", stem.c_str(),
                result.best_epoch, result.best_val_r2, result.log.size());
    return 0;
}

int cmd_predict(const RunConfig& cfg, const std::string& checkpoint_path,
                const std::string& ids_path, const std::string& out_path) {
    Checkpoint ckpt = read_checkpoint_file(checkpoint_path);
    const Modality modality = parse_modality(ckpt.meta.modality);
    const auto exams = parse_container_file_select(cfg.container, ImageSelect::only(modality));
    const Dataset data = Dataset::from_exams(exams, read_manifest(ids_path), modality,
                                             ckpt.model.spec.input_w, ckpt.model.spec.input_h);
    PredictionsFile out;
    out.target = ckpt.meta.target;
    out.exam_ids = data.ids();
    out.values = predict_batch(ckpt.model, data);
    write_file_bytes(out_path, predictions_csv(out));
    std::printf("wrote %s (%zu rows)\n", out_path.c_str(), out.exam_ids.size());
    return 0;
}

int cmd_ensemble(const std::vector<std::string>& inputs, const std::string& out_path) {
    if (inputs.empty()) throw Error("ensemble: no input prediction files");
    std::vector<PredictionsFile> files;
    std::vector<Eigen::MatrixXd> values;
    for (const auto& path : inputs) {
        files.push_back(parse_predictions_csv(read_file_bytes(path)));
        values.push_back(files.back().values);
        if (files.size() > 1) {
            if (files.back().target != files.front().target) {
                throw Error("ensemble: mixed targets between " + inputs.front() + " and " + path);
            }
            if (files.back().exam_ids != files.front().exam_ids) {
                throw Error("ensemble: exam id mismatch between " + inputs.front() + " and " +
                            path);
            }
        }
    }
    PredictionsFile out = files.front();
    out.values = ensemble_average(values);
    write_file_bytes(out_path, predictions_csv(out));
    std::printf("wrote %s (mean of %zu members)\n", out_path.c_str(), inputs.size());
    return 0;
}

int cmd_eval(const RunConfig& cfg, const std::string& ids_path,
             const std::vector<std::string>& prediction_paths,
             const std::vector<std::string>& tags) {
    ensure_dir(cfg.out_dir);
    std::vector<MetricsReport> reports;
    for (size_t i = 0; i < prediction_paths.size(); ++i) {
        const PredictionsFile pred = parse_predictions_csv(read_file_bytes(prediction_paths[i]));
        const Target target = parse_target(pred.target);
        const EvalData data = measured_for(cfg.container, ids_path, target);
        require_matching_ids(data, pred, prediction_paths[i]);
        const std::string tag =
            i < tags.size() ? tags[i] : fs::path(prediction_paths[i]).stem().string();
        reports.push_back(compute_metrics_report(data.measured, pred.values, tag, pred.target,
                                                 cfg.bootstrap_iterations, cfg.ci_level,
                                                 cfg.seed, cfg.jobs));
    }
    write_file_bytes(cfg.out_dir + "/metrics.csv", metrics_csv(reports));
    std::printf("wrote %s/metrics.csv (%zu rows)\n", cfg.out_dir.c_str(), reports.size());
    return 0;
}

int cmd_report(const RunConfig& cfg, const std::string& ids_path,
               const std::string& prediction_path, const std::string& tag) {
    const PredictionsFile pred = parse_predictions_csv(read_file_bytes(prediction_path));
    if (pred.target != "thresholds") {
        throw Error("report: pointwise/sector/binned figures need threshold predictions, got "
                    "target '" + pred.target + "'");
    }
    const EvalData data = measured_for(cfg.container, ids_path, Target::Thresholds);
    require_matching_ids(data, pred, prediction_path);

    const SectorMap sectors = resolve_sector_map(cfg);
    const RetestCITable retest = resolve_retest(cfg);

    const MetricsReport metrics =
        compute_metrics_report(data.measured, pred.values, tag, pred.target,
                               cfg.bootstrap_iterations, cfg.ci_level, cfg.seed, cfg.jobs);
    const SectorReport sector_report = sector_metrics(data.measured, pred.values, sectors);
    const auto map = pointwise_r_map(data.measured, pred.values);

    Eigen::VectorXd measured_flat(data.measured.size()), pred_flat(pred.values.size());
    Eigen::Index at = 0;
    for (Eigen::Index i = 0; i < data.measured.rows(); ++i) {
        measured_flat.segment(at, data.measured.cols()) = data.measured.row(i).transpose();
        pred_flat.segment(at, data.measured.cols()) = pred.values.row(i).transpose();
        at += data.measured.cols();
    }
    const BinnedStats binned = bin_by_measured(measured_flat, pred_flat);
    const RetestCoverage coverage = retest_coverage(binned, retest);

    render_report({metrics}, sector_report, map, binned, coverage, retest, cfg.out_dir);
    std::printf("wrote metrics.csv, sectors.csv, pointwise_map.svg, binned_whiskers.svg under "
                "%s (coverage %d/%d)\n",
                cfg.out_dir.c_str(), coverage.inside, coverage.total_whiskers);
    return 0;
}

int cmd_gradcheck(int blocks, int input_size, uint64_t seed, double tolerance) {
    ModelSpec spec;
    spec.input_h = input_size;
    spec.input_w = input_size;
    spec.stem_channels = 4;
    spec.blocks.clear();
    for (int b = 0; b < blocks; ++b) spec.blocks.push_back({6 + 2 * b, true, true});
    spec.out_channels = 1;

    Model<double> model = make_model<double>(spec, seed);
    Rng rng(hash_combine(seed, 1));
    Tensor<double> batch(2, 1, input_size, input_size);
    for (Eigen::Index i = 0; i < batch.size(); ++i) batch.data[i] = rng.uniform();
    Tensor<double> target(2, 1, 1, 1);
    target.data << 14.0, 22.0;

    const GradCheckReport report = gradient_check(model, batch, target, 1e-6, tolerance);
    std::fputs(report.summary().c_str(), stdout);
    return report.pass ? 0 : 1;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"octvf: visual-field estimation pipeline over OCT ring scans"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path, "run configuration JSON");

    // Shared option targets; each subcommand wires the subset it uses.
    std::string out, container, split_dir, ids, checkpoint, csv_path, image_dir, tag = "model";
    std::vector<std::string> predictions, tags;
    std::string modality, target, ratios_text;
    uint64_t seed = 0;
    bool seed_set = false, no_normalize = false;
    int jobs = 0;
    int gc_blocks = 2, gc_size = 8;
    double gc_tol = 1e-5;

    auto add_seed = [&](CLI::App* cmd) {
        cmd->add_option("--seed", seed, "explicit RNG seed")->each([&](const std::string&) {
            seed_set = true;
        });
    };

    CLI::App* synth_gen = app.add_subcommand("synth-gen", "generate a synthetic exam container");
    synth_gen->add_option("--out", out, "output directory")->required();
    add_seed(synth_gen);

    CLI::App* ingest = app.add_subcommand("ingest", "build a container from vf.csv plus PGM images");
    ingest->add_option("--csv", csv_path, "vf.csv path")->required();
    ingest->add_option("--images", image_dir, "directory of PGM images")->required();
    ingest->add_option("--out", out, "output container path")->required();
    ingest->add_flag("--no-normalize-od", no_normalize, "keep OS exams unmirrored");

    CLI::App* split = app.add_subcommand("split", "patient-level split with reliability policy");
    split->add_option("--container", container, "exam container")->required();
    split->add_option("--out", out, "output directory for manifests")->required();
    split->add_option("--ratios", ratios_text, "train,val,test ratios (default 0.6,0.2,0.2)");
    add_seed(split);

    CLI::App* train = app.add_subcommand("train", "fit one model per the training protocol");
    train->add_option("--container", container, "exam container")->required();
    train->add_option("--split", split_dir, "directory holding train.ids/val.ids")->required();
    train->add_option("--out", out, "output directory")->required();
    train->add_option("--modality", modality, "ring3.5|ring4.1|ring4.7|slo");
    train->add_option("--target", target, "md|thresholds");
    add_seed(train);

    CLI::App* predict = app.add_subcommand("predict", "run a checkpoint over manifest exams");
    predict->add_option("--container", container, "exam container")->required();
    predict->add_option("--ids", ids, "manifest of exams to predict")->required();
    predict->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
    predict->add_option("--out", out, "output predictions.csv path")->required();

    CLI::App* ensemble = app.add_subcommand("ensemble", "average prediction files");
    ensemble->add_option("--inputs", predictions, "prediction csv files")->required();
    ensemble->add_option("--out", out, "output predictions.csv path")->required();

    CLI::App* eval = app.add_subcommand("eval", "metrics with bootstrap intervals");
    eval->add_option("--container", container, "exam container")->required();
    eval->add_option("--ids", ids, "manifest of evaluated exams")->required();
    eval->add_option("--predictions", predictions, "prediction csv files")->required();
    eval->add_option("--tags", tags, "report tag per prediction file");
    eval->add_option("--out", out, "output directory")->required();
    eval->add_option("--jobs", jobs, "parallel bootstrap workers");
    add_seed(eval);

    CLI::App* report = app.add_subcommand("report", "full figure and table stack");
    report->add_option("--container", container, "exam container")->required();
    report->add_option("--ids", ids, "manifest of evaluated exams")->required();
    report->add_option("--predictions", predictions, "threshold prediction csv")->required();
    report->add_option("--tag", tag, "report tag");
    report->add_option("--out", out, "output directory")->required();
    report->add_option("--jobs", jobs, "parallel bootstrap workers");
    add_seed(report);

    CLI::App* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient audit");
    gradcheck->add_option("--blocks", gc_blocks, "separable blocks in the audited model");
    gradcheck->add_option("--input-size", gc_size, "square input edge in pixels");
    gradcheck->add_option("--tolerance", gc_tol, "max relative error to pass");
    add_seed(gradcheck);

    std::vector<const char*> argv;
    argv.push_back("octvf");
    for (const auto& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        RunConfig cfg = config_path.empty() ? RunConfig{} : load_run_config(config_path);
        if (seed_set) {
            cfg.seed = seed;
            cfg.train.seed = seed;
            cfg.synth.seed = seed;
        }
        if (!container.empty()) cfg.container = container;
        if (!out.empty()) cfg.out_dir = out;
        if (jobs > 0) cfg.jobs = jobs;
        if (!modality.empty()) cfg.train.modality = parse_modality(modality);
        if (!target.empty()) cfg.train.target = parse_target(target);
        if (!ratios_text.empty()) {
            const auto parts = split_fields(ratios_text);
            if (parts.size() != 3) throw Error("--ratios expects three comma-separated values");
            cfg.ratios = {parse_double(parts[0], "--ratios"), parse_double(parts[1], "--ratios"),
                          parse_double(parts[2], "--ratios")};
        }

        if (synth_gen->parsed()) return cmd_synth_gen(cfg);
        if (ingest->parsed()) return cmd_ingest(csv_path, image_dir, out, !no_normalize);
        if (split->parsed()) return cmd_split(cfg);
        if (train->parsed()) return cmd_train(cfg, split_dir);
        if (predict->parsed()) {
            cfg.out_dir = fs::path(out).parent_path().string();
            if (!cfg.out_dir.empty()) ensure_dir(cfg.out_dir);
            return cmd_predict(cfg, checkpoint, ids, out);
        }
        if (ensemble->parsed()) {
            const std::string dir = fs::path(out).parent_path().string();
            if (!dir.empty()) ensure_dir(dir);
            return cmd_ensemble(predictions, out);
        }
        if (eval->parsed()) return cmd_eval(cfg, ids, predictions, tags);
        if (report->parsed()) return cmd_report(cfg, ids, predictions.at(0), tag);
        if (gradcheck->parsed()) return cmd_gradcheck(gc_blocks, gc_size, cfg.seed, gc_tol);
        throw Error("no subcommand");
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}

int run_cli(int argc, const char* const* argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run_cli(args);
}

}  // namespace octvf

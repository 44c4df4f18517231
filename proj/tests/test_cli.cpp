#include <doctest.h>

#include <filesystem>

#include "octvf/bytes.hpp"
#include "octvf/cli.hpp"
#include "octvf/csv.hpp"

using namespace octvf;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::path("/tmp") / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& leaf) const { return (path / leaf).string(); }
};

void write_small_config(const std::string& path, uint64_t seed) {
    const std::string cfg = R"({
  "seed": )" + std::to_string(seed) + R"(,
  "synth": {"n_patients": 10, "exams_per_patient": 2, "ring_width": 48, "ring_height": 32,
            "slo_size": 32, "base_thickness_px": 8, "noise_db": 0.3, "noise_px": 0.01,
            "seed": )" + std::to_string(seed) + R"(},
  "model": {"in_channels": 1, "input_h": 32, "input_w": 48, "stem_channels": 8,
            "blocks": [{"channels": 8, "pool": true, "residual": true},
                       {"channels": 16, "pool": true, "residual": true}],
            "out_channels": 52},
  "train": {"lr0": 0.002, "steps_per_epoch": 10, "max_epochs": 2, "target": "thresholds",
            "modality": "ring4.7", "seed": )" + std::to_string(seed) + R"(},
  "eval": {"bootstrap_iterations": 50, "ci_level": 0.95}
})";
    write_file_bytes(path, cfg);
}

}  // namespace

TEST_CASE("config validation reports every violation at once") {
    TempDir dir("octvf_cli_cfg");
    write_file_bytes(dir / "bad.json", R"({
  "container": "/nonexistent/file.octvf",
  "jobs": 0,
  "typo_key": 1,
  "split": {"ratios": [0.5, 0.2, 0.2]},
  "eval": {"ci_level": 1.5}
})");
    // Parse errors surface through any subcommand touching the config.
    CHECK(run_cli({"--config", dir / "bad.json", "synth-gen", "--out", dir / "o"}) != 0);
}

TEST_CASE("synth-gen, split, train, predict, ensemble, eval, report pipeline") {
    TempDir dir("octvf_cli_pipe");
    write_small_config(dir / "cfg.json", 21);

    REQUIRE(run_cli({"--config", dir / "cfg.json", "synth-gen", "--out", dir / "data"}) == 0);
    REQUIRE(fs::exists(dir / "data/container.octvf"));
    REQUIRE(fs::exists(dir / "data/truth.csv"));

    REQUIRE(run_cli({"--config", dir / "cfg.json", "split", "--container",
                     dir / "data/container.octvf", "--out", dir / "splits", "--seed", "21"}) == 0);
    REQUIRE(fs::exists(dir / "splits/train.ids"));

    SUBCASE("split reruns are idempotent") {
        const std::string before = read_file_bytes(dir / "splits/train.ids");
        REQUIRE(run_cli({"--config", dir / "cfg.json", "split", "--container",
                         dir / "data/container.octvf", "--out", dir / "splits", "--seed",
                         "21"}) == 0);
        CHECK(read_file_bytes(dir / "splits/train.ids") == before);
    }

    SUBCASE("train, predict, ensemble, eval, report") {
        REQUIRE(run_cli({"--config", dir / "cfg.json", "train", "--container",
                         dir / "data/container.octvf", "--split", dir / "splits", "--out",
                         dir / "run"}) == 0);
        const std::string ckpt = dir / "run/checkpoint_ring4.7_thresholds.bin";
        REQUIRE(fs::exists(ckpt));
        REQUIRE(fs::exists(dir / "run/train_log_ring4.7_thresholds.csv"));

        REQUIRE(run_cli({"--config", dir / "cfg.json", "predict", "--container",
                         dir / "data/container.octvf", "--ids", dir / "splits/test.ids",
                         "--checkpoint", ckpt, "--out", dir / "run/pred.csv"}) == 0);

        REQUIRE(run_cli({"ensemble", "--inputs", dir / "run/pred.csv", dir / "run/pred.csv",
                         "--out", dir / "run/ens.csv"}) == 0);
        // Mean of two identical members equals the member.
        CHECK(Csv::read_file(dir / "run/ens.csv").rows ==
              Csv::read_file(dir / "run/pred.csv").rows);

        REQUIRE(run_cli({"--config", dir / "cfg.json", "eval", "--container",
                         dir / "data/container.octvf", "--ids", dir / "splits/test.ids",
                         "--predictions", dir / "run/pred.csv", "--tags", "ring4.7", "--out",
                         dir / "run/eval", "--seed", "3"}) == 0);
        const Csv metrics = Csv::read_file(dir / "run/eval/metrics.csv");
        REQUIRE(metrics.rows.size() == 1);
        CHECK(metrics.rows[0][0] == "ring4.7");

        // eval with a mismatched manifest fails naming both counts.
        REQUIRE(run_cli({"--config", dir / "cfg.json", "eval", "--container",
                         dir / "data/container.octvf", "--ids", dir / "splits/val.ids",
                         "--predictions", dir / "run/pred.csv", "--out", dir / "run/bad"}) != 0);

        REQUIRE(run_cli({"--config", dir / "cfg.json", "report", "--container",
                         dir / "data/container.octvf", "--ids", dir / "splits/test.ids",
                         "--predictions", dir / "run/pred.csv", "--tag", "ring4.7", "--out",
                         dir / "run/report", "--seed", "3"}) == 0);
        for (const char* f :
             {"metrics.csv", "sectors.csv", "pointwise_map.svg", "binned_whiskers.svg"}) {
            CHECK(fs::exists(dir / (std::string("run/report/") + f)));
        }
    }
}

TEST_CASE("gradcheck subcommand exits zero on the default tiny model") {
    CHECK(run_cli({"gradcheck", "--seed", "5"}) == 0);
}

TEST_CASE("unknown subcommand and missing required flags fail") {
    CHECK(run_cli({"definitely-not-a-subcommand"}) != 0);
    CHECK(run_cli({"split"}) != 0);  // missing --container/--out
}

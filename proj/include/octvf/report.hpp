#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "octvf/binning.hpp"
#include "octvf/bootstrap.hpp"
#include "octvf/sectors.hpp"

namespace octvf {

struct CiValue {
    double value = 0.0;
    double lo = 0.0;
    double hi = 0.0;
};

/// Headline metrics with bootstrap intervals for one model/ensemble tag.
struct MetricsReport {
    std::string tag;     // modality or "ensemble" label
    std::string target;  // "md" | "thresholds"
    int n_samples = 0;
    CiValue r2, pearson, mae;
    double baseline_mae = 0.0;
};

/// Pooled metrics over all (sample, point) pairs plus exam-level bootstrap
/// intervals for each statistic.
MetricsReport compute_metrics_report(const Eigen::MatrixXd& measured,
                                     const Eigen::MatrixXd& predicted, const std::string& tag,
                                     const std::string& target, int bootstrap_iterations,
                                     double level, uint64_t seed, int jobs = 1);

struct PointwiseEntry {
    int active_index = 0;
    int x_deg = 0, y_deg = 0;
    double r = 0.0;
    bool defined = false;  // false when a column is constant, rendered flagged
};

/// Per-point Pearson r over the 52 active locations.
std::vector<PointwiseEntry> pointwise_r_map(const Eigen::MatrixXd& measured,
                                            const Eigen::MatrixXd& predicted,
                                            const VFGrid& grid = grid_24_2());

struct SectorReport {
    struct Row {
        Sector sector = Sector::Central;
        double r2 = 0, pearson = 0, mae = 0, mae_baseline = 0;
    };
    std::array<Row, kSectorCount> rows;
};

/// Metrics pooled over the (sample, point) pairs of each Garway-Heath sector.
SectorReport sector_metrics(const Eigen::MatrixXd& measured, const Eigen::MatrixXd& predicted,
                            const SectorMap& map);

std::string metrics_csv(const std::vector<MetricsReport>& reports);
std::string sectors_csv(const SectorReport& report);
std::string pointwise_map_svg(const std::vector<PointwiseEntry>& entries,
                              const VFGrid& grid = grid_24_2());
std::string binned_whiskers_svg(const BinnedStats& binned, const RetestCITable& ci,
                                const RetestCoverage& coverage);

/// Writes metrics.csv, sectors.csv, pointwise_map.svg and binned_whiskers.svg
/// under out_dir. Output bytes are a pure function of the inputs.
void render_report(const std::vector<MetricsReport>& reports, const SectorReport& sectors,
                   const std::vector<PointwiseEntry>& map, const BinnedStats& binned,
                   const RetestCoverage& coverage, const RetestCITable& ci,
                   const std::string& out_dir);

}  // namespace octvf

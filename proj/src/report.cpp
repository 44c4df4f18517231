#include "octvf/report.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "octvf/bytes.hpp"
#include "octvf/csv.hpp"
#include "octvf/metrics.hpp"
#include "octvf/rng.hpp"

namespace octvf {

namespace {

Eigen::VectorXd flatten(const Eigen::MatrixXd& m) {
    Eigen::VectorXd v(m.size());
    Eigen::Index at = 0;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        v.segment(at, m.cols()) = m.row(i).transpose();
        at += m.cols();
    }
    return v;
}

std::string fmt(double v, const char* spec = "%.6g") {
    char buf[48];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

}  // namespace

MetricsReport compute_metrics_report(const Eigen::MatrixXd& measured,
                                     const Eigen::MatrixXd& predicted, const std::string& tag,
                                     const std::string& target, int bootstrap_iterations,
                                     double level, uint64_t seed, int jobs) {
    if (measured.rows() != predicted.rows() || measured.cols() != predicted.cols()) {
        throw Error("metrics report: measured/predicted shape mismatch");
    }
    MetricsReport report;
    report.tag = tag;
    report.target = target;
    report.n_samples = static_cast<int>(measured.rows());

    const Eigen::VectorXd m = flatten(measured);
    const Eigen::VectorXd p = flatten(predicted);
    report.r2.value = r2(m, p);
    report.pearson.value = pearson_r(m, p);
    report.mae.value = mae(m, p);
    report.baseline_mae = baseline_mae(m);

    struct Item {
        CiValue* slot;
        PairedStatistic stat;
    };
    const Item items[] = {
        {&report.r2, [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return r2(a, b); }},
        {&report.pearson,
         [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return pearson_r(a, b); }},
        {&report.mae,
         [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return mae(a, b); }},
    };
    uint64_t stream = 0;
    for (const Item& item : items) {
        const BootstrapInterval ci = bootstrap_ci(item.stat, measured, predicted,
                                                  bootstrap_iterations, level,
                                                  hash_combine(seed, stream++), jobs);
        item.slot->lo = ci.low;
        item.slot->hi = ci.high;
    }
    return report;
}

std::vector<PointwiseEntry> pointwise_r_map(const Eigen::MatrixXd& measured,
                                            const Eigen::MatrixXd& predicted,
                                            const VFGrid& grid) {
    if (measured.cols() != grid.active_count() || predicted.cols() != grid.active_count()) {
        throw Error("pointwise map: expected " + std::to_string(grid.active_count()) +
                    " columns");
    }
    if (measured.rows() < 2) throw Error("pointwise map: need at least 2 exams");
    std::vector<PointwiseEntry> out;
    for (int a = 0; a < grid.active_count(); ++a) {
        const VFPoint& pt = grid.point(grid.full_index(a));
        PointwiseEntry e;
        e.active_index = a;
        e.x_deg = pt.x_deg;
        e.y_deg = pt.y_deg;
        try {
            e.r = pearson_r(measured.col(a), predicted.col(a));
            e.defined = true;
        } catch (const Error&) {
            e.r = std::numeric_limits<double>::quiet_NaN();
            e.defined = false;  // constant column: flagged, never silently 0
        }
        out.push_back(e);
    }
    return out;
}

SectorReport sector_metrics(const Eigen::MatrixXd& measured, const Eigen::MatrixXd& predicted,
                            const SectorMap& map) {
    if (measured.cols() != static_cast<Eigen::Index>(map.assignment().size())) {
        throw Error("sector metrics: column count does not match the sector map");
    }
    SectorReport report;
    for (int s = 0; s < kSectorCount; ++s) {
        const Sector sector = static_cast<Sector>(s);
        std::vector<double> ms, ps;
        for (int a = 0; a < static_cast<int>(map.assignment().size()); ++a) {
            if (map.sector(a) != sector) continue;
            for (Eigen::Index i = 0; i < measured.rows(); ++i) {
                ms.push_back(measured(i, a));
                ps.push_back(predicted(i, a));
            }
        }
        const Eigen::VectorXd m = Eigen::Map<const Eigen::VectorXd>(ms.data(), ms.size());
        const Eigen::VectorXd p = Eigen::Map<const Eigen::VectorXd>(ps.data(), ps.size());
        auto& row = report.rows[s];
        row.sector = sector;
        row.r2 = r2(m, p);
        row.pearson = pearson_r(m, p);
        row.mae = mae(m, p);
        row.mae_baseline = baseline_mae(m);
    }
    return report;
}

std::string metrics_csv(const std::vector<MetricsReport>& reports) {
    std::string out =
        "tag,target,n,r2,r2_lo,r2_hi,pearson,pearson_lo,pearson_hi,mae,mae_lo,mae_hi,"
        "baseline_mae\n";
    for (const auto& r : reports) {
        out += r.tag + "," + r.target + "," + std::to_string(r.n_samples) + "," +
               format_f64(r.r2.value) + "," + format_f64(r.r2.lo) + "," + format_f64(r.r2.hi) +
               "," + format_f64(r.pearson.value) + "," + format_f64(r.pearson.lo) + "," +
               format_f64(r.pearson.hi) + "," + format_f64(r.mae.value) + "," +
               format_f64(r.mae.lo) + "," + format_f64(r.mae.hi) + "," +
               format_f64(r.baseline_mae) + "\n";
    }
    return out;
}

std::string sectors_csv(const SectorReport& report) {
    std::string out = "sector,r2,pearson,mae,mae_baseline\n";
    for (const auto& row : report.rows) {
        out += sector_name(row.sector) + "," + format_f64(row.r2) + "," +
               format_f64(row.pearson) + "," + format_f64(row.mae) + "," +
               format_f64(row.mae_baseline) + "\n";
    }
    return out;
}

namespace {

// r in [-1,1] mapped onto a blue-white-red ramp.
std::string r_color(double r) {
    const double t = std::clamp((r + 1.0) / 2.0, 0.0, 1.0);
    auto lerp = [](int a, int b, double u) { return static_cast<int>(a + (b - a) * u); };
    int rr, gg, bb;
    if (t < 0.5) {
        const double u = t / 0.5;
        rr = lerp(0x21, 0xf7, u), gg = lerp(0x66, 0xf7, u), bb = lerp(0xac, 0xf7, u);
    } else {
        const double u = (t - 0.5) / 0.5;
        rr = lerp(0xf7, 0xb2, u), gg = lerp(0xf7, 0x18, u), bb = lerp(0xf7, 0x2b, u);
    }
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", rr, gg, bb);
    return buf;
}

}  // namespace

std::string pointwise_map_svg(const std::vector<PointwiseEntry>& entries, const VFGrid& grid) {
    const double cell = 34.0;
    const double scale = cell / 6.0;  // grid spacing is 6 degrees
    const double cx = 320.0, cy = 180.0;
    std::string svg =
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" "
        "font-family=\"monospace\" font-size=\"11\">\n"
        "<rect width=\"640\" height=\"400\" fill=\"white\"/>\n"
        "<text x=\"16\" y=\"20\">per-point Pearson r (right-eye field coordinates)</text>\n";
    for (const auto& e : entries) {
        const double x = cx + e.x_deg * scale - cell / 2;
        const double y = cy - e.y_deg * scale - cell / 2;
        const std::string fill = e.defined ? r_color(e.r) : "#cccccc";
        svg += "<rect x=\"" + fmt(x, "%.1f") + "\" y=\"" + fmt(y, "%.1f") + "\" width=\"" +
               fmt(cell - 2.0, "%.1f") + "\" height=\"" + fmt(cell - 2.0, "%.1f") +
               "\" fill=\"" + fill + "\" stroke=\"#444444\"/>\n";
        svg += "<text x=\"" + fmt(x + 3, "%.1f") + "\" y=\"" + fmt(y + cell / 2 + 2, "%.1f") +
               "\">" + (e.defined ? fmt(e.r, "%.2f") : std::string("n/a")) + "</text>\n";
    }
    for (int i = 0; i < grid.size(); ++i) {
        const VFPoint& p = grid.point(i);
        if (!p.blind_spot) continue;
        const double x = cx + p.x_deg * scale - cell / 2;
        const double y = cy - p.y_deg * scale - cell / 2;
        svg += "<rect x=\"" + fmt(x, "%.1f") + "\" y=\"" + fmt(y, "%.1f") + "\" width=\"" +
               fmt(cell - 2.0, "%.1f") + "\" height=\"" + fmt(cell - 2.0, "%.1f") +
               "\" fill=\"#333333\"/>\n";
    }
    double mean_r = 0.0;
    int defined = 0;
    for (const auto& e : entries) {
        if (e.defined) {
            mean_r += e.r;
            ++defined;
        }
    }
    if (defined > 0) mean_r /= defined;
    svg += "<text x=\"16\" y=\"372\">mean per-point r over " + std::to_string(defined) +
           " defined cells: " + fmt(mean_r, "%.3f") + "</text>\n";
    svg += "<text x=\"16\" y=\"388\">published reference, ensemble per-point r: "
           "0.68 to 0.87</text>\n</svg>\n";
    return svg;
}

std::string binned_whiskers_svg(const BinnedStats& binned, const RetestCITable& ci,
                                const RetestCoverage& coverage) {
    const double W = 640, H = 420, ml = 50, mr = 20, mt = 30, mb = 50;
    const double lo = binned.range_lo, hi = binned.range_hi;
    const double y_lo = -5.0, y_hi = 45.0;
    auto X = [&](double v) { return ml + (v - lo) / (hi - lo) * (W - ml - mr); };
    auto Y = [&](double v) { return H - mb - (v - y_lo) / (y_hi - y_lo) * (H - mt - mb); };

    std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"420\" "
                      "font-family=\"monospace\" font-size=\"11\">\n"
                      "<rect width=\"640\" height=\"420\" fill=\"white\"/>\n";

    // Shaded retest band across the covered measured range.
    std::string pts;
    for (const auto& row : ci.rows()) {
        if (row.measured_db < lo || row.measured_db > hi) continue;
        pts += fmt(X(row.measured_db), "%.1f") + "," + fmt(Y(row.upper_db), "%.1f") + " ";
    }
    for (auto it = ci.rows().rbegin(); it != ci.rows().rend(); ++it) {
        if (it->measured_db < lo || it->measured_db > hi) continue;
        pts += fmt(X(it->measured_db), "%.1f") + "," + fmt(Y(it->lower_db), "%.1f") + " ";
    }
    svg += "<polygon points=\"" + pts + "\" fill=\"#d8e8f5\" stroke=\"none\"/>\n";

    // Identity line.
    svg += "<line x1=\"" + fmt(X(0), "%.1f") + "\" y1=\"" + fmt(Y(0), "%.1f") + "\" x2=\"" +
           fmt(X(40), "%.1f") + "\" y2=\"" + fmt(Y(40), "%.1f") +
           "\" stroke=\"#999999\" stroke-dasharray=\"4 3\"/>\n";

    // Axes and ticks.
    svg += "<line x1=\"" + fmt(ml, "%.1f") + "\" y1=\"" + fmt(Y(y_lo), "%.1f") + "\" x2=\"" +
           fmt(W - mr, "%.1f") + "\" y2=\"" + fmt(Y(y_lo), "%.1f") + "\" stroke=\"black\"/>\n";
    svg += "<line x1=\"" + fmt(ml, "%.1f") + "\" y1=\"" + fmt(Y(y_lo), "%.1f") + "\" x2=\"" +
           fmt(ml, "%.1f") + "\" y2=\"" + fmt(Y(y_hi), "%.1f") + "\" stroke=\"black\"/>\n";
    for (int v = 0; v <= 40; v += 10) {
        svg += "<text x=\"" + fmt(X(v) - 8, "%.1f") + "\" y=\"" + fmt(H - mb + 16, "%.1f") +
               "\">" + std::to_string(v) + "</text>\n";
        svg += "<text x=\"" + fmt(ml - 28, "%.1f") + "\" y=\"" + fmt(Y(v) + 4, "%.1f") + "\">" +
               std::to_string(v) + "</text>\n";
    }
    svg += "<text x=\"" + fmt(W / 2 - 60, "%.1f") + "\" y=\"" + fmt(H - 12, "%.1f") +
           "\">measured sensitivity (dB)</text>\n";
    svg += "<text x=\"14\" y=\"20\">predicted vs measured, 2 dB bins; box q25..q75, whiskers "
           "p5..p95</text>\n";

    // Boxes.
    for (size_t k = 0; k < binned.bins.size(); ++k) {
        const auto& b = binned.bins[k];
        if (b.count == 0) continue;
        const double xc = X(binned.bin_center(k));
        const double half = 6.0;
        svg += "<line x1=\"" + fmt(xc, "%.1f") + "\" y1=\"" + fmt(Y(b.p5), "%.1f") + "\" x2=\"" +
               fmt(xc, "%.1f") + "\" y2=\"" + fmt(Y(b.p95), "%.1f") + "\" stroke=\"black\"/>\n";
        svg += "<rect x=\"" + fmt(xc - half, "%.1f") + "\" y=\"" + fmt(Y(b.q75), "%.1f") +
               "\" width=\"" + fmt(2 * half, "%.1f") + "\" height=\"" +
               fmt(Y(b.q25) - Y(b.q75), "%.1f") +
               "\" fill=\"#ffffff\" stroke=\"black\"/>\n";
        svg += "<line x1=\"" + fmt(xc - half, "%.1f") + "\" y1=\"" + fmt(Y(b.median), "%.1f") +
               "\" x2=\"" + fmt(xc + half, "%.1f") + "\" y2=\"" + fmt(Y(b.median), "%.1f") +
               "\" stroke=\"#b2182b\" stroke-width=\"2\"/>\n";
    }

    svg += "<text x=\"14\" y=\"" + fmt(H - 28, "%.1f") + "\">" +
           std::to_string(coverage.inside) + " of " + std::to_string(coverage.total_whiskers) +
           " whiskers inside the 90% retest band (" + fmt(100.0 * coverage.fraction, "%.0f") +
           "%)</text>\n</svg>\n";
    return svg;
}

void render_report(const std::vector<MetricsReport>& reports, const SectorReport& sectors,
                   const std::vector<PointwiseEntry>& map, const BinnedStats& binned,
                   const RetestCoverage& coverage, const RetestCITable& ci,
                   const std::string& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw Error("cannot create output directory " + out_dir + ": " + ec.message());
    write_file_bytes(out_dir + "/metrics.csv", metrics_csv(reports));
    write_file_bytes(out_dir + "/sectors.csv", sectors_csv(sectors));
    write_file_bytes(out_dir + "/pointwise_map.svg", pointwise_map_svg(map));
    write_file_bytes(out_dir + "/binned_whiskers.svg", binned_whiskers_svg(binned, ci, coverage));
}

}  // namespace octvf

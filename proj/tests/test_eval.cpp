#include <doctest.h>

#include <algorithm>
#include <filesystem>

#include "octvf/bytes.hpp"
#include "octvf/metrics.hpp"
#include "octvf/report.hpp"
#include "octvf/rng.hpp"

using namespace octvf;

namespace {

// Independent direct-formula implementations, kept deliberately separate
// from the library path they audit.
double r2_oracle(const Eigen::VectorXd& y, const Eigen::VectorXd& yhat) {
    double mean = 0;
    for (Eigen::Index i = 0; i < y.size(); ++i) mean += y[i];
    mean /= static_cast<double>(y.size());
    double ss_res = 0, ss_tot = 0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        ss_res += (y[i] - yhat[i]) * (y[i] - yhat[i]);
        ss_tot += (y[i] - mean) * (y[i] - mean);
    }
    return 1.0 - ss_res / ss_tot;
}

double pearson_oracle(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        syy += y[i] * y[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) /
           std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
}

double mae_oracle(const Eigen::VectorXd& y, const Eigen::VectorXd& yhat) {
    double acc = 0;
    for (Eigen::Index i = 0; i < y.size(); ++i) acc += std::abs(y[i] - yhat[i]);
    return acc / static_cast<double>(y.size());
}

}  // namespace

TEST_CASE("r2 fixtures") {
    Eigen::VectorXd y(3), p(3);
    y << 1, 2, 3;
    CHECK(r2(y, y) == 1.0);
    Eigen::VectorXd mean_pred = Eigen::VectorXd::Constant(3, y.mean());
    CHECK(r2(y, mean_pred) == doctest::Approx(0.0));
    p << 1, 2, 2;
    CHECK(r2(y, p) == doctest::Approx(0.5));  // SSres=1, SStot=2

    Eigen::VectorXd constant = Eigen::VectorXd::Constant(3, 4.0);
    CHECK_THROWS_AS(r2(constant, p), Error);
    Eigen::VectorXd one(1);
    one << 2;
    CHECK_THROWS_AS(r2(one, one), Error);
}

TEST_CASE("pearson fixtures") {
    Eigen::VectorXd y(4), p(4);
    y << 1, 3, 2, 5;
    p = 2.0 * y.array() + 3.0;
    CHECK(pearson_r(y, p) == doctest::Approx(1.0));
    p = -y;
    CHECK(pearson_r(y, p) == doctest::Approx(-1.0));

    Eigen::VectorXd x3(3), y3(3);
    x3 << 1, 2, 4;
    y3 << 2, 1, 5;
    CHECK(pearson_r(x3, y3) == doctest::Approx(0.8386).epsilon(1e-4));

    Eigen::VectorXd constant = Eigen::VectorXd::Constant(4, 1.0);
    CHECK_THROWS_AS(pearson_r(y, constant), Error);
}

TEST_CASE("mae and baseline fixtures") {
    Eigen::VectorXd y(2), p(2);
    y << 0, 2;
    p << 1, 3;
    CHECK(mae(y, p) == 1.0);
    CHECK(mae(y, y) == 0.0);

    Eigen::VectorXd b(2);
    b << 0, 10;
    CHECK(baseline_mae(b) == 5.0);
    CHECK(baseline_mae(Eigen::VectorXd::Constant(5, 3.0)) == 0.0);

    // Permutation invariance of the pairs.
    Eigen::VectorXd y2(2), p2(2);
    y2 << 2, 0;
    p2 << 3, 1;
    CHECK(mae(y2, p2) == mae(y, p));
}

TEST_CASE("metrics match independent oracles to 1e-12 on 100 random vectors") {
    Rng rng(1);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 3 + static_cast<int>(rng.uniform_int(80));
        Eigen::VectorXd y(n), p(n);
        for (int i = 0; i < n; ++i) {
            y[i] = rng.normal(0, 10);
            p[i] = y[i] + rng.normal(0, 4);
        }
        CHECK(std::abs(r2(y, p) - r2_oracle(y, p)) < 1e-12);
        CHECK(std::abs(pearson_r(y, p) - pearson_oracle(y, p)) < 1e-12);
        CHECK(std::abs(mae(y, p) - mae_oracle(y, p)) < 1e-12);
    }
}

TEST_CASE("pearson is invariant under positive affine maps and flips sign on negation") {
    Rng rng(2);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 5 + static_cast<int>(rng.uniform_int(30));
        Eigen::VectorXd x(n), y(n);
        for (int i = 0; i < n; ++i) {
            x[i] = rng.normal(0, 3);
            y[i] = 0.5 * x[i] + rng.normal(0, 1);
        }
        const double base = pearson_r(x, y);
        const double a = rng.uniform(0.1, 5.0), b = rng.normal(0, 10);
        CHECK(pearson_r(x, (a * y.array() + b).matrix()) == doctest::Approx(base).epsilon(1e-9));
        CHECK(pearson_r(x, (-y.array()).matrix()) == doctest::Approx(-base).epsilon(1e-9));
    }
}

TEST_CASE("bootstrap on zero-dispersion data gives a degenerate interval") {
    Eigen::MatrixXd m(6, 2);
    Rng rng(3);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 2; ++j) m(i, j) = rng.normal(0, 5);
    auto stat = [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return r2(a, b); };
    BootstrapInterval ci = bootstrap_ci(stat, m, m, 200, 0.95, 7);
    CHECK(ci.low == 1.0);
    CHECK(ci.high == 1.0);
}

TEST_CASE("bootstrap is deterministic per seed and parallel equals serial") {
    Rng rng(4);
    Eigen::MatrixXd meas(15, 3), pred(15, 3);
    for (int i = 0; i < 15; ++i)
        for (int j = 0; j < 3; ++j) {
            meas(i, j) = rng.normal(0, 8);
            pred(i, j) = meas(i, j) + rng.normal(0, 3);
        }
    auto stat = [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return mae(a, b); };
    BootstrapInterval a = bootstrap_ci(stat, meas, pred, 500, 0.95, 11);
    BootstrapInterval b = bootstrap_ci(stat, meas, pred, 500, 0.95, 11);
    CHECK(a.low == b.low);
    CHECK(a.high == b.high);
    BootstrapInterval par = bootstrap_ci(stat, meas, pred, 500, 0.95, 11, 3);
    CHECK(par.low == a.low);
    CHECK(par.high == a.high);
    BootstrapInterval other = bootstrap_ci(stat, meas, pred, 500, 0.95, 12);
    CHECK((other.low != a.low || other.high != a.high));
}

TEST_CASE("bootstrap intervals are nested across confidence levels") {
    Rng rng(5);
    Eigen::MatrixXd meas(20, 2), pred(20, 2);
    for (int i = 0; i < 20; ++i)
        for (int j = 0; j < 2; ++j) {
            meas(i, j) = rng.normal(0, 6);
            pred(i, j) = meas(i, j) + rng.normal(0, 2);
        }
    auto stat = [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return pearson_r(a, b); };
    BootstrapInterval wide = bootstrap_ci(stat, meas, pred, 800, 0.95, 21);
    BootstrapInterval narrow = bootstrap_ci(stat, meas, pred, 800, 0.90, 21);
    CHECK(narrow.low >= wide.low);
    CHECK(narrow.high <= wide.high);
}

TEST_CASE("bootstrap CI of the mean narrows with n at fixed composition") {
    // Data composition fixed at one 1 among zeros; compare n=8 vs n=64.
    auto stat = [](const Eigen::VectorXd& a, const Eigen::VectorXd&) { return a.mean(); };
    auto width_for = [&](int copies) {
        const int n = 8 * copies;
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, 1);
        for (int i = 0; i < copies; ++i) m(i * 8, 0) = 1.0;
        BootstrapInterval ci = bootstrap_ci(stat, m, m, 2000, 0.95, 13);
        return ci.high - ci.low;
    };
    CHECK(width_for(8) < width_for(1));
}

TEST_CASE("metrics report carries consistent point estimates and interval order") {
    Rng rng(6);
    Eigen::MatrixXd meas(25, 52), pred(25, 52);
    for (int i = 0; i < 25; ++i)
        for (int j = 0; j < 52; ++j) {
            meas(i, j) = rng.uniform(0, 35);
            pred(i, j) = meas(i, j) + rng.normal(0, 3);
        }
    MetricsReport rep = compute_metrics_report(meas, pred, "ring4.7", "thresholds", 300, 0.95, 5);
    CHECK(rep.n_samples == 25);
    CHECK(rep.r2.lo <= rep.r2.value);
    CHECK(rep.r2.value <= rep.r2.hi);
    CHECK(rep.mae.lo <= rep.mae.value);
    CHECK(rep.mae.value <= rep.mae.hi);
    CHECK(rep.pearson.lo <= rep.pearson.value);
    CHECK(rep.pearson.value <= rep.pearson.hi);
    CHECK(rep.baseline_mae > 0.0);
}

TEST_CASE("pointwise map: perfect predictions give 52 ones; constant columns get flagged") {
    Rng rng(7);
    Eigen::MatrixXd meas(10, 52);
    for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 52; ++j) meas(i, j) = rng.uniform(0, 35);
    auto map = pointwise_r_map(meas, meas);
    REQUIRE(map.size() == 52);
    for (const auto& e : map) {
        CHECK(e.defined);
        CHECK(e.r == doctest::Approx(1.0));
    }

    // Swapping two prediction columns changes the map at those points.
    Eigen::MatrixXd shuffled = meas;
    shuffled.col(3).swap(shuffled.col(40));
    auto map2 = pointwise_r_map(meas, shuffled);
    CHECK(map2[3].r < 1.0 - 1e-6);
    CHECK(map2[40].r < 1.0 - 1e-6);

    // A constant prediction column is flagged undefined, never silently 0.
    Eigen::MatrixXd flat = meas;
    flat.col(7).setConstant(17.0);
    auto map3 = pointwise_r_map(meas, flat);
    CHECK_FALSE(map3[7].defined);
    CHECK(std::isnan(map3[7].r));
    CHECK(map3[6].defined);
}

TEST_CASE("sector metrics fixture") {
    const SectorMap& sm = default_sector_map();
    Rng rng(8);
    Eigen::MatrixXd meas(4, 52), pred(4, 52);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 52; ++j) {
            meas(i, j) = rng.uniform(0, 35);
            pred(i, j) = meas(i, j);
        }
    SectorReport rep = sector_metrics(meas, pred, sm);
    for (const auto& row : rep.rows) {
        CHECK(row.r2 == doctest::Approx(1.0));
        CHECK(row.mae == doctest::Approx(0.0));
    }

    // Hand-computed per-sector baseline on a 2-exam fixture: every point in
    // a sector carries the same value per exam, a then b.
    Eigen::MatrixXd m2(2, 52), p2(2, 52);
    for (int j = 0; j < 52; ++j) {
        m2(0, j) = 10.0;
        m2(1, j) = 30.0;
        p2(0, j) = 12.0;
        p2(1, j) = 28.0;
    }
    SectorReport rep2 = sector_metrics(m2, p2, sm);
    for (const auto& row : rep2.rows) {
        CHECK(row.mae == doctest::Approx(2.0));
        CHECK(row.mae_baseline == doctest::Approx(10.0));  // mean 20, |10-20|=|30-20|=10
    }
}

TEST_CASE("binning fixtures and the sort-based quantile oracle") {
    Eigen::VectorXd meas(3), pred(3);
    meas << 10.0, 10.5, 12.0;
    pred << 1.0, 2.0, 3.0;
    BinnedStats b = bin_by_measured(meas, pred);
    REQUIRE(b.bins.size() == 20);
    CHECK(b.bins[5].count == 2);  // [10,12)
    CHECK(b.bins[6].count == 1);  // [12,14)

    Eigen::VectorXd m5(5), p5v(5);
    m5 << 1, 1, 1, 1, 1;
    p5v << 9, 2, 7, 4, 5;
    BinnedStats s = bin_by_measured(m5, p5v);
    // Sort-based oracle: sorted {2,4,5,7,9}, linear interpolation quantiles.
    std::vector<double> sorted = {2, 4, 5, 7, 9};
    auto oracle = [&](double q) {
        const double h = q * 4;
        const size_t lo = static_cast<size_t>(h);
        return sorted[lo] + (h - lo) * (sorted[std::min<size_t>(lo + 1, 4)] - sorted[lo]);
    };
    CHECK(s.bins[0].median == doctest::Approx(oracle(0.5)));
    CHECK(s.bins[0].q25 == doctest::Approx(oracle(0.25)));
    CHECK(s.bins[0].q75 == doctest::Approx(oracle(0.75)));
    CHECK(s.bins[0].p5 == doctest::Approx(oracle(0.05)));
    CHECK(s.bins[0].p95 == doctest::Approx(oracle(0.95)));
    CHECK(s.bins[0].p5 <= s.bins[0].q25);
    CHECK(s.bins[0].q25 <= s.bins[0].median);
    CHECK(s.bins[0].median <= s.bins[0].q75);
    CHECK(s.bins[0].q75 <= s.bins[0].p95);

    // Constant predictions: every populated bin has p5 == p95 == c.
    Eigen::VectorXd mc(6), pc(6);
    mc << 1, 5, 9, 13, 21, 33;
    pc.setConstant(4.5);
    BinnedStats cbin = bin_by_measured(mc, pc);
    for (const auto& bin : cbin.bins) {
        if (bin.count == 0) continue;
        CHECK(bin.p5 == 4.5);
        CHECK(bin.p95 == 4.5);
    }
}

TEST_CASE("bin counts always sum to n (partition property)") {
    Rng rng(9);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 1 + static_cast<int>(rng.uniform_int(200));
        Eigen::VectorXd meas(n), pred(n);
        for (int i = 0; i < n; ++i) {
            meas[i] = rng.uniform(-2, 45);  // includes out-of-range values
            pred[i] = rng.uniform(0, 40);
        }
        BinnedStats b = bin_by_measured(meas, pred);
        int total = 0;
        for (const auto& bin : b.bins) total += bin.count;
        CHECK(total == n);
    }
}

TEST_CASE("retest coverage: universal cover, zero-width rows, whisker counting") {
    Rng rng(10);
    Eigen::VectorXd meas(200), pred(200);
    for (int i = 0; i < 200; ++i) {
        meas[i] = rng.uniform(0, 40);
        pred[i] = meas[i] + rng.normal(0, 2);
    }
    BinnedStats b = bin_by_measured(meas, pred);

    // Bounds 0..50 everywhere: every whisker inside.
    std::string wide_csv = "measured_db,lower_db,upper_db\n";
    for (int lvl = 0; lvl <= 41; ++lvl) {
        wide_csv += std::to_string(lvl) + ",-50,50\n";
    }
    RetestCoverage cov = retest_coverage(b, load_retest_ci(wide_csv));
    CHECK(cov.fraction == 1.0);
    CHECK(cov.total_whiskers == 2 * b.populated());

    // Zero-width rows: only exact hits count, effectively none here.
    std::string zero_csv = "measured_db,lower_db,upper_db\n";
    for (int lvl = 0; lvl <= 41; ++lvl) {
        zero_csv += std::to_string(lvl) + ",-1000,-1000\n";
    }
    RetestCoverage none = retest_coverage(b, load_retest_ci(zero_csv));
    CHECK(none.inside == 0);

    // A table not covering the populated bin centers errors out.
    CHECK_THROWS_AS(
        retest_coverage(b, load_retest_ci("measured_db,lower_db,upper_db\n0,0,1\n")), Error);
}

TEST_CASE("render_report writes deterministic bytes and a 52-cell map") {
    Rng rng(11);
    Eigen::MatrixXd meas(8, 52), pred(8, 52);
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 52; ++j) {
            meas(i, j) = rng.uniform(0, 35);
            pred(i, j) = meas(i, j) + rng.normal(0, 2);
        }
    MetricsReport rep = compute_metrics_report(meas, pred, "ring4.7", "thresholds", 50, 0.95, 2);
    SectorReport sectors = sector_metrics(meas, pred, default_sector_map());
    auto map = pointwise_r_map(meas, pred);

    Eigen::VectorXd mf(meas.size()), pf(pred.size());
    Eigen::Index at = 0;
    for (int i = 0; i < 8; ++i) {
        mf.segment(at, 52) = meas.row(i).transpose();
        pf.segment(at, 52) = pred.row(i).transpose();
        at += 52;
    }
    BinnedStats binned = bin_by_measured(mf, pf);
    RetestCITable retest = load_retest_ci(default_retest_ci_csv());
    RetestCoverage cov = retest_coverage(binned, retest);

    const std::string dir1 = "/tmp/octvf_report_a";
    const std::string dir2 = "/tmp/octvf_report_b";
    render_report({rep}, sectors, map, binned, cov, retest, dir1);
    render_report({rep}, sectors, map, binned, cov, retest, dir2);
    for (const char* f : {"metrics.csv", "sectors.csv", "pointwise_map.svg",
                          "binned_whiskers.svg"}) {
        CHECK(read_file_bytes(dir1 + "/" + f) == read_file_bytes(dir2 + "/" + f));
    }

    const std::string svg = read_file_bytes(dir1 + "/pointwise_map.svg");
    size_t cells = 0, pos = 0;
    while ((pos = svg.find("<text", pos)) != std::string::npos) {
        ++cells;
        pos += 5;
    }
    // 52 value labels plus title and two footer lines.
    CHECK(cells == 55);

    // Empty metric list: header-only CSV.
    CHECK(metrics_csv({}) ==
          "tag,target,n,r2,r2_lo,r2_hi,pearson,pearson_lo,pearson_hi,mae,mae_lo,mae_hi,"
          "baseline_mae\n");
}

#include "octvf/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <atomic>
#include <thread>
#include <vector>

#include "octvf/rng.hpp"

namespace octvf {

namespace {

constexpr int kRetryCap = 100;

double one_iteration(const PairedStatistic& statistic, const Eigen::MatrixXd& measured,
                     const Eigen::MatrixXd& predicted, uint64_t iter_seed) {
    const Eigen::Index n = measured.rows();
    const Eigen::Index k = measured.cols();
    Eigen::VectorXd m(n * k), p(n * k);
    for (int attempt = 0; attempt < kRetryCap; ++attempt) {
        Rng rng(hash_combine(iter_seed, static_cast<uint64_t>(attempt)));
        for (Eigen::Index i = 0; i < n; ++i) {
            const Eigen::Index row = static_cast<Eigen::Index>(rng.uniform_int(n));
            m.segment(i * k, k) = measured.row(row).transpose();
            p.segment(i * k, k) = predicted.row(row).transpose();
        }
        try {
            return statistic(m, p);
        } catch (const Error&) {
            // degenerate resample, redraw
        }
    }
    throw Error("bootstrap: statistic undefined on " + std::to_string(kRetryCap) +
                " consecutive resamples");
}

}  // namespace

double sorted_quantile(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) throw Error("quantile: empty input");
    if (p <= 0.0) return sorted.front();
    if (p >= 1.0) return sorted.back();
    const double h = p * static_cast<double>(sorted.size() - 1);
    const size_t lo = static_cast<size_t>(std::floor(h));
    const size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = h - std::floor(h);
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

BootstrapInterval bootstrap_ci(const PairedStatistic& statistic,
                               const Eigen::MatrixXd& measured,
                               const Eigen::MatrixXd& predicted, int iterations, double level,
                               uint64_t seed, int jobs) {
    if (measured.rows() != predicted.rows() || measured.cols() != predicted.cols()) {
        throw Error("bootstrap: measured/predicted shape mismatch");
    }
    if (measured.rows() == 0) throw Error("bootstrap: no samples");
    if (iterations < 1) throw Error("bootstrap: iterations must be >= 1");
    if (!(level > 0.0 && level < 1.0)) throw Error("bootstrap: level outside (0,1)");

    std::vector<double> stats(iterations);
    if (jobs <= 1) {
        for (int it = 0; it < iterations; ++it) {
            stats[it] = one_iteration(statistic, measured, predicted,
                                      hash_combine(seed, static_cast<uint64_t>(it)));
        }
    } else {
        std::vector<std::thread> workers;
        std::atomic<int> next{0};
        std::vector<std::string> failures(jobs);
        for (int w = 0; w < jobs; ++w) {
            workers.emplace_back([&, w] {
                try {
                    for (int it = next.fetch_add(1); it < iterations; it = next.fetch_add(1)) {
                        stats[it] = one_iteration(statistic, measured, predicted,
                                                  hash_combine(seed, static_cast<uint64_t>(it)));
                    }
                } catch (const std::exception& e) {
                    failures[w] = e.what();
                }
            });
        }
        for (auto& t : workers) t.join();
        for (const auto& f : failures) {
            if (!f.empty()) throw Error("bootstrap: " + f);
        }
    }

    std::sort(stats.begin(), stats.end());
    const double alpha = (1.0 - level) / 2.0;
    return {sorted_quantile(stats, alpha), sorted_quantile(stats, 1.0 - alpha)};
}

}  // namespace octvf

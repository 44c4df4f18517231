#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "octvf/model.hpp"

namespace octvf {

struct GradCheckEntry {
    std::string name;
    double max_rel_err = 0.0;
};

struct GradCheckReport {
    std::vector<GradCheckEntry> entries;
    double worst = 0.0;
    double tolerance = 0.0;
    bool pass = false;

    std::string summary() const {
        std::string out;
        for (const auto& e : entries) {
            char buf[160];
            std::snprintf(buf, sizeof buf, "%-6s %-24s max_rel_err=%.3e\n",
                          e.max_rel_err < tolerance ? "ok" : "FAIL", e.name.c_str(),
                          e.max_rel_err);
            out += buf;
        }
        char buf[128];
        std::snprintf(buf, sizeof buf, "%s: worst %.3e, tolerance %.0e\n",
                      pass ? "PASS" : "FAIL", worst, tolerance);
        out += buf;
        return out;
    }
};

/// |a - n| / max(1, |a|, |n|): relative for large gradients, absolute near
/// zero, which keeps finite-difference rounding noise below tolerance.
inline double gradient_rel_err(double analytic, double numeric) {
    return std::abs(analytic - numeric) /
           std::max({1.0, std::abs(analytic), std::abs(numeric)});
}

/// Central-difference check of every parameter gradient on an f64 model.
/// Perturbation step is step_scale * max(1, |w|) per element.
inline GradCheckReport gradient_check(Model<double>& model, const Tensor<double>& batch,
                                      const Tensor<double>& target,
                                      double step_scale = 1e-6, double tolerance = 1e-5) {
    // Analytic gradients from one train-mode pass.
    ForwardCache<double> cache;
    Tensor<double> pred = forward(model, batch, Mode::Train, &cache);
    Gradients<double> grads = make_zero_gradients(model);
    backward(model, cache, mse_loss_grad(pred, target), grads);

    auto loss_now = [&]() {
        Tensor<double> p = forward(model, batch, Mode::Train);
        return mse_loss(p, target);
    };

    GradCheckReport report;
    report.tolerance = tolerance;
    auto params = model.parameters();
    for (size_t pi = 0; pi < params.size(); ++pi) {
        GradCheckEntry entry{params[pi].name, 0.0};
        Tensor<double>& w = *params[pi].tensor;
        for (Eigen::Index i = 0; i < w.size(); ++i) {
            const double saved = w.data[i];
            const double h = step_scale * std::max(1.0, std::abs(saved));
            w.data[i] = saved + h;
            const double lp = loss_now();
            w.data[i] = saved - h;
            const double lm = loss_now();
            w.data[i] = saved;
            const double numeric = (lp - lm) / (2.0 * h);
            entry.max_rel_err =
                std::max(entry.max_rel_err, gradient_rel_err(grads.tensors[pi].data[i], numeric));
        }
        report.worst = std::max(report.worst, entry.max_rel_err);
        report.entries.push_back(std::move(entry));
    }
    report.pass = report.worst < tolerance;
    return report;
}

}  // namespace octvf

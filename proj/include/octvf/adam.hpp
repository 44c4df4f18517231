#pragma once

#include "octvf/model.hpp"

namespace octvf {

/// Adam moments; defaults per the usual reference values (beta1 0.9,
/// beta2 0.999, eps 1e-8).
template <typename T>
struct AdamState {
    std::vector<Tensor<T>> m, v;
    int64_t t = 0;
    T beta1 = static_cast<T>(0.9);
    T beta2 = static_cast<T>(0.999);
    T eps = static_cast<T>(1e-8);

    static AdamState init(Model<T>& model) {
        AdamState s;
        for (const auto& p : model.parameters()) {
            s.m.push_back(Tensor<T>(p.tensor->n, p.tensor->c, p.tensor->h, p.tensor->w));
            s.v.push_back(Tensor<T>(p.tensor->n, p.tensor->c, p.tensor->h, p.tensor->w));
        }
        return s;
    }
};

/// One bias-corrected Adam update in place. Throws naming the parameter on a
/// non-finite gradient.
template <typename T>
void adam_step(std::vector<ParamRef<T>> params, const Gradients<T>& grads, AdamState<T>& state,
               T lr) {
    if (params.size() != grads.tensors.size() || params.size() != state.m.size()) {
        throw Error("adam_step: parameter/gradient/state arity mismatch");
    }
    state.t += 1;
    const T bc1 = T(1) - std::pow(state.beta1, static_cast<T>(state.t));
    const T bc2 = T(1) - std::pow(state.beta2, static_cast<T>(state.t));
    for (size_t i = 0; i < params.size(); ++i) {
        const auto& g = grads.tensors[i].data;
        if (!g.allFinite()) {
            throw Error("adam_step: non-finite gradient for " + params[i].name);
        }
        auto& m = state.m[i].data;
        auto& v = state.v[i].data;
        m = state.beta1 * m + (T(1) - state.beta1) * g;
        v = state.beta2 * v + (T(1) - state.beta2) * g.square();
        params[i].tensor->data -= lr * (m / bc1) / ((v / bc2).sqrt() + state.eps);
    }
}

}  // namespace octvf

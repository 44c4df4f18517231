#pragma once

#include <Eigen/Core>
#include <string>

#include "octvf/common.hpp"

namespace octvf {

/// Dense NCHW tensor templated on scalar. Training runs in float; the
/// gradient-check harness instantiates the same code in double.
template <typename T>
struct Tensor {
    using Array = Eigen::Array<T, Eigen::Dynamic, 1>;

    int n = 0, c = 0, h = 0, w = 0;
    Array data;

    Tensor() = default;
    Tensor(int n_, int c_, int h_, int w_)
        : n(n_), c(c_), h(h_), w(w_), data(Array::Zero(static_cast<Eigen::Index>(n_) * c_ * h_ * w_)) {
        if (n_ < 0 || c_ < 0 || h_ < 0 || w_ < 0) throw Error("tensor: negative dimension");
    }

    static Tensor zeros(int n, int c, int h, int w) { return Tensor(n, c, h, w); }

    Eigen::Index size() const { return data.size(); }

    T& operator()(int i, int j, int y, int x) {
        return data[((static_cast<Eigen::Index>(i) * c + j) * h + y) * w + x];
    }
    T operator()(int i, int j, int y, int x) const {
        return data[((static_cast<Eigen::Index>(i) * c + j) * h + y) * w + x];
    }

    /// Offset of channel plane (i, j).
    Eigen::Index plane(int i, int j) const {
        return (static_cast<Eigen::Index>(i) * c + j) * h * w;
    }

    bool same_shape(const Tensor& o) const {
        return n == o.n && c == o.c && h == o.h && w == o.w;
    }

    std::string shape_str() const {
        return "(" + std::to_string(n) + "," + std::to_string(c) + "," + std::to_string(h) +
               "," + std::to_string(w) + ")";
    }

    bool all_finite() const { return data.allFinite(); }

    template <typename U>
    Tensor<U> cast() const {
        Tensor<U> out;
        out.n = n;
        out.c = c;
        out.h = h;
        out.w = w;
        out.data = data.template cast<U>();
        return out;
    }
};

}  // namespace octvf

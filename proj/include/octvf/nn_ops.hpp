#pragma once

#include <limits>
#include <vector>

#include "octvf/tensor.hpp"

namespace octvf {

enum class Padding { Same, Valid };

/// Output extent of a strided window op. Same padding pads symmetrically
/// with the extra cell at the bottom/right; windows clamp at the borders.
inline int conv_out_dim(int in, int k, int stride, Padding pad) {
    if (in < 1) throw Error("conv: non-positive spatial input");
    if (pad == Padding::Same) return (in + stride - 1) / stride;
    if (in < k) throw Error("conv: input smaller than kernel under valid padding");
    return (in - k) / stride + 1;
}

inline int pad_begin(int in, int out, int k, int stride, Padding pad) {
    if (pad == Padding::Valid) return 0;
    const int total = std::max((out - 1) * stride + k - in, 0);
    return total / 2;
}

namespace detail {

template <typename T>
using MatrixT = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <typename T>
using RowMajorMap =
    Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
template <typename T>
using RowMajorMutMap =
    Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

/// Gathers conv patches of sample `i` into a (Cin*K*K, OH*OW) matrix.
template <typename T>
void im2col(const Tensor<T>& x, int i, int kh, int kw, int stride, int pad_y, int pad_x,
            int oh, int ow, MatrixT<T>& col) {
    col.setZero(static_cast<Eigen::Index>(x.c) * kh * kw, static_cast<Eigen::Index>(oh) * ow);
    for (int j = 0; j < x.c; ++j) {
        const T* plane = x.data.data() + x.plane(i, j);
        for (int ky = 0; ky < kh; ++ky) {
            for (int kx = 0; kx < kw; ++kx) {
                const Eigen::Index row = (static_cast<Eigen::Index>(j) * kh + ky) * kw + kx;
                for (int oy = 0; oy < oh; ++oy) {
                    const int y = oy * stride - pad_y + ky;
                    if (y < 0 || y >= x.h) continue;
                    for (int ox = 0; ox < ow; ++ox) {
                        const int xx = ox * stride - pad_x + kx;
                        if (xx < 0 || xx >= x.w) continue;
                        col(row, static_cast<Eigen::Index>(oy) * ow + ox) =
                            plane[static_cast<Eigen::Index>(y) * x.w + xx];
                    }
                }
            }
        }
    }
}

/// Scatter-adds a column matrix back into the gradient image of sample `i`.
template <typename T>
void col2im_add(const MatrixT<T>& col, Tensor<T>& dx, int i, int kh, int kw, int stride,
                int pad_y, int pad_x, int oh, int ow) {
    for (int j = 0; j < dx.c; ++j) {
        T* plane = dx.data.data() + dx.plane(i, j);
        for (int ky = 0; ky < kh; ++ky) {
            for (int kx = 0; kx < kw; ++kx) {
                const Eigen::Index row = (static_cast<Eigen::Index>(j) * kh + ky) * kw + kx;
                for (int oy = 0; oy < oh; ++oy) {
                    const int y = oy * stride - pad_y + ky;
                    if (y < 0 || y >= dx.h) continue;
                    for (int ox = 0; ox < ow; ++ox) {
                        const int xx = ox * stride - pad_x + kx;
                        if (xx < 0 || xx >= dx.w) continue;
                        plane[static_cast<Eigen::Index>(y) * dx.w + xx] +=
                            col(row, static_cast<Eigen::Index>(oy) * ow + ox);
                    }
                }
            }
        }
    }
}

}  // namespace detail

/// Cross-correlation with kernel (Cout, Cin, KH, KW); optional bias (Cout).
template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& kernel, const Tensor<T>* bias,
                 int stride, Padding pad) {
    if (kernel.c != x.c) {
        throw Error("conv2d: kernel expects " + std::to_string(kernel.c) + " channels, input has " +
                    std::to_string(x.c));
    }
    if (bias && bias->size() != kernel.n) throw Error("conv2d: bias size mismatch");
    const int oh = conv_out_dim(x.h, kernel.h, stride, pad);
    const int ow = conv_out_dim(x.w, kernel.w, stride, pad);
    const int py = pad_begin(x.h, oh, kernel.h, stride, pad);
    const int px = pad_begin(x.w, ow, kernel.w, stride, pad);

    Tensor<T> y(x.n, kernel.n, oh, ow);
    detail::RowMajorMap<T> w_mat(kernel.data.data(), kernel.n,
                                 static_cast<Eigen::Index>(kernel.c) * kernel.h * kernel.w);
    const bool pointwise = kernel.h == 1 && kernel.w == 1 && stride == 1;
    detail::MatrixT<T> col;
    for (int i = 0; i < x.n; ++i) {
        detail::RowMajorMutMap<T> out(y.data.data() + y.plane(i, 0), kernel.n,
                                      static_cast<Eigen::Index>(oh) * ow);
        if (pointwise) {
            // 1x1 stride-1: the NCHW plane block is already the column matrix.
            detail::RowMajorMap<T> in(x.data.data() + x.plane(i, 0), x.c,
                                      static_cast<Eigen::Index>(x.h) * x.w);
            out.noalias() = w_mat * in;
        } else {
            detail::im2col(x, i, kernel.h, kernel.w, stride, py, px, oh, ow, col);
            out.noalias() = w_mat * col;
        }
        if (bias) out.colwise() += bias->data.matrix();
    }
    return y;
}

template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& kernel, int stride, Padding pad) {
    return conv2d(x, kernel, static_cast<const Tensor<T>*>(nullptr), stride, pad);
}

/// Gradients of conv2d. Returns dx; accumulates into dkernel/dbias, which
/// must be pre-sized to the parameter shapes.
template <typename T>
Tensor<T> conv2d_backward(const Tensor<T>& x, const Tensor<T>& kernel, const Tensor<T>& dy,
                          int stride, Padding pad, Tensor<T>& dkernel, Tensor<T>* dbias) {
    const int oh = dy.h, ow = dy.w;
    const int py = pad_begin(x.h, oh, kernel.h, stride, pad);
    const int px = pad_begin(x.w, ow, kernel.w, stride, pad);

    Tensor<T> dx(x.n, x.c, x.h, x.w);
    detail::RowMajorMap<T> w_mat(kernel.data.data(), kernel.n,
                                 static_cast<Eigen::Index>(kernel.c) * kernel.h * kernel.w);
    detail::RowMajorMutMap<T> dw_mat(dkernel.data.data(), kernel.n,
                                     static_cast<Eigen::Index>(kernel.c) * kernel.h * kernel.w);
    const bool pointwise = kernel.h == 1 && kernel.w == 1 && stride == 1;
    detail::MatrixT<T> col, dcol;
    for (int i = 0; i < x.n; ++i) {
        detail::RowMajorMap<T> dout(dy.data.data() + dy.plane(i, 0), kernel.n,
                                    static_cast<Eigen::Index>(oh) * ow);
        if (dbias) dbias->data.matrix() += dout.rowwise().sum();
        if (pointwise) {
            detail::RowMajorMap<T> in(x.data.data() + x.plane(i, 0), x.c,
                                      static_cast<Eigen::Index>(x.h) * x.w);
            dw_mat.noalias() += dout * in.transpose();
            detail::RowMajorMutMap<T> din(dx.data.data() + dx.plane(i, 0), x.c,
                                          static_cast<Eigen::Index>(x.h) * x.w);
            din.noalias() = w_mat.transpose() * dout;
        } else {
            detail::im2col(x, i, kernel.h, kernel.w, stride, py, px, oh, ow, col);
            dw_mat.noalias() += dout * col.transpose();
            dcol.noalias() = w_mat.transpose() * dout;
            detail::col2im_add(dcol, dx, i, kernel.h, kernel.w, stride, py, px, oh, ow);
        }
    }
    return dx;
}

template <typename T>
Tensor<T> conv2d_backward(const Tensor<T>& x, const Tensor<T>& kernel, const Tensor<T>& dy,
                          int stride, Padding pad, Tensor<T>& dkernel) {
    return conv2d_backward(x, kernel, dy, stride, pad, dkernel,
                           static_cast<Tensor<T>*>(nullptr));
}

/// Per-channel spatial convolution; kernels shaped (C, 1, KH, KW).
template <typename T>
Tensor<T> depthwise_conv(const Tensor<T>& x, const Tensor<T>& kernels, int stride, Padding pad) {
    if (kernels.n != x.c || kernels.c != 1) {
        throw Error("depthwise_conv: need one kernel per input channel, got " +
                    kernels.shape_str() + " for input " + x.shape_str());
    }
    const int oh = conv_out_dim(x.h, kernels.h, stride, pad);
    const int ow = conv_out_dim(x.w, kernels.w, stride, pad);
    const int py = pad_begin(x.h, oh, kernels.h, stride, pad);
    const int px = pad_begin(x.w, ow, kernels.w, stride, pad);

    Tensor<T> y(x.n, x.c, oh, ow);
    if (stride == 1) {
        // Row-segment formulation: each kernel tap is one shifted AXPY per
        // output row, which vectorizes well.
        for (int i = 0; i < x.n; ++i) {
            for (int j = 0; j < x.c; ++j) {
                const T* in = x.data.data() + x.plane(i, j);
                const T* k = kernels.data.data() + kernels.plane(j, 0);
                T* out = y.data.data() + y.plane(i, j);
                for (int ky = 0; ky < kernels.h; ++ky) {
                    for (int kx = 0; kx < kernels.w; ++kx) {
                        const T kv = k[static_cast<Eigen::Index>(ky) * kernels.w + kx];
                        const int lo = std::max(0, px - kx);
                        const int hi = std::min(ow, x.w + px - kx);
                        if (hi <= lo) continue;
                        for (int oy = 0; oy < oh; ++oy) {
                            const int yy = oy - py + ky;
                            if (yy < 0 || yy >= x.h) continue;
                            Eigen::Map<Eigen::Array<T, Eigen::Dynamic, 1>> orow(
                                out + static_cast<Eigen::Index>(oy) * ow + lo, hi - lo);
                            Eigen::Map<const Eigen::Array<T, Eigen::Dynamic, 1>> irow(
                                in + static_cast<Eigen::Index>(yy) * x.w + lo - px + kx,
                                hi - lo);
                            orow += kv * irow;
                        }
                    }
                }
            }
        }
        return y;
    }
    for (int i = 0; i < x.n; ++i) {
        for (int j = 0; j < x.c; ++j) {
            const T* in = x.data.data() + x.plane(i, j);
            const T* k = kernels.data.data() + kernels.plane(j, 0);
            T* out = y.data.data() + y.plane(i, j);
            for (int oy = 0; oy < oh; ++oy) {
                for (int ox = 0; ox < ow; ++ox) {
                    T acc = 0;
                    for (int ky = 0; ky < kernels.h; ++ky) {
                        const int yy = oy * stride - py + ky;
                        if (yy < 0 || yy >= x.h) continue;
                        for (int kx = 0; kx < kernels.w; ++kx) {
                            const int xx = ox * stride - px + kx;
                            if (xx < 0 || xx >= x.w) continue;
                            acc += k[static_cast<Eigen::Index>(ky) * kernels.w + kx] *
                                   in[static_cast<Eigen::Index>(yy) * x.w + xx];
                        }
                    }
                    out[static_cast<Eigen::Index>(oy) * ow + ox] = acc;
                }
            }
        }
    }
    return y;
}

template <typename T>
Tensor<T> depthwise_conv_backward(const Tensor<T>& x, const Tensor<T>& kernels,
                                  const Tensor<T>& dy, int stride, Padding pad,
                                  Tensor<T>& dkernels) {
    const int oh = dy.h, ow = dy.w;
    const int py = pad_begin(x.h, oh, kernels.h, stride, pad);
    const int px = pad_begin(x.w, ow, kernels.w, stride, pad);

    Tensor<T> dx(x.n, x.c, x.h, x.w);
    if (stride == 1) {
        for (int i = 0; i < x.n; ++i) {
            for (int j = 0; j < x.c; ++j) {
                const T* in = x.data.data() + x.plane(i, j);
                const T* k = kernels.data.data() + kernels.plane(j, 0);
                T* dk = dkernels.data.data() + kernels.plane(j, 0);
                T* din = dx.data.data() + dx.plane(i, j);
                const T* dout = dy.data.data() + dy.plane(i, j);
                for (int ky = 0; ky < kernels.h; ++ky) {
                    for (int kx = 0; kx < kernels.w; ++kx) {
                        const T kv = k[static_cast<Eigen::Index>(ky) * kernels.w + kx];
                        T acc = 0;
                        const int lo = std::max(0, px - kx);
                        const int hi = std::min(ow, x.w + px - kx);
                        if (hi <= lo) continue;
                        for (int oy = 0; oy < oh; ++oy) {
                            const int yy = oy - py + ky;
                            if (yy < 0 || yy >= x.h) continue;
                            Eigen::Map<const Eigen::Array<T, Eigen::Dynamic, 1>> grow(
                                dout + static_cast<Eigen::Index>(oy) * ow + lo, hi - lo);
                            Eigen::Map<const Eigen::Array<T, Eigen::Dynamic, 1>> irow(
                                in + static_cast<Eigen::Index>(yy) * x.w + lo - px + kx,
                                hi - lo);
                            Eigen::Map<Eigen::Array<T, Eigen::Dynamic, 1>> drow(
                                din + static_cast<Eigen::Index>(yy) * x.w + lo - px + kx,
                                hi - lo);
                            acc += (grow * irow).sum();
                            drow += kv * grow;
                        }
                        dk[static_cast<Eigen::Index>(ky) * kernels.w + kx] += acc;
                    }
                }
            }
        }
        return dx;
    }
    for (int i = 0; i < x.n; ++i) {
        for (int j = 0; j < x.c; ++j) {
            const T* in = x.data.data() + x.plane(i, j);
            const T* k = kernels.data.data() + kernels.plane(j, 0);
            T* dk = dkernels.data.data() + kernels.plane(j, 0);
            T* din = dx.data.data() + dx.plane(i, j);
            const T* dout = dy.data.data() + dy.plane(i, j);
            for (int oy = 0; oy < oh; ++oy) {
                for (int ox = 0; ox < ow; ++ox) {
                    const T g = dout[static_cast<Eigen::Index>(oy) * ow + ox];
                    for (int ky = 0; ky < kernels.h; ++ky) {
                        const int yy = oy * stride - py + ky;
                        if (yy < 0 || yy >= x.h) continue;
                        for (int kx = 0; kx < kernels.w; ++kx) {
                            const int xx = ox * stride - px + kx;
                            if (xx < 0 || xx >= x.w) continue;
                            dk[static_cast<Eigen::Index>(ky) * kernels.w + kx] +=
                                g * in[static_cast<Eigen::Index>(yy) * x.w + xx];
                            din[static_cast<Eigen::Index>(yy) * x.w + xx] +=
                                g * k[static_cast<Eigen::Index>(ky) * kernels.w + kx];
                        }
                    }
                }
            }
        }
    }
    return dx;
}

/// Depthwise spatial conv followed by a 1x1 cross-channel conv, both stride 1
/// same padding: the Xception building block.
template <typename T>
Tensor<T> depthwise_separable_conv(const Tensor<T>& x, const Tensor<T>& depthwise_kernels,
                                   const Tensor<T>& pointwise_kernel) {
    return conv2d(depthwise_conv(x, depthwise_kernels, 1, Padding::Same), pointwise_kernel, 1,
                  Padding::Same);
}

struct BatchNormCache {
    Eigen::Index count = 0;  // elements per channel
};

template <typename T>
struct BatchNormCacheT : BatchNormCache {
    Tensor<T> x_hat;
    Eigen::Array<T, Eigen::Dynamic, 1> inv_std;
};

template <typename T>
struct BatchNormParams {
    Tensor<T> gamma, beta;              // (C,1,1,1)
    Tensor<T> running_mean, running_var;  // (C,1,1,1)
    T momentum = static_cast<T>(0.9);
    T eps = static_cast<T>(1e-5);

    explicit BatchNormParams(int channels = 0) {
        gamma = Tensor<T>(channels, 1, 1, 1);
        gamma.data.setOnes();
        beta = Tensor<T>(channels, 1, 1, 1);
        running_mean = Tensor<T>(channels, 1, 1, 1);
        running_var = Tensor<T>(channels, 1, 1, 1);
        running_var.data.setOnes();
    }
};

/// Train-mode batch norm: normalizes by batch statistics (biased variance)
/// and folds them into the running estimates.
template <typename T>
Tensor<T> batch_norm_train(const Tensor<T>& x, BatchNormParams<T>& bn,
                           BatchNormCacheT<T>& cache) {
    if (x.n == 0) throw Error("batch_norm: zero batch in train mode");
    if (bn.gamma.n != x.c) throw Error("batch_norm: channel mismatch");
    const Eigen::Index count = static_cast<Eigen::Index>(x.n) * x.h * x.w;

    Tensor<T> y(x.n, x.c, x.h, x.w);
    cache.x_hat = Tensor<T>(x.n, x.c, x.h, x.w);
    cache.inv_std.resize(x.c);
    cache.count = count;

    for (int j = 0; j < x.c; ++j) {
        T mean = 0, var = 0;
        for (int i = 0; i < x.n; ++i) {
            mean += x.data.segment(x.plane(i, j), static_cast<Eigen::Index>(x.h) * x.w).sum();
        }
        mean /= static_cast<T>(count);
        for (int i = 0; i < x.n; ++i) {
            var += (x.data.segment(x.plane(i, j), static_cast<Eigen::Index>(x.h) * x.w) - mean)
                       .square()
                       .sum();
        }
        var /= static_cast<T>(count);

        const T inv_std = T(1) / std::sqrt(var + bn.eps);
        cache.inv_std[j] = inv_std;
        for (int i = 0; i < x.n; ++i) {
            auto xs = x.data.segment(x.plane(i, j), static_cast<Eigen::Index>(x.h) * x.w);
            auto hs = cache.x_hat.data.segment(cache.x_hat.plane(i, j),
                                               static_cast<Eigen::Index>(x.h) * x.w);
            hs = (xs - mean) * inv_std;
            y.data.segment(y.plane(i, j), static_cast<Eigen::Index>(x.h) * x.w) =
                hs * bn.gamma.data[j] + bn.beta.data[j];
        }
        bn.running_mean.data[j] = bn.momentum * bn.running_mean.data[j] + (T(1) - bn.momentum) * mean;
        bn.running_var.data[j] = bn.momentum * bn.running_var.data[j] + (T(1) - bn.momentum) * var;
    }
    return y;
}

template <typename T>
Tensor<T> batch_norm_infer(const Tensor<T>& x, const BatchNormParams<T>& bn) {
    if (bn.gamma.n != x.c) throw Error("batch_norm: channel mismatch");
    Tensor<T> y(x.n, x.c, x.h, x.w);
    for (int j = 0; j < x.c; ++j) {
        const T scale = bn.gamma.data[j] / std::sqrt(bn.running_var.data[j] + bn.eps);
        const T shift = bn.beta.data[j] - bn.running_mean.data[j] * scale;
        for (int i = 0; i < x.n; ++i) {
            y.data.segment(y.plane(i, j), static_cast<Eigen::Index>(x.h) * x.w) =
                x.data.segment(x.plane(i, j), static_cast<Eigen::Index>(x.h) * x.w) * scale +
                shift;
        }
    }
    return y;
}

template <typename T>
Tensor<T> batch_norm_backward(const Tensor<T>& dy, const BatchNormParams<T>& bn,
                              const BatchNormCacheT<T>& cache, Tensor<T>& dgamma,
                              Tensor<T>& dbeta) {
    const int C = dy.c;
    const Eigen::Index m = cache.count;
    Tensor<T> dx(dy.n, dy.c, dy.h, dy.w);
    for (int j = 0; j < C; ++j) {
        T sum_dy = 0, sum_dy_xhat = 0;
        for (int i = 0; i < dy.n; ++i) {
            auto dys = dy.data.segment(dy.plane(i, j), static_cast<Eigen::Index>(dy.h) * dy.w);
            auto hs = cache.x_hat.data.segment(cache.x_hat.plane(i, j),
                                               static_cast<Eigen::Index>(dy.h) * dy.w);
            sum_dy += dys.sum();
            sum_dy_xhat += (dys * hs).sum();
        }
        dgamma.data[j] += sum_dy_xhat;
        dbeta.data[j] += sum_dy;

        const T scale = bn.gamma.data[j] * cache.inv_std[j];
        const T mean_dy = sum_dy / static_cast<T>(m);
        const T mean_dy_xhat = sum_dy_xhat / static_cast<T>(m);
        for (int i = 0; i < dy.n; ++i) {
            auto dys = dy.data.segment(dy.plane(i, j), static_cast<Eigen::Index>(dy.h) * dy.w);
            auto hs = cache.x_hat.data.segment(cache.x_hat.plane(i, j),
                                               static_cast<Eigen::Index>(dy.h) * dy.w);
            dx.data.segment(dx.plane(i, j), static_cast<Eigen::Index>(dy.h) * dy.w) =
                scale * (dys - mean_dy - hs * mean_dy_xhat);
        }
    }
    return dx;
}

struct MaxPoolCache {
    std::vector<Eigen::Index> argmax;  // flat input index per output element
    int in_h = 0, in_w = 0;
};

/// 3x3 stride-2 same-padded max pooling; padded cells never win, ties go to
/// the first window element in row-major order.
template <typename T>
Tensor<T> max_pool(const Tensor<T>& x, MaxPoolCache& cache, int k = 3, int stride = 2,
                   Padding pad = Padding::Same) {
    const int oh = conv_out_dim(x.h, k, stride, pad);
    const int ow = conv_out_dim(x.w, k, stride, pad);
    const int py = pad_begin(x.h, oh, k, stride, pad);
    const int px = pad_begin(x.w, ow, k, stride, pad);

    Tensor<T> y(x.n, x.c, oh, ow);
    cache.argmax.assign(y.size(), -1);
    cache.in_h = x.h;
    cache.in_w = x.w;
    Eigen::Index out_i = 0;
    for (int i = 0; i < x.n; ++i) {
        for (int j = 0; j < x.c; ++j) {
            const T* in = x.data.data() + x.plane(i, j);
            for (int oy = 0; oy < oh; ++oy) {
                for (int ox = 0; ox < ow; ++ox, ++out_i) {
                    T best = -std::numeric_limits<T>::infinity();
                    Eigen::Index best_idx = -1;
                    for (int ky = 0; ky < k; ++ky) {
                        const int yy = oy * stride - py + ky;
                        if (yy < 0 || yy >= x.h) continue;
                        for (int kx = 0; kx < k; ++kx) {
                            const int xx = ox * stride - px + kx;
                            if (xx < 0 || xx >= x.w) continue;
                            const T v = in[static_cast<Eigen::Index>(yy) * x.w + xx];
                            if (v > best) {
                                best = v;
                                best_idx = static_cast<Eigen::Index>(yy) * x.w + xx;
                            }
                        }
                    }
                    y.data[out_i] = best;
                    cache.argmax[out_i] = x.plane(i, j) + best_idx;
                }
            }
        }
    }
    return y;
}

template <typename T>
Tensor<T> max_pool_backward(const Tensor<T>& dy, const Tensor<T>& x_like,
                            const MaxPoolCache& cache) {
    Tensor<T> dx(x_like.n, x_like.c, x_like.h, x_like.w);
    for (Eigen::Index i = 0; i < dy.size(); ++i) {
        dx.data[cache.argmax[i]] += dy.data[i];
    }
    return dx;
}

/// Per-channel spatial mean, (N,C,H,W) -> (N,C,1,1).
template <typename T>
Tensor<T> global_avg_pool(const Tensor<T>& x) {
    Tensor<T> y(x.n, x.c, 1, 1);
    const Eigen::Index hw = static_cast<Eigen::Index>(x.h) * x.w;
    for (int i = 0; i < x.n; ++i) {
        for (int j = 0; j < x.c; ++j) {
            y(i, j, 0, 0) = x.data.segment(x.plane(i, j), hw).sum() / static_cast<T>(hw);
        }
    }
    return y;
}

template <typename T>
Tensor<T> global_avg_pool_backward(const Tensor<T>& dy, int h, int w) {
    Tensor<T> dx(dy.n, dy.c, h, w);
    const T inv = T(1) / static_cast<T>(static_cast<Eigen::Index>(h) * w);
    for (int i = 0; i < dy.n; ++i) {
        for (int j = 0; j < dy.c; ++j) {
            dx.data.segment(dx.plane(i, j), static_cast<Eigen::Index>(h) * w)
                .setConstant(dy(i, j, 0, 0) * inv);
        }
    }
    return dx;
}

template <typename T>
Tensor<T> relu(const Tensor<T>& x) {
    Tensor<T> y = x;
    y.data = y.data.cwiseMax(T(0));
    return y;
}

/// Subgradient 0 at exactly 0.
template <typename T>
Tensor<T> relu_backward(const Tensor<T>& dy, const Tensor<T>& x) {
    Tensor<T> dx = dy;
    dx.data *= (x.data > T(0)).template cast<T>();
    return dx;
}

/// Mean over all batch x output elements of the squared error.
template <typename T>
T mse_loss(const Tensor<T>& pred, const Tensor<T>& target) {
    if (!pred.same_shape(target)) {
        throw Error("mse_loss: shape mismatch " + pred.shape_str() + " vs " +
                    target.shape_str());
    }
    if (pred.size() == 0) throw Error("mse_loss: empty input");
    return (pred.data - target.data).square().sum() / static_cast<T>(pred.size());
}

template <typename T>
Tensor<T> mse_loss_grad(const Tensor<T>& pred, const Tensor<T>& target) {
    if (!pred.same_shape(target)) throw Error("mse_loss_grad: shape mismatch");
    Tensor<T> g = pred;
    g.data = T(2) * (pred.data - target.data) / static_cast<T>(pred.size());
    return g;
}

}  // namespace octvf

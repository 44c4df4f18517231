#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "octvf/nn_ops.hpp"
#include "octvf/rng.hpp"

namespace octvf {

struct BlockSpec {
    int channels = 8;
    bool pool = true;
    bool residual = true;
};

/// Mini-Xception regression head: strided stem conv, separable-conv blocks
/// with residual projections, global average pooling, then a 1x1 conv with
/// linear activation producing 1 (MD) or 52 (thresholds) outputs.
struct ModelSpec {
    int in_channels = 1;
    int input_h = 128;
    int input_w = 192;
    int stem_channels = 8;
    std::vector<BlockSpec> blocks = {{8, true, true}, {16, true, true}, {32, true, true}};
    int out_channels = 52;

    void validate() const {
        if (in_channels < 1) throw Error("model spec: in_channels < 1");
        if (input_h < 1 || input_w < 1) throw Error("model spec: non-positive input dims");
        if (stem_channels < 1) throw Error("model spec: stem_channels < 1");
        if (blocks.empty()) throw Error("model spec: no blocks");
        for (const auto& b : blocks) {
            if (b.channels < 1) throw Error("model spec: block channels < 1");
        }
        if (out_channels != 1 && out_channels != 52) {
            throw Error("model spec: out_channels must be 1 (MD) or 52 (thresholds)");
        }
    }

    std::string to_json() const;
    static ModelSpec from_json(const std::string& json_text);
};

template <typename T>
struct SeparableBlock {
    int in_channels = 0, out_channels = 0;
    bool input_relu = true;
    bool pool = true;
    bool residual = true;
    bool has_proj = false;

    Tensor<T> dw1, pw1;  // depthwise (Cin,1,3,3), pointwise (Cout,Cin,1,1)
    BatchNormParams<T> bn1;
    Tensor<T> dw2, pw2;  // (Cout,1,3,3), (Cout,Cout,1,1)
    BatchNormParams<T> bn2;
    Tensor<T> proj_w;  // (Cout,Cin,1,1), stride 2 when pooling
    BatchNormParams<T> proj_bn;

    int proj_stride() const { return pool ? 2 : 1; }
};

template <typename T>
struct ParamRef {
    std::string name;
    Tensor<T>* tensor;
};

template <typename T>
struct Model {
    ModelSpec spec;
    Tensor<T> stem_w;  // (C0, in, 3, 3), stride 2, no bias (BN follows)
    BatchNormParams<T> stem_bn;
    std::vector<SeparableBlock<T>> blocks;
    Tensor<T> head_w, head_b;  // (out, Clast, 1, 1) with bias

    /// Trainable tensors in declaration order.
    std::vector<ParamRef<T>> parameters();
    /// Trainable tensors plus batch-norm running statistics; the checkpoint
    /// blob serializes exactly this sequence.
    std::vector<ParamRef<T>> state_tensors();
};

enum class Mode { Train, Infer };

template <typename T>
struct BlockCache {
    Tensor<T> block_in, sep1_in, dw1_out, pw1_out, bn1_out, sep2_in, dw2_out, pw2_out;
    BatchNormCacheT<T> bn1_cache, bn2_cache;
    Tensor<T> main_pre_pool;
    MaxPoolCache pool_cache;
    BatchNormCacheT<T> proj_bn_cache;
    Tensor<T> proj_out;
};

template <typename T>
struct ForwardCache {
    Tensor<T> input, stem_out, stem_bn_out;
    BatchNormCacheT<T> stem_bn_cache;
    std::vector<BlockCache<T>> blocks;
    Tensor<T> features, gap_out;
};

/// Gradient tensors mirroring Model::parameters() order.
template <typename T>
struct Gradients {
    std::vector<Tensor<T>> tensors;
};

template <typename T>
Model<T> make_model(const ModelSpec& spec, uint64_t seed);

template <typename T>
Gradients<T> make_zero_gradients(Model<T>& model);

/// Runs the network. Train mode uses batch statistics and must be followed
/// by backward() on the same cache; infer mode is deterministic given the
/// running statistics. Throws naming the layer if activations go non-finite.
template <typename T>
Tensor<T> forward(Model<T>& model, const Tensor<T>& batch, Mode mode,
                  ForwardCache<T>* cache = nullptr);

/// Backpropagates d(loss)/d(predictions) through the cached forward pass,
/// accumulating parameter gradients. Returns d(loss)/d(input).
template <typename T>
Tensor<T> backward(Model<T>& model, const ForwardCache<T>& cache, const Tensor<T>& dpred,
                   Gradients<T>& grads);

/// Predictions (N, out, 1, 1) as an (N x out) matrix.
template <typename T>
Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic> prediction_matrix(const Tensor<T>& pred);

struct CheckpointMeta {
    int epoch = 0;
    uint64_t seed = 0;
    int64_t adam_step = 0;
    double lr = 0.0;
    double val_r2 = 0.0;
    std::string target;    // "md" | "thresholds"
    std::string modality;  // "ring3.5" | ... | "slo"
};

/// Checkpoint file: u32 JSON header length, JSON header (model spec, epoch,
/// optimizer metadata, RNG seed), u64 float count, f32 state blob in
/// state_tensors() order. Round-trips bit-exactly.
std::string write_checkpoint(Model<float>& model, const CheckpointMeta& meta);
void write_checkpoint_file(const std::string& path, Model<float>& model,
                           const CheckpointMeta& meta);

struct Checkpoint {
    Model<float> model;
    CheckpointMeta meta;
};
Checkpoint read_checkpoint(const std::string& bytes);
Checkpoint read_checkpoint_file(const std::string& path);

// --- implementation ---

template <typename T>
std::vector<ParamRef<T>> Model<T>::parameters() {
    std::vector<ParamRef<T>> out;
    auto bn = [&out](const std::string& prefix, BatchNormParams<T>& p) {
        out.push_back({prefix + ".gamma", &p.gamma});
        out.push_back({prefix + ".beta", &p.beta});
    };
    out.push_back({"stem.conv.w", &stem_w});
    bn("stem.bn", stem_bn);
    for (size_t b = 0; b < blocks.size(); ++b) {
        const std::string p = "block" + std::to_string(b + 1);
        auto& blk = blocks[b];
        out.push_back({p + ".sep1.dw", &blk.dw1});
        out.push_back({p + ".sep1.pw", &blk.pw1});
        bn(p + ".bn1", blk.bn1);
        out.push_back({p + ".sep2.dw", &blk.dw2});
        out.push_back({p + ".sep2.pw", &blk.pw2});
        bn(p + ".bn2", blk.bn2);
        if (blk.has_proj) {
            out.push_back({p + ".proj.w", &blk.proj_w});
            bn(p + ".proj.bn", blk.proj_bn);
        }
    }
    out.push_back({"head.conv.w", &head_w});
    out.push_back({"head.conv.b", &head_b});
    return out;
}

template <typename T>
std::vector<ParamRef<T>> Model<T>::state_tensors() {
    std::vector<ParamRef<T>> out;
    auto bn = [&out](const std::string& prefix, BatchNormParams<T>& p) {
        out.push_back({prefix + ".gamma", &p.gamma});
        out.push_back({prefix + ".beta", &p.beta});
        out.push_back({prefix + ".running_mean", &p.running_mean});
        out.push_back({prefix + ".running_var", &p.running_var});
    };
    out.push_back({"stem.conv.w", &stem_w});
    bn("stem.bn", stem_bn);
    for (size_t b = 0; b < blocks.size(); ++b) {
        const std::string p = "block" + std::to_string(b + 1);
        auto& blk = blocks[b];
        out.push_back({p + ".sep1.dw", &blk.dw1});
        out.push_back({p + ".sep1.pw", &blk.pw1});
        bn(p + ".bn1", blk.bn1);
        out.push_back({p + ".sep2.dw", &blk.dw2});
        out.push_back({p + ".sep2.pw", &blk.pw2});
        bn(p + ".bn2", blk.bn2);
        if (blk.has_proj) {
            out.push_back({p + ".proj.w", &blk.proj_w});
            bn(p + ".proj.bn", blk.proj_bn);
        }
    }
    out.push_back({"head.conv.w", &head_w});
    out.push_back({"head.conv.b", &head_b});
    return out;
}

template <typename T>
Model<T> make_model(const ModelSpec& spec, uint64_t seed) {
    spec.validate();
    Rng rng(seed);
    auto he_init = [&rng](Tensor<T>& w, int fan_in) {
        const double std_dev = std::sqrt(2.0 / fan_in);
        for (Eigen::Index i = 0; i < w.size(); ++i) {
            w.data[i] = static_cast<T>(rng.normal(0.0, std_dev));
        }
    };

    Model<T> m;
    m.spec = spec;
    m.stem_w = Tensor<T>(spec.stem_channels, spec.in_channels, 3, 3);
    he_init(m.stem_w, spec.in_channels * 9);
    m.stem_bn = BatchNormParams<T>(spec.stem_channels);

    int prev = spec.stem_channels;
    for (const BlockSpec& bs : spec.blocks) {
        SeparableBlock<T> blk;
        blk.in_channels = prev;
        blk.out_channels = bs.channels;
        blk.input_relu = !m.blocks.empty();
        blk.pool = bs.pool;
        blk.residual = bs.residual;
        blk.has_proj = bs.residual && (bs.pool || prev != bs.channels);

        blk.dw1 = Tensor<T>(prev, 1, 3, 3);
        he_init(blk.dw1, 9);
        blk.pw1 = Tensor<T>(bs.channels, prev, 1, 1);
        he_init(blk.pw1, prev);
        blk.bn1 = BatchNormParams<T>(bs.channels);
        blk.dw2 = Tensor<T>(bs.channels, 1, 3, 3);
        he_init(blk.dw2, 9);
        blk.pw2 = Tensor<T>(bs.channels, bs.channels, 1, 1);
        he_init(blk.pw2, bs.channels);
        blk.bn2 = BatchNormParams<T>(bs.channels);
        if (blk.has_proj) {
            blk.proj_w = Tensor<T>(bs.channels, prev, 1, 1);
            he_init(blk.proj_w, prev);
            blk.proj_bn = BatchNormParams<T>(bs.channels);
        }
        m.blocks.push_back(std::move(blk));
        prev = bs.channels;
    }

    m.head_w = Tensor<T>(spec.out_channels, prev, 1, 1);
    he_init(m.head_w, prev);
    m.head_b = Tensor<T>(spec.out_channels, 1, 1, 1);
    return m;
}

template <typename T>
Gradients<T> make_zero_gradients(Model<T>& model) {
    Gradients<T> g;
    for (const auto& p : model.parameters()) {
        g.tensors.push_back(Tensor<T>(p.tensor->n, p.tensor->c, p.tensor->h, p.tensor->w));
    }
    return g;
}

namespace detail {

template <typename T>
void check_finite(const Tensor<T>& t, const std::string& layer) {
    if (!t.all_finite()) throw Error("non-finite activations after " + layer);
}

}  // namespace detail

template <typename T>
Tensor<T> forward(Model<T>& model, const Tensor<T>& batch, Mode mode, ForwardCache<T>* cache) {
    if (batch.c != model.spec.in_channels) {
        throw Error("forward: batch has " + std::to_string(batch.c) + " channels, model expects " +
                    std::to_string(model.spec.in_channels));
    }
    ForwardCache<T> local;
    ForwardCache<T>& cc = cache ? *cache : local;
    const bool train = mode == Mode::Train;
    cc.blocks.resize(model.blocks.size());
    cc.input = batch;

    cc.stem_out = conv2d(batch, model.stem_w, 2, Padding::Same);
    detail::check_finite(cc.stem_out, "stem.conv");
    cc.stem_bn_out = train ? batch_norm_train(cc.stem_out, model.stem_bn, cc.stem_bn_cache)
                           : batch_norm_infer(cc.stem_out, model.stem_bn);
    Tensor<T> x = relu(cc.stem_bn_out);

    for (size_t b = 0; b < model.blocks.size(); ++b) {
        auto& blk = model.blocks[b];
        auto& bc = cc.blocks[b];
        const std::string name = "block" + std::to_string(b + 1);

        bc.block_in = x;
        bc.sep1_in = blk.input_relu ? relu(x) : x;
        bc.dw1_out = depthwise_conv(bc.sep1_in, blk.dw1, 1, Padding::Same);
        bc.pw1_out = conv2d(bc.dw1_out, blk.pw1, 1, Padding::Same);
        detail::check_finite(bc.pw1_out, name + ".sep1");
        bc.bn1_out = train ? batch_norm_train(bc.pw1_out, blk.bn1, bc.bn1_cache)
                           : batch_norm_infer(bc.pw1_out, blk.bn1);
        bc.sep2_in = relu(bc.bn1_out);
        bc.dw2_out = depthwise_conv(bc.sep2_in, blk.dw2, 1, Padding::Same);
        bc.pw2_out = conv2d(bc.dw2_out, blk.pw2, 1, Padding::Same);
        detail::check_finite(bc.pw2_out, name + ".sep2");
        bc.main_pre_pool = train ? batch_norm_train(bc.pw2_out, blk.bn2, bc.bn2_cache)
                                 : batch_norm_infer(bc.pw2_out, blk.bn2);

        Tensor<T> main = blk.pool ? max_pool(bc.main_pre_pool, bc.pool_cache)
                                  : bc.main_pre_pool;
        if (blk.residual) {
            if (blk.has_proj) {
                bc.proj_out =
                    conv2d(bc.block_in, blk.proj_w, blk.proj_stride(), Padding::Same);
                Tensor<T> skip = train
                                     ? batch_norm_train(bc.proj_out, blk.proj_bn, bc.proj_bn_cache)
                                     : batch_norm_infer(bc.proj_out, blk.proj_bn);
                if (!main.same_shape(skip)) {
                    throw Error(name + ": residual shape mismatch " + main.shape_str() +
                                " vs " + skip.shape_str());
                }
                main.data += skip.data;
            } else {
                main.data += bc.block_in.data;
            }
        }
        detail::check_finite(main, name);
        x = std::move(main);
    }

    cc.features = x;
    cc.gap_out = global_avg_pool(cc.features);
    Tensor<T> pred = conv2d(cc.gap_out, model.head_w, &model.head_b, 1, Padding::Same);
    detail::check_finite(pred, "head.conv");
    return pred;
}

template <typename T>
Tensor<T> backward(Model<T>& model, const ForwardCache<T>& cache, const Tensor<T>& dpred,
                   Gradients<T>& grads) {
    // Parameter gradients are matched to parameters() order by a cursor that
    // replays the same enumeration.
    auto params = model.parameters();
    if (grads.tensors.size() != params.size()) {
        throw Error("backward: gradient arity mismatch");
    }
    size_t cursor = params.size();
    auto grad_of = [&](Tensor<T>* param) -> Tensor<T>& {
        // Walk backwards: backward() consumes parameters in reverse order.
        while (cursor > 0) {
            --cursor;
            if (params[cursor].tensor == param) return grads.tensors[cursor];
        }
        throw Error("backward: parameter not found");
    };

    // Head.
    Tensor<T>& d_head_b = grad_of(&model.head_b);
    Tensor<T>& d_head_w = grad_of(&model.head_w);
    Tensor<T> d_gap =
        conv2d_backward(cache.gap_out, model.head_w, dpred, 1, Padding::Same, d_head_w,
                        &d_head_b);
    Tensor<T> dx = global_avg_pool_backward(d_gap, cache.features.h, cache.features.w);

    // Blocks in reverse.
    for (size_t bi = model.blocks.size(); bi-- > 0;) {
        auto& blk = model.blocks[bi];
        const auto& bc = cache.blocks[bi];

        Tensor<T> d_block_in(bc.block_in.n, bc.block_in.c, bc.block_in.h, bc.block_in.w);
        Tensor<T>* d_proj_w = nullptr;
        Tensor<T>* d_proj_gamma = nullptr;
        Tensor<T>* d_proj_beta = nullptr;
        if (blk.has_proj) {
            d_proj_beta = &grad_of(&blk.proj_bn.beta);
            d_proj_gamma = &grad_of(&blk.proj_bn.gamma);
            d_proj_w = &grad_of(&blk.proj_w);
        }
        Tensor<T>& d_bn2_beta = grad_of(&blk.bn2.beta);
        Tensor<T>& d_bn2_gamma = grad_of(&blk.bn2.gamma);
        Tensor<T>& d_pw2 = grad_of(&blk.pw2);
        Tensor<T>& d_dw2 = grad_of(&blk.dw2);
        Tensor<T>& d_bn1_beta = grad_of(&blk.bn1.beta);
        Tensor<T>& d_bn1_gamma = grad_of(&blk.bn1.gamma);
        Tensor<T>& d_pw1 = grad_of(&blk.pw1);
        Tensor<T>& d_dw1 = grad_of(&blk.dw1);

        if (blk.residual) {
            if (blk.has_proj) {
                Tensor<T> d_proj_out = batch_norm_backward(dx, blk.proj_bn, bc.proj_bn_cache,
                                                           *d_proj_gamma, *d_proj_beta);
                d_block_in = conv2d_backward(bc.block_in, blk.proj_w, d_proj_out,
                                             blk.proj_stride(), Padding::Same, *d_proj_w);
            } else {
                d_block_in.data += dx.data;
            }
        }

        Tensor<T> d_main = blk.pool ? max_pool_backward(dx, bc.main_pre_pool, bc.pool_cache)
                                    : dx;
        Tensor<T> d_pw2_out =
            batch_norm_backward(d_main, blk.bn2, bc.bn2_cache, d_bn2_gamma, d_bn2_beta);
        Tensor<T> d_dw2_out = conv2d_backward(bc.dw2_out, blk.pw2, d_pw2_out, 1, Padding::Same, d_pw2);
        Tensor<T> d_sep2_in =
            depthwise_conv_backward(bc.sep2_in, blk.dw2, d_dw2_out, 1, Padding::Same, d_dw2);
        Tensor<T> d_bn1_out = relu_backward(d_sep2_in, bc.bn1_out);
        Tensor<T> d_pw1_out =
            batch_norm_backward(d_bn1_out, blk.bn1, bc.bn1_cache, d_bn1_gamma, d_bn1_beta);
        Tensor<T> d_dw1_out = conv2d_backward(bc.dw1_out, blk.pw1, d_pw1_out, 1, Padding::Same, d_pw1);
        Tensor<T> d_sep1_in =
            depthwise_conv_backward(bc.sep1_in, blk.dw1, d_dw1_out, 1, Padding::Same, d_dw1);
        if (blk.input_relu) d_sep1_in = relu_backward(d_sep1_in, bc.block_in);
        d_block_in.data += d_sep1_in.data;
        dx = std::move(d_block_in);
    }

    // Stem.
    Tensor<T>& d_stem_beta = grad_of(&model.stem_bn.beta);
    Tensor<T>& d_stem_gamma = grad_of(&model.stem_bn.gamma);
    Tensor<T>& d_stem_w = grad_of(&model.stem_w);
    Tensor<T> d_bn_out = relu_backward(dx, cache.stem_bn_out);
    Tensor<T> d_stem_out = batch_norm_backward(d_bn_out, model.stem_bn, cache.stem_bn_cache,
                                               d_stem_gamma, d_stem_beta);
    return conv2d_backward(cache.input, model.stem_w, d_stem_out, 2, Padding::Same, d_stem_w);
}

template <typename T>
Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic> prediction_matrix(const Tensor<T>& pred) {
    Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic> out(pred.n, pred.c);
    for (int i = 0; i < pred.n; ++i) {
        for (int j = 0; j < pred.c; ++j) out(i, j) = pred(i, j, 0, 0);
    }
    return out;
}

}  // namespace octvf

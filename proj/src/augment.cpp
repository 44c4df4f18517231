#include "octvf/augment.hpp"

#include <algorithm>
#include <cmath>

namespace octvf {

void AugmentConfig::validate() const {
    if (!(hflip_prob >= 0.0 && hflip_prob <= 1.0)) throw Error("augment: hflip_prob outside [0,1]");
    if (!(elastic_alpha >= 0.0) || !std::isfinite(elastic_alpha)) {
        throw Error("augment: elastic_alpha must be finite and >= 0");
    }
    if (!(elastic_sigma > 0.0) || !std::isfinite(elastic_sigma)) {
        throw Error("augment: elastic_sigma must be finite and > 0");
    }
    if (!(cutout_fraction > 0.0 && cutout_fraction < 1.0)) {
        throw Error("augment: cutout_fraction outside (0,1)");
    }
}

uint64_t stream_seed(uint64_t global_seed, uint64_t sample_id, uint64_t epoch) {
    return hash_combine(hash_combine(global_seed, sample_id), epoch);
}

RasterImage normalize_intensity(const Eigen::ArrayXf& raw, int width, int height, float min_v,
                                float max_v) {
    if (!(max_v > min_v)) throw Error("normalize_intensity: max must exceed min");
    if (raw.size() != static_cast<Eigen::Index>(width) * height) {
        throw Error("normalize_intensity: pixel count does not match dimensions");
    }
    RasterImage out;
    out.width = width;
    out.height = height;
    out.pixels = ((raw - min_v) / (max_v - min_v)).cwiseMax(0.0f).cwiseMin(1.0f);
    out.validate("normalized image");
    return out;
}

RasterImage resize_bilinear(const RasterImage& img, int out_w, int out_h) {
    if (out_w < 1 || out_h < 1) throw Error("resize: non-positive output dimensions");
    img.validate("resize input");
    RasterImage out(out_w, out_h);
    const double sx = static_cast<double>(img.width) / out_w;
    const double sy = static_cast<double>(img.height) / out_h;
    for (int y = 0; y < out_h; ++y) {
        const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, static_cast<double>(img.height - 1));
        const int y0 = static_cast<int>(std::floor(fy));
        const int y1 = std::min(y0 + 1, img.height - 1);
        const double wy = fy - y0;
        for (int x = 0; x < out_w; ++x) {
            const double fx =
                std::clamp((x + 0.5) * sx - 0.5, 0.0, static_cast<double>(img.width - 1));
            const int x0 = static_cast<int>(std::floor(fx));
            const int x1 = std::min(x0 + 1, img.width - 1);
            const double wx = fx - x0;
            const double top = img.at(x0, y0) * (1.0 - wx) + img.at(x1, y0) * wx;
            const double bottom = img.at(x0, y1) * (1.0 - wx) + img.at(x1, y1) * wx;
            out.at(x, y) = static_cast<float>(top * (1.0 - wy) + bottom * wy);
        }
    }
    return out;
}

RasterImage flip_horizontal(const RasterImage& img) {
    RasterImage out(img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            out.at(x, y) = img.at(img.width - 1 - x, y);
        }
    }
    return out;
}

namespace {

// Separable Gaussian smoothing with replicate-edge boundary. Kernel truncated
// at ceil(3*sigma) and normalized to unit sum. Each tap is one shifted
// vector accumulate over a whole row.
void gaussian_smooth(Eigen::ArrayXd& field, int width, int height, double sigma) {
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    Eigen::ArrayXd kernel(2 * radius + 1);
    for (int i = -radius; i <= radius; ++i) {
        kernel[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));
    }
    kernel /= kernel.sum();

    Eigen::ArrayXd tmp(field.size());
    Eigen::ArrayXd padded(width + 2 * radius);
    for (int y = 0; y < height; ++y) {
        auto row = field.segment(static_cast<Eigen::Index>(y) * width, width);
        padded.segment(radius, width) = row;
        padded.head(radius).setConstant(row[0]);
        padded.tail(radius).setConstant(row[width - 1]);
        auto out = tmp.segment(static_cast<Eigen::Index>(y) * width, width);
        out.setZero();
        for (int k = 0; k < 2 * radius + 1; ++k) {
            out += kernel[k] * padded.segment(k, width);
        }
    }
    for (int y = 0; y < height; ++y) {
        auto out = field.segment(static_cast<Eigen::Index>(y) * width, width);
        out.setZero();
        for (int k = -radius; k <= radius; ++k) {
            const int yy = std::clamp(y + k, 0, height - 1);
            out += kernel[k + radius] * tmp.segment(static_cast<Eigen::Index>(yy) * width, width);
        }
    }
}

float sample_bilinear_clamped(const RasterImage& img, double fx, double fy) {
    fx = std::clamp(fx, 0.0, static_cast<double>(img.width - 1));
    fy = std::clamp(fy, 0.0, static_cast<double>(img.height - 1));
    const int x0 = static_cast<int>(std::floor(fx));
    const int y0 = static_cast<int>(std::floor(fy));
    const int x1 = std::min(x0 + 1, img.width - 1);
    const int y1 = std::min(y0 + 1, img.height - 1);
    const double wx = fx - x0;
    const double wy = fy - y0;
    const double top = img.at(x0, y0) * (1.0 - wx) + img.at(x1, y0) * wx;
    const double bottom = img.at(x0, y1) * (1.0 - wx) + img.at(x1, y1) * wx;
    return static_cast<float>(top * (1.0 - wy) + bottom * wy);
}

}  // namespace

RasterImage elastic_deform(const RasterImage& img, double alpha, double sigma, uint64_t seed) {
    if (alpha < 0.0) throw Error("elastic_deform: alpha must be >= 0");
    if (!(sigma > 0.0)) throw Error("elastic_deform: sigma must be > 0");
    if (alpha == 0.0) return img;

    Rng rng(seed);
    const Eigen::Index n = img.pixels.size();
    Eigen::ArrayXd dx(n), dy(n);
    for (Eigen::Index i = 0; i < n; ++i) dx[i] = rng.uniform(-1.0, 1.0);
    for (Eigen::Index i = 0; i < n; ++i) dy[i] = rng.uniform(-1.0, 1.0);
    gaussian_smooth(dx, img.width, img.height, sigma);
    gaussian_smooth(dy, img.width, img.height, sigma);

    RasterImage out(img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const Eigen::Index i = static_cast<Eigen::Index>(y) * img.width + x;
            out.at(x, y) = sample_bilinear_clamped(img, x + alpha * dx[i], y + alpha * dy[i]);
        }
    }
    return out;
}

RasterImage cutout(const RasterImage& img, double fraction, uint64_t seed) {
    if (!(fraction > 0.0 && fraction < 1.0)) throw Error("cutout: fraction outside (0,1)");
    const int side =
        static_cast<int>(std::lround(fraction * std::min(img.width, img.height)));
    if (side <= 0) return img;
    Rng rng(seed);
    const int x0 = static_cast<int>(rng.uniform_int(img.width - side + 1));
    const int y0 = static_cast<int>(rng.uniform_int(img.height - side + 1));
    RasterImage out = img;
    for (int y = y0; y < y0 + side; ++y) {
        for (int x = x0; x < x0 + side; ++x) out.at(x, y) = 0.0f;
    }
    return out;
}

AugmentSample augment_sample(const AugmentSample& sample, const AugmentConfig& config,
                             uint64_t seed) {
    config.validate();
    Rng rng(seed);
    AugmentSample out = sample;
    if (rng.uniform() < config.hflip_prob) {
        out.image = flip_horizontal(out.image);
        if (config.flip_labels) out.vf = mirror_exam(out.vf);
    }
    out.image = elastic_deform(out.image, config.elastic_alpha, config.elastic_sigma,
                               rng.next());
    out.image = cutout(out.image, config.cutout_fraction, rng.next());
    return out;
}

}  // namespace octvf

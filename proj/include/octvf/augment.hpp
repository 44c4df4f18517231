#pragma once

#include <cstdint>
#include <vector>

#include "octvf/raster.hpp"
#include "octvf/rng.hpp"
#include "octvf/vf_exam.hpp"

namespace octvf {

/// Training-time augmentation parameters. Validation and test batches get
/// deterministic preprocessing only.
struct AugmentConfig {
    double hflip_prob = 0.5;
    bool flip_labels = true;        // mirror the VF target together with the image
    double elastic_alpha = 8.0;     // displacement scale, pixels
    double elastic_sigma = 6.0;     // displacement smoothing, pixels
    double cutout_fraction = 0.25;  // square side as a fraction of min(w,h)

    void validate() const;
};

/// Stream seed for one (sample, epoch) pair; decorrelated across both.
uint64_t stream_seed(uint64_t global_seed, uint64_t sample_id, uint64_t epoch);

/// (v - min) / (max - min), clamped to [0,1]. Requires max > min.
RasterImage normalize_intensity(const Eigen::ArrayXf& raw, int width, int height, float min_v,
                                float max_v);

/// Bilinear resampling with half-pixel centers and edge clamping.
RasterImage resize_bilinear(const RasterImage& img, int out_w, int out_h);

/// Reverses column order.
RasterImage flip_horizontal(const RasterImage& img);

/// Simard-style elastic deformation: uniform [-1,1] displacement fields,
/// Gaussian-smoothed with `sigma` (replicate-edge), scaled by `alpha`,
/// applied by bilinear sampling with edge clamping.
RasterImage elastic_deform(const RasterImage& img, double alpha, double sigma, uint64_t seed);

/// Zeroes one axis-aligned square of side round(fraction*min(w,h)), placed
/// uniformly fully inside the image.
RasterImage cutout(const RasterImage& img, double fraction, uint64_t seed);

/// One training sample on its way into a batch.
struct AugmentSample {
    RasterImage image;
    VFExam vf;
};

/// Full stochastic pipeline (flip, elastic, cutout) driven by one stream
/// seed; a pure function of (sample, config, seed).
AugmentSample augment_sample(const AugmentSample& sample, const AugmentConfig& config,
                             uint64_t seed);

}  // namespace octvf

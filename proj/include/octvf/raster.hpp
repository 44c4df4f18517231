#pragma once

#include <Eigen/Core>

#include "octvf/common.hpp"

namespace octvf {

/// Single-channel image, row-major, intensities in [0,1].
struct RasterImage {
    int width = 0;
    int height = 0;
    Eigen::ArrayXf pixels;  // size width*height, row y at [y*width, (y+1)*width)

    RasterImage() = default;
    RasterImage(int w, int h) : width(w), height(h), pixels(Eigen::ArrayXf::Zero(w * h)) {}

    float at(int x, int y) const { return pixels[static_cast<Eigen::Index>(y) * width + x]; }
    float& at(int x, int y) { return pixels[static_cast<Eigen::Index>(y) * width + x]; }

    Eigen::Index size() const { return pixels.size(); }

    void validate(const char* what = "image") const {
        if (width < 1 || height < 1) {
            throw Error(std::string(what) + ": non-positive dimensions");
        }
        if (pixels.size() != static_cast<Eigen::Index>(width) * height) {
            throw Error(std::string(what) + ": pixel count does not match dimensions");
        }
        if (!pixels.allFinite()) throw Error(std::string(what) + ": non-finite pixel");
        if ((pixels < 0.0f).any() || (pixels > 1.0f).any()) {
            throw Error(std::string(what) + ": pixel outside [0,1]");
        }
    }
};

}  // namespace octvf

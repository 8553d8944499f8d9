#pragma once

#include <vector>

#include "rdt/error.hpp"

namespace rdt {

// Planar image, channel-major: value(c, y, x) = d[(c*h + y)*w + x].
// Pixel values are normalized to [0, 1] once loaded from disk.
struct Image {
    int h = 0;
    int w = 0;
    int ch = 1;
    std::vector<double> d;

    Image() = default;
    Image(int ch_, int h_, int w_, double fill = 0.0)
        : h(h_), w(w_), ch(ch_), d(static_cast<size_t>(ch_) * h_ * w_, fill) {}

    double& at(int c, int y, int x) {
        return d[(static_cast<size_t>(c) * h + y) * w + x];
    }
    double at(int c, int y, int x) const {
        return d[(static_cast<size_t>(c) * h + y) * w + x];
    }

    bool empty() const { return d.empty(); }
    size_t plane_size() const { return static_cast<size_t>(h) * w; }
};

// Bilinear sample of channel c at continuous position (x, y); pixel centers
// sit at integer coordinates. Neighbours outside the image contribute `pad`.
double bilinear_sample(const Image& img, int c, double x, double y, double pad);

// Square crop of side `side` centered at (cx, cy), resampled to
// out_size x out_size. Out-of-frame area is filled with the per-channel
// image mean.
Image crop_resize(const Image& img, double cx, double cy, double side, int out_size);

// Area-average downscale to oh x ow (single output channel from channel c).
std::vector<double> downscale_gray(const Image& img, int c, int oh, int ow);

double channel_mean(const Image& img, int c);
double mean_intensity(const Image& img);

// Luma of an RGB image; identity copy of channel 0 for single-channel input.
Image to_gray(const Image& img);

}  // namespace rdt

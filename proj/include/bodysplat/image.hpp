// Copyright Contributors to the bodysplat Project
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include "core.hpp"

namespace bodysplat {

/// Interleaved, row-major float image (double precision, nominal range [0, 1]).
struct Image {
    int width    = 0;
    int height   = 0;
    int channels = 0;
    std::vector<double> data;

    Image() = default;
    Image(int w, int h, int c, double fill = 0.0)
        : width(w), height(h), channels(c),
          data(static_cast<std::size_t>(w) * h * c, fill) {}

    std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
    std::size_t size() const { return data.size(); }

    double &at(int x, int y, int c = 0) {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
    double at(int x, int y, int c = 0) const {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }

    bool same_shape(const Image &o) const {
        return width == o.width && height == o.height && channels == o.channels;
    }

    Image
    channel(int c) const {
        Image out(width, height, 1);
        for (std::size_t p = 0; p < pixel_count(); ++p) {
            out.data[p] = data[p * channels + c];
        }
        return out;
    }

    /// Channel mean, used as the grayscale conversion by the metrics.
    Image
    grayscale() const {
        Image out(width, height, 1);
        for (std::size_t p = 0; p < pixel_count(); ++p) {
            double s = 0.0;
            for (int c = 0; c < channels; ++c) {
                s += data[p * channels + c];
            }
            out.data[p] = s / channels;
        }
        return out;
    }

    Image
    crop(int x0, int y0, int w, int h) const {
        Image out(w, h, channels);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                for (int c = 0; c < channels; ++c) {
                    out.at(x, y, c) = at(x0 + x, y0 + y, c);
                }
            }
        }
        return out;
    }
};

/// RGB render target plus accumulated opacity.
struct ImageBuffer {
    Image rgb;   // H x W x 3
    Image alpha; // H x W x 1

    ImageBuffer() = default;
    ImageBuffer(int w, int h) : rgb(w, h, 3), alpha(w, h, 1) {}
    int width() const { return rgb.width; }
    int height() const { return rgb.height; }
};

inline void
require_same_shape(const Image &a, const Image &b, const std::string &what) {
    require(a.same_shape(b), what + ": image shape mismatch (" + std::to_string(a.width) + "x" +
                                 std::to_string(a.height) + "x" + std::to_string(a.channels) +
                                 " vs " + std::to_string(b.width) + "x" +
                                 std::to_string(b.height) + "x" + std::to_string(b.channels) + ")");
}

} // namespace bodysplat

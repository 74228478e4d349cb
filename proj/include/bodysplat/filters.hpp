// Copyright Contributors to the bodysplat Project
// SPDX-License-Identifier: Apache-2.0
//
// Small linear image operators on single-channel planes, each with its exact adjoint.
//
#pragma once

#include "image.hpp"

namespace bodysplat::filters {

/// Normalized 1D Gaussian taps.
inline std::vector<double>
gaussian_taps(int size, double sigma) {
    std::vector<double> taps(size);
    const double centre = 0.5 * (size - 1);
    double sum          = 0.0;
    for (int i = 0; i < size; ++i) {
        const double x = i - centre;
        taps[i]        = std::exp(-0.5 * x * x / (sigma * sigma));
        sum           += taps[i];
    }
    for (auto &t : taps) {
        t /= sum;
    }
    return taps;
}

namespace detail {

inline int
clampi(int v, int lo, int hi) {
    return std::min(std::max(v, lo), hi);
}

} // namespace detail

/// Separable filter with replicated borders; output has the input's size.
inline Image
separable_same(const Image &in, const std::vector<double> &taps) {
    const int r = static_cast<int>(taps.size()) / 2;
    const int k = static_cast<int>(taps.size());
    const int w = in.width, h = in.height;
    Image tmp(w, h, 1);
    std::vector<double> padded(static_cast<std::size_t>(w + 2 * r));
    for (int y = 0; y < h; ++y) {
        const double *row = &in.data[static_cast<std::size_t>(y) * w];
        for (int x = 0; x < w + 2 * r; ++x) {
            padded[x] = row[detail::clampi(x - r, 0, w - 1)];
        }
        double *dst = &tmp.data[static_cast<std::size_t>(y) * w];
        for (int x = 0; x < w; ++x) {
            double s = 0.0;
            for (int i = 0; i < k; ++i) {
                s += taps[i] * padded[x + i];
            }
            dst[x] = s;
        }
    }
    Image out(w, h, 1);
    for (int y = 0; y < h; ++y) {
        double *dst = &out.data[static_cast<std::size_t>(y) * w];
        for (int i = 0; i < k; ++i) {
            const double *src = &tmp.data[static_cast<std::size_t>(detail::clampi(y + i - r, 0, h - 1)) * w];
            const double t    = taps[i];
            for (int x = 0; x < w; ++x) {
                dst[x] += t * src[x];
            }
        }
    }
    return out;
}

inline Image
separable_same_adjoint(const Image &grad_out, const std::vector<double> &taps) {
    const int r = static_cast<int>(taps.size()) / 2;
    const int k = static_cast<int>(taps.size());
    const int w = grad_out.width, h = grad_out.height;
    Image tmp(w, h, 1);
    for (int y = 0; y < h; ++y) {
        const double *src = &grad_out.data[static_cast<std::size_t>(y) * w];
        for (int i = 0; i < k; ++i) {
            double *dst    = &tmp.data[static_cast<std::size_t>(detail::clampi(y + i - r, 0, h - 1)) * w];
            const double t = taps[i];
            for (int x = 0; x < w; ++x) {
                dst[x] += t * src[x];
            }
        }
    }
    Image out(w, h, 1);
    std::vector<double> padded(static_cast<std::size_t>(w + 2 * r));
    for (int y = 0; y < h; ++y) {
        std::fill(padded.begin(), padded.end(), 0.0);
        const double *src = &tmp.data[static_cast<std::size_t>(y) * w];
        for (int x = 0; x < w; ++x) {
            for (int i = 0; i < k; ++i) {
                padded[x + i] += taps[i] * src[x];
            }
        }
        double *dst = &out.data[static_cast<std::size_t>(y) * w];
        for (int x = 0; x < w + 2 * r; ++x) {
            dst[detail::clampi(x - r, 0, w - 1)] += padded[x];
        }
    }
    return out;
}

/// Separable filter evaluated only where the window fits ("valid" convolution).
inline Image
separable_valid(const Image &in, const std::vector<double> &taps) {
    const int k = static_cast<int>(taps.size());
    const int w = in.width - k + 1, h = in.height - k + 1;
    require(w > 0 && h > 0, "separable_valid: image smaller than window");
    Image tmp(w, in.height, 1);
    for (int y = 0; y < in.height; ++y) {
        for (int x = 0; x < w; ++x) {
            double s = 0.0;
            for (int i = 0; i < k; ++i) {
                s += taps[i] * in.at(x + i, y);
            }
            tmp.at(x, y) = s;
        }
    }
    Image out(w, h, 1);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double s = 0.0;
            for (int i = 0; i < k; ++i) {
                s += taps[i] * tmp.at(x, y + i);
            }
            out.at(x, y) = s;
        }
    }
    return out;
}

/// 3x3 correlation with replicated borders.
inline Image
conv3x3_same(const Image &in, const double (&k)[3][3]) {
    Image out(in.width, in.height, 1);
    for (int y = 0; y < in.height; ++y) {
        for (int x = 0; x < in.width; ++x) {
            double s = 0.0;
            for (int j = -1; j <= 1; ++j) {
                for (int i = -1; i <= 1; ++i) {
                    s += k[j + 1][i + 1] * in.at(detail::clampi(x + i, 0, in.width - 1),
                                                 detail::clampi(y + j, 0, in.height - 1));
                }
            }
            out.at(x, y) = s;
        }
    }
    return out;
}

inline Image
conv3x3_same_adjoint(const Image &grad_out, const double (&k)[3][3]) {
    Image out(grad_out.width, grad_out.height, 1);
    for (int y = 0; y < grad_out.height; ++y) {
        for (int x = 0; x < grad_out.width; ++x) {
            for (int j = -1; j <= 1; ++j) {
                for (int i = -1; i <= 1; ++i) {
                    out.at(detail::clampi(x + i, 0, grad_out.width - 1),
                           detail::clampi(y + j, 0, grad_out.height - 1)) +=
                        k[j + 1][i + 1] * grad_out.at(x, y);
                }
            }
        }
    }
    return out;
}

inline constexpr double kSobelX[3][3] = {{-1, 0, 1}, {-2, 0, 2}, {-1, 0, 1}};
inline constexpr double kSobelY[3][3] = {{-1, -2, -1}, {0, 0, 0}, {1, 2, 1}};

/// 2x2 box average; odd trailing rows/columns are dropped.
inline Image
downsample2(const Image &in) {
    Image out(in.width / 2, in.height / 2, 1);
    for (int y = 0; y < out.height; ++y) {
        for (int x = 0; x < out.width; ++x) {
            out.at(x, y) = 0.25 * (in.at(2 * x, 2 * y) + in.at(2 * x + 1, 2 * y) +
                                   in.at(2 * x, 2 * y + 1) + in.at(2 * x + 1, 2 * y + 1));
        }
    }
    return out;
}

inline Image
downsample2_adjoint(const Image &grad_out, int in_width, int in_height) {
    Image out(in_width, in_height, 1);
    for (int y = 0; y < grad_out.height; ++y) {
        for (int x = 0; x < grad_out.width; ++x) {
            const double g = 0.25 * grad_out.at(x, y);
            out.at(2 * x, 2 * y) += g;
            out.at(2 * x + 1, 2 * y) += g;
            out.at(2 * x, 2 * y + 1) += g;
            out.at(2 * x + 1, 2 * y + 1) += g;
        }
    }
    return out;
}

} // namespace bodysplat::filters

// Copyright Contributors to the bodysplat Project
// SPDX-License-Identifier: Apache-2.0
//
// Slow, direct reference implementations used as oracles: full 2D window sums, no separable
// passes, no shared code with the library filters.
//
#pragma once

#include <bodysplat/image.hpp>

#include <cmath>
#include <vector>

namespace bodysplat::oracle {

inline std::vector<std::vector<double>>
gaussian_window_2d(int size, double sigma) {
    std::vector<std::vector<double>> w(size, std::vector<double>(size));
    const double c = (size - 1) / 2.0;
    double total   = 0.0;
    for (int j = 0; j < size; ++j) {
        for (int i = 0; i < size; ++i) {
            w[j][i] = std::exp(-((i - c) * (i - c) + (j - c) * (j - c)) / (2.0 * sigma * sigma));
            total  += w[j][i];
        }
    }
    for (auto &row : w) {
        for (auto &v : row) v /= total;
    }
    return w;
}

inline double
plane(const Image &img, int x, int y) {
    x = x < 0 ? 0 : (x >= img.width ? img.width - 1 : x);
    y = y < 0 ? 0 : (y >= img.height ? img.height - 1 : y);
    return img.at(x, y, 0);
}

/// SSIM map value at (x, y) for a window centred there (replicated borders).
inline double
ssim_at(const Image &a, const Image &b, int x, int y, const std::vector<std::vector<double>> &w) {
    const int size = static_cast<int>(w.size()), r = size / 2;
    double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
    for (int j = 0; j < size; ++j) {
        for (int i = 0; i < size; ++i) {
            const double va = plane(a, x + i - r, y + j - r);
            const double vb = plane(b, x + i - r, y + j - r);
            ma  += w[j][i] * va;
            mb  += w[j][i] * vb;
            saa += w[j][i] * va * va;
            sbb += w[j][i] * vb * vb;
            sab += w[j][i] * va * vb;
        }
    }
    const double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
    const double var_a = saa - ma * ma, var_b = sbb - mb * mb, cov = sab - ma * mb;
    return ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (var_a + var_b + c2));
}

/// Mean SSIM on a single-channel plane, windows centred on every pixel.
inline double
ssim_same_reference(const Image &a, const Image &b) {
    const auto w = gaussian_window_2d(11, 1.5);
    double s     = 0.0;
    for (int y = 0; y < a.height; ++y) {
        for (int x = 0; x < a.width; ++x) {
            s += ssim_at(a, b, x, y, w);
        }
    }
    return s / (a.width * a.height);
}

/// Mean SSIM over windows fully inside the image, on the channel-mean grayscale.
inline double
ssim_valid_reference(const Image &a, const Image &b) {
    const auto w = gaussian_window_2d(11, 1.5);
    Image ga(a.width, a.height, 1), gb(a.width, a.height, 1);
    for (int y = 0; y < a.height; ++y) {
        for (int x = 0; x < a.width; ++x) {
            double sa = 0, sb = 0;
            for (int c = 0; c < a.channels; ++c) {
                sa += a.at(x, y, c);
                sb += b.at(x, y, c);
            }
            ga.at(x, y) = sa / a.channels;
            gb.at(x, y) = sb / a.channels;
        }
    }
    double s = 0.0;
    int n    = 0;
    for (int y = 5; y + 5 < a.height; ++y) {
        for (int x = 5; x + 5 < a.width; ++x) {
            s += ssim_at(ga, gb, x, y, w);
            ++n;
        }
    }
    return s / n;
}

inline Image
half_resolution(const Image &p) {
    Image out(p.width / 2, p.height / 2, 1);
    for (int y = 0; y < out.height; ++y) {
        for (int x = 0; x < out.width; ++x) {
            out.at(x, y) = (p.at(2 * x, 2 * y) + p.at(2 * x + 1, 2 * y) + p.at(2 * x, 2 * y + 1) +
                            p.at(2 * x + 1, 2 * y + 1)) / 4.0;
        }
    }
    return out;
}

inline double
sobel_magnitude(const Image &p, int x, int y) {
    auto v = [&](int dx, int dy) { return plane(p, x + dx, y + dy); };
    const double gx = (v(1, -1) + 2 * v(1, 0) + v(1, 1)) - (v(-1, -1) + 2 * v(-1, 0) + v(-1, 1));
    const double gy = (v(-1, 1) + 2 * v(0, 1) + v(1, 1)) - (v(-1, -1) + 2 * v(0, -1) + v(1, -1));
    return std::sqrt(gx * gx + gy * gy + 1e-8);
}

/// Multiscale structural dissimilarity plus Sobel edge-magnitude L1, averaged over channels.
inline double
perceptual_reference(const Image &a, const Image &b) {
    double ssim_part = 0.0, edge_part = 0.0;
    for (int c = 0; c < a.channels; ++c) {
        Image pa = a.channel(c), pb = b.channel(c);
        int levels = 0;
        for (int w = a.width, h = a.height; levels < 3 && w >= 1 && h >= 1; w /= 2, h /= 2) ++levels;
        Image la = pa, lb = pb;
        for (int s = 0; s < levels; ++s) {
            ssim_part += 0.5 * (1.0 - ssim_same_reference(la, lb)) / (levels * a.channels);
            la = half_resolution(la);
            lb = half_resolution(lb);
        }
        for (int y = 0; y < a.height; ++y) {
            for (int x = 0; x < a.width; ++x) {
                edge_part += std::abs(sobel_magnitude(pa, x, y) - sobel_magnitude(pb, x, y));
            }
        }
    }
    return ssim_part + edge_part / (static_cast<double>(a.width) * a.height * a.channels);
}

} // namespace bodysplat::oracle

// Copyright Contributors to the bodysplat Project
// SPDX-License-Identifier: Apache-2.0
//
// Side-by-side image strips for the demos.
//
#pragma once

#include <bodysplat/image.hpp>

#include <vector>

namespace demo {

/// Concatenates equally tall RGB images left to right with a small white gutter.
inline bodysplat::Image
hstack(const std::vector<bodysplat::Image> &tiles, int gutter = 4) {
    int w = 0;
    const int h = tiles.empty() ? 0 : tiles[0].height;
    for (const auto &t : tiles) w += t.width;
    w += gutter * (static_cast<int>(tiles.size()) - 1);
    bodysplat::Image out(std::max(w, 1), std::max(h, 1), 3, 1.0);
    int x0 = 0;
    for (const auto &t : tiles) {
        for (int y = 0; y < std::min(h, t.height); ++y)
            for (int x = 0; x < t.width; ++x)
                for (int c = 0; c < 3; ++c) out.at(x0 + x, y, c) = t.at(x, y, c);
        x0 += t.width + gutter;
    }
    return out;
}

} // namespace demo

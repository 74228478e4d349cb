// Copyright Contributors to the bodysplat Project
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace bodysplat {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using MatX = Eigen::MatrixXd;
using VecX = Eigen::VectorXd;

/// Bad input: wrong shapes, invalid rotations, malformed files. Maps to CLI exit code 1.
class ValidationError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// NaN/Inf or otherwise unusable numbers produced during a computation. Maps to exit code 2.
class NumericalError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

inline void
require(bool condition, const std::string &message) {
    if (!condition) {
        throw ValidationError(message);
    }
}

inline bool
all_finite(const std::vector<Vec3> &values) {
    return std::all_of(values.begin(), values.end(), [](const Vec3 &v) { return v.allFinite(); });
}

inline double
sigmoid(double x) {
    return 1.0 / (1.0 + std::exp(-x));
}

inline double
logit(double p) {
    return std::log(p / (1.0 - p));
}

/// Runs body(i) for i in [0, count) on up to `threads` workers. Work items are claimed
/// dynamically, so body must only write state owned by item i.
template <typename Body>
void
parallel_for(std::size_t count, int threads, Body &&body) {
    const std::size_t workers =
        std::min<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) {
            body(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
            body(i);
        }
    };
    std::vector<std::jthread> pool;
    pool.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) {
        pool.emplace_back(worker);
    }
    worker();
}

/// splitmix64, used to derive independent per-purpose seeds from one user seed.
inline std::uint64_t
mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
    z               = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z               = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

} // namespace bodysplat

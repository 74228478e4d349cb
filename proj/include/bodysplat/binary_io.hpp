// Copyright Contributors to the bodysplat Project
// SPDX-License-Identifier: Apache-2.0
//
// Little-endian primitives shared by the body-model and checkpoint containers.
//
#pragma once

#include "core.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <initializer_list>
#include <istream>
#include <ostream>

namespace bodysplat::binio {

inline void
write_u32(std::ostream &out, std::uint32_t value) {
    std::array<unsigned char, 4> bytes{};
    for (int i = 0; i < 4; ++i) {
        bytes[i] = static_cast<unsigned char>((value >> (8 * i)) & 0xFFu);
    }
    out.write(reinterpret_cast<const char *>(bytes.data()), 4);
}

inline void
write_f32(std::ostream &out, float value) {
    write_u32(out, std::bit_cast<std::uint32_t>(value));
}

inline void
write_f32s(std::ostream &out, std::initializer_list<double> values) {
    for (double v : values) {
        write_f32(out, static_cast<float>(v));
    }
}

template <typename Derived>
void
write_matrix_f32(std::ostream &out, const Eigen::MatrixBase<Derived> &m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            write_f32(out, static_cast<float>(m(r, c)));
        }
    }
}

inline void
write_magic(std::ostream &out, const char (&magic)[5]) {
    out.write(magic, 4);
}

inline std::uint32_t
read_u32(std::istream &in, const std::string &where) {
    std::array<unsigned char, 4> bytes{};
    in.read(reinterpret_cast<char *>(bytes.data()), 4);
    require(in.gcount() == 4, where + ": truncated file");
    std::uint32_t value = 0;
    for (int i = 0; i < 4; ++i) {
        value |= static_cast<std::uint32_t>(bytes[i]) << (8 * i);
    }
    return value;
}

inline float
read_f32(std::istream &in, const std::string &where) {
    return std::bit_cast<float>(read_u32(in, where));
}

inline std::vector<double>
read_f32s(std::istream &in, std::size_t count, const std::string &where) {
    std::vector<double> out(count);
    for (auto &v : out) {
        v = read_f32(in, where);
        require(std::isfinite(v), where + ": non-finite value");
    }
    return out;
}

inline Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>
read_matrix_f32(std::istream &in, Eigen::Index rows, Eigen::Index cols, const std::string &where) {
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
            m(r, c) = read_f32(in, where);
            require(std::isfinite(m(r, c)), where + ": non-finite value");
        }
    }
    return m;
}

inline void
expect_magic(std::istream &in, const char (&magic)[5], const std::string &where) {
    char got[4] = {};
    in.read(got, 4);
    require(in.gcount() == 4 && std::memcmp(got, magic, 4) == 0,
            where + ": bad magic, expected " + std::string(magic, 4));
}

} // namespace bodysplat::binio

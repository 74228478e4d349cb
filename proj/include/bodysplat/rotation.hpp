// Copyright Contributors to the bodysplat Project
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include "core.hpp"

#include <random>

namespace bodysplat {

/// Continuous 6D rotation representation: the first two columns of the rotation matrix,
/// stored as (c0.x, c0.y, c0.z, c1.x, c1.y, c1.z). Any pair of non-parallel vectors maps
/// to a valid rotation via Gram-Schmidt.
using Rot6 = Eigen::Matrix<double, 6, 1>;

inline Rot6
rot6_from_matrix(const Mat3 &r) {
    Rot6 out;
    out << r.col(0), r.col(1);
    return out;
}

inline Mat3
matrix_from_rot6(const Rot6 &x) {
    const Vec3 a1 = x.head<3>();
    const Vec3 a2 = x.tail<3>();
    const Vec3 b1 = a1.normalized();
    const Vec3 u2 = a2 - b1.dot(a2) * b1;
    const Vec3 b2 = u2.normalized();
    Mat3 r;
    r.col(0) = b1;
    r.col(1) = b2;
    r.col(2) = b1.cross(b2);
    return r;
}

/// Pulls dL/dR back to dL/dx for R = matrix_from_rot6(x).
inline Rot6
matrix_from_rot6_backward(const Rot6 &x, const Mat3 &grad_r) {
    const Vec3 a1   = x.head<3>();
    const Vec3 a2   = x.tail<3>();
    const double n1 = a1.norm();
    const Vec3 b1   = a1 / n1;
    const Vec3 u2   = a2 - b1.dot(a2) * b1;
    const double n2 = u2.norm();
    const Vec3 b2   = u2 / n2;

    const Vec3 g3 = grad_r.col(2);
    Vec3 db1      = grad_r.col(0) + b2.cross(g3);
    const Vec3 db2 = grad_r.col(1) + g3.cross(b1);

    const Vec3 du2 = (db2 - b2 * b2.dot(db2)) / n2;
    const Vec3 da2 = du2 - b1 * b1.dot(du2);
    db1 -= b1.dot(a2) * du2 + a2 * b1.dot(du2);
    const Vec3 da1 = (db1 - b1 * b1.dot(db1)) / n1;

    Rot6 out;
    out << da1, da2;
    return out;
}

/// Rotation matrix of a unit quaternion stored as (w, x, y, z).
inline Mat3
matrix_from_unit_quaternion(const Vec4 &q) {
    const double w = q[0], x = q[1], y = q[2], z = q[3];
    Mat3 r;
    r << 1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y),
        2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x),
        2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y);
    return r;
}

inline Vec4
matrix_from_unit_quaternion_backward(const Vec4 &q, const Mat3 &g) {
    const double w = q[0], x = q[1], y = q[2], z = q[3];
    Vec4 d;
    d[0] = 2.0 * (-z * g(0, 1) + y * g(0, 2) + z * g(1, 0) - x * g(1, 2) - y * g(2, 0) +
                  x * g(2, 1));
    d[1] = 2.0 * (y * g(0, 1) + z * g(0, 2) + y * g(1, 0) - 2.0 * x * g(1, 1) - w * g(1, 2) +
                  z * g(2, 0) + w * g(2, 1) - 2.0 * x * g(2, 2));
    d[2] = 2.0 * (-2.0 * y * g(0, 0) + x * g(0, 1) + w * g(0, 2) + x * g(1, 0) + z * g(1, 2) -
                  w * g(2, 0) + z * g(2, 1) - 2.0 * y * g(2, 2));
    d[3] = 2.0 * (-2.0 * z * g(0, 0) - w * g(0, 1) + x * g(0, 2) + w * g(1, 0) -
                  2.0 * z * g(1, 1) + y * g(1, 2) + x * g(2, 0) + y * g(2, 1));
    return d;
}

/// Rodrigues' formula; `axis_angle` direction is the axis, norm the angle in radians.
inline Mat3
matrix_from_axis_angle(const Vec3 &axis_angle) {
    const double angle = axis_angle.norm();
    if (angle < 1e-15) {
        return Mat3::Identity();
    }
    return Eigen::AngleAxisd(angle, axis_angle / angle).toRotationMatrix();
}

inline double
rotation_angle(const Mat3 &r) {
    return std::acos(std::clamp((r.trace() - 1.0) * 0.5, -1.0, 1.0));
}

/// Uniform random axis with the given angle (radians).
template <typename Rng>
Mat3
random_rotation_with_angle(Rng &rng, double angle) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Vec3 axis;
    do {
        axis = Vec3(normal(rng), normal(rng), normal(rng));
    } while (axis.norm() < 1e-6);
    return matrix_from_axis_angle(axis.normalized() * angle);
}

inline bool
is_rotation(const Mat3 &r, double tol = 1e-5) {
    return r.allFinite() && (r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff() <= tol &&
           std::abs(r.determinant() - 1.0) <= tol;
}

} // namespace bodysplat

// Copyright Contributors to the bodysplat Project
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include "core.hpp"

namespace bodysplat {

/// Pinhole camera, OpenCV convention (x right, y down, z forward). Pixel (x, y) has its
/// centre at continuous image coordinate (x, y).
struct Camera {
    Mat4 world_to_camera = Mat4::Identity();
    double fx = 1.0, fy = 1.0, cx = 0.0, cy = 0.0;
    int width = 1, height = 1;
    double near = 0.05;

    Mat3 rotation() const { return world_to_camera.topLeftCorner<3, 3>(); }
    Vec3 translation() const { return world_to_camera.topRightCorner<3, 1>(); }
    Vec3 to_camera(const Vec3 &p) const { return rotation() * p + translation(); }
    Vec3 center() const { return -rotation().transpose() * translation(); }

    void
    validate() const {
        require(world_to_camera.allFinite(), "camera: non-finite extrinsics");
        const Mat3 r = rotation();
        require((r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-6 &&
                    r.determinant() > 0.0,
                "camera: rotation block is not orthonormal");
        require(world_to_camera.row(3).isApprox(Eigen::RowVector4d(0, 0, 0, 1)),
                "camera: last row must be (0, 0, 0, 1)");
        require(fx > 0.0 && fy > 0.0, "camera: focal lengths must be positive");
        require(std::isfinite(cx) && std::isfinite(cy), "camera: non-finite principal point");
        require(width > 0 && height > 0, "camera: empty image size");
        require(near > 0.0, "camera: near plane must be positive");
    }

    /// Camera at `eye` looking at `target`; `up` is world up (image y points against it).
    static Camera
    look_at(const Vec3 &eye, const Vec3 &target, const Vec3 &up, double focal, int width,
            int height, double near = 0.05) {
        const Vec3 z = (target - eye).normalized();
        const Vec3 x = z.cross(up).normalized();
        const Vec3 y = z.cross(x);
        Mat3 r;
        r.row(0) = x.transpose();
        r.row(1) = y.transpose();
        r.row(2) = z.transpose();
        Camera cam;
        cam.world_to_camera.topLeftCorner<3, 3>()  = r;
        cam.world_to_camera.topRightCorner<3, 1>() = -r * eye;
        cam.fx = cam.fy = focal;
        cam.cx          = 0.5 * (width - 1);
        cam.cy          = 0.5 * (height - 1);
        cam.width       = width;
        cam.height      = height;
        cam.near        = near;
        return cam;
    }
};

} // namespace bodysplat

#pragma once

#include <optional>

#include "dsplat/camera.hpp"
#include "dsplat/error.hpp"
#include "dsplat/gaussian.hpp"

namespace dsplat {

// Screen-space covariance dilation in px^2. Keeps sub-pixel splats from
// collapsing to zero-gradient footprints.
inline constexpr double kCovDilation = 0.3;

struct ProjectedSplat {
    Vec2 mean2d;
    Mat2Sym cov2d;
    double depth = 0.0;
};

// First-order (EWA-style) perspective projection of the Gaussian.
//   t = R (mu - campos), mean2d = pi(t), cov2d = J Sigma J^T + dilation,
// with J the Jacobian of pi at t.
inline std::optional<ProjectedSplat> try_project(const Gaussian3D& g, const Camera& cam) {
    Mat3 rot = cam.world_to_camera_rotation();
    Vec3 t = rot * (g.mu - cam.position);
    if (t.z <= cam.near) return std::nullopt;

    double f = cam.focal_px();
    double inv_z = 1.0 / t.z;
    double inv_z2 = inv_z * inv_z;

    // J = d(pixel)/d(t), rows (u, v); v is y-down.
    double j00 = f * inv_z, j02 = -f * t.x * inv_z2;
    double j11 = -f * inv_z, j12 = f * t.y * inv_z2;

    Mat3 sigma = covariance_from_params(g.log_scale, g.rot.normalized());
    Mat3 sigma_cam = rot * sigma * rot.transposed();

    // cov2d = J sigma_cam J^T for the sparse J above.
    double a00 = j00 * sigma_cam(0, 0) + j02 * sigma_cam(2, 0);
    double a01 = j00 * sigma_cam(0, 1) + j02 * sigma_cam(2, 1);
    double a02 = j00 * sigma_cam(0, 2) + j02 * sigma_cam(2, 2);
    double b11 = j11 * sigma_cam(1, 1) + j12 * sigma_cam(2, 1);
    double b12 = j11 * sigma_cam(1, 2) + j12 * sigma_cam(2, 2);

    Mat2Sym cov;
    cov.xx = a00 * j00 + a02 * j02 + kCovDilation;
    cov.xy = a01 * j11 + a02 * j12;
    cov.yy = b11 * j11 + b12 * j12 + kCovDilation;

    ProjectedSplat out;
    out.mean2d = cam.camera_to_pixel(t);
    out.cov2d = cov;
    out.depth = t.z;
    return out;
}

inline ProjectedSplat project_gaussian(const Gaussian3D& g, const Camera& cam) {
    auto p = try_project(g, cam);
    if (!p) throw Error(ErrorCode::BehindCamera, "gaussian at or behind near plane");
    return *p;
}

} // namespace dsplat

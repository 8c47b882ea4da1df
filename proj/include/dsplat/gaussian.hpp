#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dsplat/math.hpp"

namespace dsplat {

// Scale clamp bounds on exp(log_scale), in world units.
inline constexpr double kMinScale = 1e-7;
inline constexpr double kMaxScale = 1e3;

// One anisotropic Gaussian primitive. Scales live in log space and opacity
// as a logit so optimizer steps stay unconstrained; clamps and quaternion
// renormalization happen after each step.
struct Gaussian3D {
    Vec3 mu{0, 0, 0};
    Vec3 log_scale{0, 0, 0};
    Quat rot = Quat::identity();
    double opacity_logit = 0.0;
    Vec3 color{0.5, 0.5, 0.5}; // flat RGB (spherical harmonics degree 0)

    double opacity() const { return sigmoid(opacity_logit); }
    Vec3 scale() const {
        return {std::exp(log_scale.x), std::exp(log_scale.y), std::exp(log_scale.z)};
    }

    void normalize_rotation() { rot = rot.normalized(); }
    void clamp_scale() {
        const double lo = std::log(kMinScale), hi = std::log(kMaxScale);
        log_scale.x = clamp(log_scale.x, lo, hi);
        log_scale.y = clamp(log_scale.y, lo, hi);
        log_scale.z = clamp(log_scale.z, lo, hi);
    }
};

struct SplatModel {
    std::vector<Gaussian3D> gaussians;
    std::optional<int> origin_partition;
    int64_t iteration = 0;

    size_t size() const { return gaussians.size(); }
    bool empty() const { return gaussians.empty(); }

    Aabb bounds() const {
        Aabb box;
        if (gaussians.empty()) return box;
        box.lo = box.hi = gaussians.front().mu;
        for (const auto& g : gaussians) box.expand(g.mu);
        return box;
    }
};

// Sigma = R * diag(exp(log_scale))^2 * R^T. The result is symmetric PSD with
// eigenvalues exp(log_scale)^2 up to rotation.
inline Mat3 covariance_from_params(const Vec3& log_scale, const Quat& rot) {
    Mat3 r = quat_to_mat3(rot);
    Vec3 s2{std::exp(2.0 * log_scale.x), std::exp(2.0 * log_scale.y),
            std::exp(2.0 * log_scale.z)};
    // R * diag(s2) * R^T, written out to keep exact symmetry.
    Mat3 cov = Mat3::zero();
    for (int i = 0; i < 3; ++i)
        for (int j = i; j < 3; ++j) {
            double v = r(i, 0) * s2.x * r(j, 0) + r(i, 1) * s2.y * r(j, 1) +
                       r(i, 2) * s2.z * r(j, 2);
            cov(i, j) = v;
            cov(j, i) = v;
        }
    return cov;
}

} // namespace dsplat

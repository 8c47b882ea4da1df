#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "dsplat/error.hpp"
#include "dsplat/math.hpp"
#include "dsplat/rng.hpp"

namespace dsplat {

// Pinhole camera, look-at convention. World is right-handed, y-up.
// Image coordinates: u right, v down, origin at the top-left pixel corner;
// the image center is (width/2, height/2) in continuous pixel units.
struct Camera {
    Vec3 position{0, 0, 0};
    Vec3 target{0, 0, 1};
    Vec3 up{0, 1, 0};
    double fov_y = 0.9; // radians
    int width = 64;
    int height = 64;
    double near = 0.01;
    double far = 100.0;

    void validate() const {
        if (width < 8 || height < 8)
            throw Error(ErrorCode::InvalidRig, "camera resolution below 8 px");
        if (!(fov_y > 0.0 && fov_y < M_PI))
            throw Error(ErrorCode::InvalidRig, "fov_y outside (0, pi)");
        if (!(near < far))
            throw Error(ErrorCode::InvalidRig, "near must be < far");
        Vec3 dir = target - position;
        if (dir.cross(up).norm() <= 1e-12 * dir.norm() * up.norm())
            throw Error(ErrorCode::InvalidRig, "up parallel to view direction");
    }

    // Orthonormal basis: rows of the world-to-camera rotation.
    // forward = +z in camera space, rightward = +x, true up = +y.
    Mat3 world_to_camera_rotation() const {
        Vec3 f = (target - position).normalized();
        Vec3 r = f.cross(up).normalized();
        Vec3 u = r.cross(f);
        Mat3 m;
        m(0, 0) = r.x; m(0, 1) = r.y; m(0, 2) = r.z;
        m(1, 0) = u.x; m(1, 1) = u.y; m(1, 2) = u.z;
        m(2, 0) = f.x; m(2, 1) = f.y; m(2, 2) = f.z;
        return m;
    }

    Vec3 to_camera_space(const Vec3& p) const {
        return world_to_camera_rotation() * (p - position);
    }

    // Vertical focal length in pixels; pixels are square so fx = fy.
    double focal_px() const { return 0.5 * height / std::tan(0.5 * fov_y); }

    // Projects a camera-space point; caller checks depth (t.z) against near.
    Vec2 camera_to_pixel(const Vec3& t) const {
        double f = focal_px();
        return {0.5 * width + f * t.x / t.z, 0.5 * height - f * t.y / t.z};
    }

    std::optional<Vec2> project_point(const Vec3& world, double* depth_out = nullptr) const {
        Vec3 t = to_camera_space(world);
        if (depth_out) *depth_out = t.z;
        if (t.z <= near) return std::nullopt;
        return camera_to_pixel(t);
    }
};

// Cameras on a sphere around `center`, all looking at it. Ordering is
// elevation-major and fully deterministic. Elevations stay strictly inside
// (-pi/2, pi/2) so the up vector never degenerates at the poles.
inline std::vector<Camera> build_orbital_cameras(const Vec3& center, double radius,
                                                 int n_azimuth, int n_elevation, int resolution,
                                                 double fov_y = 0.9,
                                                 double max_elevation = M_PI / 3.0) {
    if (n_azimuth < 1 || n_elevation < 1)
        throw Error(ErrorCode::InvalidRig, "azimuth/elevation counts must be >= 1");
    if (!(radius > 0.0))
        throw Error(ErrorCode::InvalidRig, "rig radius must be positive");

    std::vector<Camera> rig;
    rig.reserve(static_cast<size_t>(n_azimuth) * static_cast<size_t>(n_elevation));
    for (int ie = 0; ie < n_elevation; ++ie) {
        double phi = 0.0;
        if (n_elevation > 1)
            phi = -max_elevation + 2.0 * max_elevation * ie / (n_elevation - 1);
        for (int ia = 0; ia < n_azimuth; ++ia) {
            double theta = 2.0 * M_PI * ia / n_azimuth;
            Camera cam;
            cam.position = center + radius * Vec3{std::cos(phi) * std::cos(theta), std::sin(phi),
                                                  std::cos(phi) * std::sin(theta)};
            cam.target = center;
            cam.up = {0, 1, 0};
            cam.fov_y = fov_y;
            cam.width = resolution;
            cam.height = resolution;
            cam.near = 0.05 * radius;
            cam.far = 10.0 * radius;
            cam.validate();
            rig.push_back(cam);
        }
    }
    return rig;
}

// Seeded train/test split of rig indices; test set is the tail of the
// shuffle, at least one view when fraction > 0.
struct RigSplit {
    std::vector<int> train;
    std::vector<int> test;
};

inline RigSplit split_rig(size_t n_views, double test_fraction, uint64_t seed) {
    std::vector<int> idx(n_views);
    for (size_t i = 0; i < n_views; ++i) idx[i] = static_cast<int>(i);
    Rng rng(seed ^ 0x5e11'70f5ULL);
    rng.shuffle(idx);
    size_t n_test = 0;
    if (test_fraction > 0.0 && n_views > 1) {
        n_test = static_cast<size_t>(std::llround(test_fraction * static_cast<double>(n_views)));
        n_test = std::min(std::max<size_t>(n_test, 1), n_views - 1);
    }
    RigSplit split;
    split.train.assign(idx.begin(), idx.end() - static_cast<long>(n_test));
    split.test.assign(idx.end() - static_cast<long>(n_test), idx.end());
    return split;
}

} // namespace dsplat

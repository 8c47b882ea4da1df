#pragma once

#include <algorithm>
#include <cmath>

#include "dsplat/error.hpp"
#include "dsplat/gaussian.hpp"
#include "dsplat/pointcloud.hpp"

namespace dsplat {

enum class ScaleRule { Knn, Fixed };

// Mean distance to the k nearest neighbors of each point, brute force.
// Clouds at desk scale are a few thousand points.
inline std::vector<double> knn_mean_distances(const PointCloud& pc, int k) {
    const size_t n = pc.size();
    std::vector<double> out(n, 0.0);
    std::vector<double> dists;
    for (size_t i = 0; i < n; ++i) {
        dists.clear();
        dists.reserve(n - 1);
        for (size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            dists.push_back((pc.points[i].position - pc.points[j].position).norm());
        }
        int kk = std::min<int>(k, static_cast<int>(dists.size()));
        if (kk <= 0) continue;
        std::partial_sort(dists.begin(), dists.begin() + kk, dists.end());
        double sum = 0.0;
        for (int m = 0; m < kk; ++m) sum += dists[static_cast<size_t>(m)];
        out[i] = sum / kk;
    }
    return out;
}

// Median nearest-neighbor spacing of the cloud; the default unit for ghost
// margins and ground-truth splat sizes.
inline double median_nn_spacing(const PointCloud& pc) {
    if (pc.empty()) throw Error(ErrorCode::EmptyCloud, "empty point cloud");
    if (pc.size() == 1) return 1.0;
    std::vector<double> nn = knn_mean_distances(pc, 1);
    std::nth_element(nn.begin(), nn.begin() + static_cast<long>(nn.size() / 2), nn.end());
    return nn[nn.size() / 2];
}

// One isotropic Gaussian per surface point. Initial opacity 0.1; scale from
// neighbor spacing (knn) or a fixed world-unit value.
inline SplatModel seed_gaussians(const PointCloud& pc, ScaleRule rule, int k = 3,
                                 double fixed_scale = 0.01) {
    if (pc.empty()) throw Error(ErrorCode::EmptyCloud, "cannot seed from an empty cloud");

    std::vector<double> scales;
    if (rule == ScaleRule::Knn && pc.size() > 1) {
        scales = knn_mean_distances(pc, k);
    }

    SplatModel model;
    model.gaussians.reserve(pc.size());
    const double opacity = logit(0.1);
    for (size_t i = 0; i < pc.size(); ++i) {
        const SurfacePoint& p = pc.points[i];
        Gaussian3D g;
        g.mu = p.position;
        double s = scales.empty() ? fixed_scale : std::max(scales[i], kMinScale);
        double ls = std::log(s);
        g.log_scale = {ls, ls, ls};
        g.rot = Quat::identity();
        g.opacity_logit = opacity;
        g.color = p.color;
        model.gaussians.push_back(g);
    }
    return model;
}

// Near-opaque fixed-size splats used to render ground-truth images directly
// from the point cloud.
inline SplatModel ground_truth_model(const PointCloud& pc, double scale_world,
                                     double opacity = 0.97) {
    if (pc.empty()) throw Error(ErrorCode::EmptyCloud, "cannot build ground truth from nothing");
    SplatModel model;
    model.gaussians.reserve(pc.size());
    double ls = std::log(std::max(scale_world, kMinScale));
    for (const SurfacePoint& p : pc.points) {
        Gaussian3D g;
        g.mu = p.position;
        g.log_scale = {ls, ls, ls};
        g.rot = Quat::identity();
        g.opacity_logit = logit(opacity);
        g.color = p.color;
        model.gaussians.push_back(g);
    }
    return model;
}

} // namespace dsplat

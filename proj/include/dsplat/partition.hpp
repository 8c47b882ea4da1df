#pragma once

#include <algorithm>
#include <limits>
#include <numeric>

#include "dsplat/error.hpp"
#include "dsplat/gaussian.hpp"
#include "dsplat/pointcloud.hpp"

namespace dsplat {

// One slab of the 1-D decomposition along the cloud's longest axis. The
// owned boxes tile the global AABB exactly; ownership itself is decided by
// the cut planes alone (half-open, outer slabs unbounded), so every point in
// space belongs to exactly one partition and a single-partition merge is the
// identity.
struct Partition {
    int id = 0;
    Aabb owned_box;
    double ghost_margin = 0.0;
    PointCloud owned_points;
    PointCloud ghost_points;
    std::vector<uint32_t> owned_indices;  // into the source cloud
    std::vector<uint32_t> ghost_indices;

    int cut_axis = 0;
    double cut_lo = -std::numeric_limits<double>::infinity();
    double cut_hi = std::numeric_limits<double>::infinity();
};

// Half-open ownership along the cut axis: min-inclusive, max-exclusive,
// outermost slabs open-ended.
inline bool owns(const Partition& p, const Vec3& position) {
    double v = position[p.cut_axis];
    return v >= p.cut_lo && v < p.cut_hi;
}

// Slab decomposition at point-count quantiles along the longest axis.
// Each partition owns the points inside its cut interval and carries all
// foreign points within ghost_margin of its owned box as ghosts.
inline std::vector<Partition> partition_cloud(const PointCloud& pc, int n, double ghost_margin) {
    if (pc.empty()) throw Error(ErrorCode::EmptyCloud, "cannot partition an empty cloud");
    if (n < 1) throw Error(ErrorCode::InvalidArgument, "partition count must be >= 1");
    if (static_cast<size_t>(n) > pc.size())
        throw Error(ErrorCode::InvalidArgument, "more partitions than points");
    if (ghost_margin < 0.0)
        throw Error(ErrorCode::InvalidArgument, "ghost margin must be >= 0");

    Aabb box = pc.bounds();
    int axis = box.longest_axis();

    std::vector<uint32_t> order(pc.size());
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) {
        double va = pc.points[a].position[axis], vb = pc.points[b].position[axis];
        if (va != vb) return va < vb;
        return a < b;
    });

    // Interior cut values at count quantiles; midpoints keep the cut off the
    // data except under ties.
    std::vector<double> cuts;
    for (int k = 1; k < n; ++k) {
        size_t rank = pc.size() * static_cast<size_t>(k) / static_cast<size_t>(n);
        double below = pc.points[order[rank - 1]].position[axis];
        double at = pc.points[order[rank]].position[axis];
        cuts.push_back(0.5 * (below + at));
    }

    const double inf = std::numeric_limits<double>::infinity();
    std::vector<Partition> parts(static_cast<size_t>(n));
    for (int k = 0; k < n; ++k) {
        Partition& p = parts[static_cast<size_t>(k)];
        p.id = k;
        p.ghost_margin = ghost_margin;
        p.cut_axis = axis;
        p.cut_lo = (k == 0) ? -inf : cuts[static_cast<size_t>(k - 1)];
        p.cut_hi = (k == n - 1) ? inf : cuts[static_cast<size_t>(k)];
        p.owned_box = box;
        if (k > 0) p.owned_box.lo[axis] = cuts[static_cast<size_t>(k - 1)];
        if (k < n - 1) p.owned_box.hi[axis] = cuts[static_cast<size_t>(k)];
    }

    for (uint32_t idx = 0; idx < pc.size(); ++idx) {
        const SurfacePoint& pt = pc.points[idx];
        double v = pt.position[axis];
        for (auto& p : parts) {
            if (owns(p, pt.position)) {
                p.owned_points.points.push_back(pt);
                p.owned_indices.push_back(idx);
            } else {
                // Distance to the finite owned interval along the cut axis.
                double lo = p.owned_box.lo[p.cut_axis], hi = p.owned_box.hi[p.cut_axis];
                double dist = v < lo ? lo - v : (v > hi ? v - hi : 0.0);
                if (dist <= ghost_margin) {
                    p.ghost_points.points.push_back(pt);
                    p.ghost_indices.push_back(idx);
                }
            }
        }
    }
    return parts;
}

// Keeps exactly the gaussians whose final position is owned by their origin
// partition: ghost-seeded splats that stayed foreign and splats that drifted
// across a cut are dropped. Output order is (partition id, original index).
inline SplatModel merge_models(const std::vector<SplatModel>& models,
                               const std::vector<Partition>& partitions) {
    if (models.size() != partitions.size())
        throw Error(ErrorCode::MismatchedCounts, "one model per partition required");

    SplatModel merged;
    for (size_t k = 0; k < models.size(); ++k) {
        const SplatModel& m = models[k];
        if (!m.origin_partition.has_value())
            throw Error(ErrorCode::MismatchedCounts, "model missing origin partition id");
        if (*m.origin_partition != partitions[k].id)
            throw Error(ErrorCode::MismatchedCounts, "model/partition id mismatch");
        for (const Gaussian3D& g : m.gaussians)
            if (owns(partitions[k], g.mu)) merged.gaussians.push_back(g);
        merged.iteration = std::max(merged.iteration, m.iteration);
    }
    return merged;
}

} // namespace dsplat

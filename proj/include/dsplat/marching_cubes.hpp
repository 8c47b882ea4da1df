#pragma once

#include <functional>
#include <unordered_map>

#include "dsplat/error.hpp"
#include "dsplat/mc_tables.hpp"
#include "dsplat/pointcloud.hpp"
#include "dsplat/volume.hpp"

namespace dsplat {

// Maps surface position/normal/value to an RGB color for the extracted
// points.
using TransferFunction = std::function<Vec3(const Vec3& position, const Vec3& normal)>;

namespace transfer {

// Normal-based matte shading: two fixed lights on a neutral base with a mild
// normal tint, baked to RGB. Gives ground truth learnable structure.
inline Vec3 normal_matte(const Vec3&, const Vec3& n) {
    Vec3 light1 = Vec3{0.5, 0.7, -0.5}.normalized();
    Vec3 light2 = Vec3{-0.6, 0.2, 0.75}.normalized();
    double lambert = 0.25 + 0.55 * std::abs(n.dot(light1)) + 0.2 * std::abs(n.dot(light2));
    Vec3 base{0.35 + 0.3 * (0.5 + 0.5 * n.x), 0.35 + 0.3 * (0.5 + 0.5 * n.y),
              0.35 + 0.3 * (0.5 + 0.5 * n.z)};
    return {clamp(base.x * lambert, 0.0, 1.0), clamp(base.y * lambert, 0.0, 1.0),
            clamp(base.z * lambert, 0.0, 1.0)};
}

// Height ramp along y, blue to warm.
inline Vec3 height_ramp(const Vec3& p, const Vec3&) {
    double t = clamp(p.y + 0.5, 0.0, 1.0);
    return {0.15 + 0.8 * t, 0.25 + 0.4 * t, 0.9 - 0.7 * t};
}

inline Vec3 flat_gray(const Vec3&, const Vec3&) { return {0.7, 0.7, 0.7}; }

inline TransferFunction by_name(const std::string& name) {
    if (name == "normal") return normal_matte;
    if (name == "height") return height_ramp;
    if (name == "gray") return flat_gray;
    throw Error(ErrorCode::UnknownKind, "unknown transfer function '" + name + "'");
}

} // namespace transfer

// Marching cubes over the voxel grid, emitting one surface point per
// triangle vertex with vertices on shared cell edges deduplicated. Linear
// interpolation along edges; normals from the trilinearly interpolated
// scalar-field gradient.
inline PointCloud extract_isosurface(const Volume& vol, double isovalue,
                                     const TransferFunction& color_map) {
    double lo = vol.min_value(), hi = vol.max_value();
    if (!(isovalue > lo && isovalue < hi))
        throw Error(ErrorCode::IsovalueOutOfRange,
                    "isovalue must lie strictly inside the volume range");

    PointCloud cloud;
    // Unique key per grid edge: base voxel linear index * 3 + axis.
    std::unordered_map<uint64_t, uint32_t> edge_to_point;

    auto edge_key = [&](int x, int y, int z, int axis) {
        return static_cast<uint64_t>(vol.index(x, y, z)) * 3 + static_cast<uint64_t>(axis);
    };

    auto corner_gradient = [&](int x, int y, int z) { return vol.gradient_at(x, y, z); };

    auto emit_edge_point = [&](int cx, int cy, int cz, int edge) -> void {
        const int* c0 = mc::kCornerOffset[mc::kEdgeCorners[edge][0]];
        const int* c1 = mc::kCornerOffset[mc::kEdgeCorners[edge][1]];
        int x0 = cx + c0[0], y0 = cy + c0[1], z0 = cz + c0[2];
        int x1 = cx + c1[0], y1 = cy + c1[1], z1 = cz + c1[2];

        // Canonical grid-edge key from the lexicographically smaller end.
        int axis = (x0 != x1) ? 0 : (y0 != y1 ? 1 : 2);
        int bx = std::min(x0, x1), by = std::min(y0, y1), bz = std::min(z0, z1);
        uint64_t key = edge_key(bx, by, bz, axis);
        if (edge_to_point.count(key)) return;

        double v0 = vol.at(x0, y0, z0), v1 = vol.at(x1, y1, z1);
        double t = (v1 == v0) ? 0.5 : (isovalue - v0) / (v1 - v0);
        t = clamp(t, 0.0, 1.0);

        SurfacePoint pt;
        pt.position = vol.position_of(x0, y0, z0) * (1.0 - t) + vol.position_of(x1, y1, z1) * t;
        Vec3 grad = corner_gradient(x0, y0, z0) * (1.0 - t) + corner_gradient(x1, y1, z1) * t;
        pt.normal = grad.norm() > 0.0 ? grad.normalized() : Vec3{0, 0, 1};
        pt.color = color_map(pt.position, pt.normal);

        edge_to_point.emplace(key, static_cast<uint32_t>(cloud.points.size()));
        cloud.points.push_back(pt);
    };

    for (int z = 0; z + 1 < vol.nz; ++z)
        for (int y = 0; y + 1 < vol.ny; ++y)
            for (int x = 0; x + 1 < vol.nx; ++x) {
                int case_index = 0;
                for (int c = 0; c < 8; ++c) {
                    const int* off = mc::kCornerOffset[c];
                    if (vol.at(x + off[0], y + off[1], z + off[2]) < isovalue)
                        case_index |= (1 << c);
                }
                if (mc::kEdgeTable[case_index] == 0) continue;
                for (int i = 0; mc::kTriTable[case_index][i] != -1; ++i)
                    emit_edge_point(x, y, z, mc::kTriTable[case_index][i]);
            }
    return cloud;
}

inline PointCloud extract_isosurface(const Volume& vol, double isovalue) {
    return extract_isosurface(vol, isovalue, transfer::normal_matte);
}

} // namespace dsplat

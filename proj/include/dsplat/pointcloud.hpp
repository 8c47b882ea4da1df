#pragma once

#include <vector>

#include "dsplat/math.hpp"

namespace dsplat {

struct SurfacePoint {
    Vec3 position;
    Vec3 color;   // RGB in [0, 1]
    Vec3 normal;  // unit length
};

struct PointCloud {
    std::vector<SurfacePoint> points;

    size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }

    Aabb bounds() const {
        Aabb box;
        if (points.empty()) return box;
        box.lo = box.hi = points.front().position;
        for (const auto& p : points) box.expand(p.position);
        return box;
    }

    std::vector<Vec3> positions() const {
        std::vector<Vec3> out;
        out.reserve(points.size());
        for (const auto& p : points) out.push_back(p.position);
        return out;
    }
};

} // namespace dsplat

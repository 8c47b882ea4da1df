#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "dsplat/error.hpp"
#include "dsplat/math.hpp"
#include "dsplat/rng.hpp"

namespace dsplat {

// Regular scalar grid. Values are sampled at voxel centers spaced `spacing`
// world units apart, with voxel (0,0,0) at `origin`.
struct Volume {
    int nx = 0, ny = 0, nz = 0;
    double spacing = 1.0;
    Vec3 origin{0, 0, 0};
    std::vector<double> values;

    size_t index(int x, int y, int z) const {
        return (static_cast<size_t>(z) * static_cast<size_t>(ny) + static_cast<size_t>(y)) *
                   static_cast<size_t>(nx) +
               static_cast<size_t>(x);
    }
    double at(int x, int y, int z) const { return values[index(x, y, z)]; }
    double& at(int x, int y, int z) { return values[index(x, y, z)]; }

    Vec3 position_of(int x, int y, int z) const {
        return origin + Vec3{static_cast<double>(x), static_cast<double>(y),
                             static_cast<double>(z)} *
                            spacing;
    }

    // Central differences inside, one-sided at the borders.
    Vec3 gradient_at(int x, int y, int z) const {
        auto diff = [&](int axis) {
            int lo[3] = {x, y, z}, hi[3] = {x, y, z};
            int n[3] = {nx, ny, nz};
            hi[axis] = std::min(hi[axis] + 1, n[axis] - 1);
            lo[axis] = std::max(lo[axis] - 1, 0);
            double dv = at(hi[0], hi[1], hi[2]) - at(lo[0], lo[1], lo[2]);
            return dv / (spacing * (hi[axis] - lo[axis] == 0 ? 1 : hi[axis] - lo[axis]));
        };
        return {diff(0), diff(1), diff(2)};
    }

    double min_value() const {
        double m = values.empty() ? 0.0 : values[0];
        for (double v : values) m = std::min(m, v);
        return m;
    }
    double max_value() const {
        double m = values.empty() ? 0.0 : values[0];
        for (double v : values) m = std::max(m, v);
        return m;
    }
};

enum class VolumeKind { Sphere, Gyroid, TwoBlob };

inline VolumeKind volume_kind_from_string(const std::string& s) {
    if (s == "sphere") return VolumeKind::Sphere;
    if (s == "gyroid") return VolumeKind::Gyroid;
    if (s == "two-blob") return VolumeKind::TwoBlob;
    throw Error(ErrorCode::UnknownKind, "unknown volume kind '" + s + "'");
}

inline const char* volume_kind_name(VolumeKind k) {
    switch (k) {
        case VolumeKind::Sphere: return "sphere";
        case VolumeKind::Gyroid: return "gyroid";
        case VolumeKind::TwoBlob: return "two-blob";
    }
    return "?";
}

// Suggested extraction isovalue per kind; fields below are scaled so the
// longest axis spans one world unit.
inline double default_isovalue(VolumeKind k) {
    switch (k) {
        case VolumeKind::Sphere: return 0.35;
        case VolumeKind::Gyroid: return 0.0;
        case VolumeKind::TwoBlob: return 0.30;
    }
    return 0.0;
}

// Synthetic analytic volumes standing in for real simulation data at desk
// scale. Deterministic for a fixed seed: noise is a pure hash of
// (seed, voxel index).
//
//   sphere   — distance to the volume center; isosurface at r is a sphere.
//   gyroid   — triply periodic minimal-surface field, isovalue 0.
//   two-blob — distance to the nearer of two offset centers; at the default
//              isovalue the lobes overlap into a single waisted surface that
//              straddles the x = 0 plane.
inline Volume make_volume(VolumeKind kind, int nx, int ny, int nz, double noise_amplitude,
                          uint64_t seed) {
    if (nx < 8 || ny < 8 || nz < 8)
        throw Error(ErrorCode::InvalidArgument, "volume dims must be >= 8 per axis");

    Volume vol;
    vol.nx = nx;
    vol.ny = ny;
    vol.nz = nz;
    int max_dim = std::max(nx, std::max(ny, nz));
    vol.spacing = 1.0 / (max_dim - 1);
    vol.origin = Vec3{-0.5 * (nx - 1), -0.5 * (ny - 1), -0.5 * (nz - 1)} * vol.spacing;
    vol.values.resize(static_cast<size_t>(nx) * static_cast<size_t>(ny) *
                      static_cast<size_t>(nz));

    for (int z = 0; z < nz; ++z)
        for (int y = 0; y < ny; ++y)
            for (int x = 0; x < nx; ++x) {
                Vec3 p = vol.position_of(x, y, z);
                double v = 0.0;
                switch (kind) {
                    case VolumeKind::Sphere:
                        v = p.norm();
                        break;
                    case VolumeKind::Gyroid: {
                        double k = 3.0 * M_PI;
                        v = std::sin(k * p.x) * std::cos(k * p.y) +
                            std::sin(k * p.y) * std::cos(k * p.z) +
                            std::sin(k * p.z) * std::cos(k * p.x);
                        break;
                    }
                    case VolumeKind::TwoBlob: {
                        double d1 = (p - Vec3{0.22, 0, 0}).norm();
                        double d2 = (p - Vec3{-0.22, 0, 0}).norm();
                        v = std::min(d1, d2);
                        break;
                    }
                }
                if (noise_amplitude != 0.0) {
                    uint64_t h = hash_combine(seed, vol.index(x, y, z));
                    double u = static_cast<double>(h >> 11) * 0x1.0p-53;  // [0, 1)
                    v += noise_amplitude * (2.0 * u - 1.0);
                }
                vol.at(x, y, z) = v;
            }
    return vol;
}

} // namespace dsplat

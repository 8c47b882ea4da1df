#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "dsplat/camera.hpp"
#include "dsplat/error.hpp"
#include "dsplat/image.hpp"
#include "dsplat/ssim.hpp"

namespace dsplat {

// Sentinel reported instead of infinity when images are identical; keeps
// tables finite and sortable.
inline constexpr double kPsnrCap = 99.0;

inline double psnr(const Image& a, const Image& b) {
    a.require_same_shape(b);
    double mse = 0.0;
    for (size_t i = 0; i < a.pixels.size(); ++i) {
        double d = a.pixels[i] - b.pixels[i];
        mse += d * d;
    }
    mse /= static_cast<double>(a.pixels.size());
    if (mse <= 0.0) return kPsnrCap;
    return std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse));
}

// Mean windowed SSIM, 11x11 Gaussian window, sigma 1.5, on [0, 1] range.
inline double ssim(const Image& a, const Image& b) {
    a.require_same_shape(b);
    if (a.width < kSsimWindow || a.height < kSsimWindow)
        throw Error(ErrorCode::TooSmall, "images must be at least 11 px per side");
    return ssim_core(a, b, nullptr, nullptr).mean;
}

struct BandError {
    double band_mae = 0.0;
    double interior_mae = 0.0;
    double ratio = 1.0;
};

// Error concentration around partition boundaries: MAE inside the band mask
// versus the rest of the foreground. ratio 1.0 by convention when both are
// zero.
inline BandError boundary_band_error(const Image& rendered, const Image& truth,
                                     const Image& band_mask, const Image* foreground = nullptr) {
    rendered.require_same_shape(truth);
    if (band_mask.width != rendered.width || band_mask.height != rendered.height ||
        band_mask.channels != 1)
        throw Error(ErrorCode::DimensionMismatch, "band mask must be 1-channel at image size");
    if (foreground &&
        (foreground->width != rendered.width || foreground->height != rendered.height))
        throw Error(ErrorCode::DimensionMismatch, "foreground mask size mismatch");

    double band_sum = 0.0, interior_sum = 0.0;
    size_t band_count = 0, interior_count = 0;
    for (int y = 0; y < rendered.height; ++y)
        for (int x = 0; x < rendered.width; ++x) {
            if (foreground && foreground->at(x, y) < 0.5) continue;
            double err = 0.0;
            for (int c = 0; c < rendered.channels; ++c)
                err += std::abs(rendered.at(x, y, c) - truth.at(x, y, c));
            err /= rendered.channels;
            if (band_mask.at(x, y) >= 0.5) {
                band_sum += err;
                ++band_count;
            } else {
                interior_sum += err;
                ++interior_count;
            }
        }
    if (band_count == 0) throw Error(ErrorCode::EmptyBand, "band mask selects no pixels");
    if (interior_count == 0)
        throw Error(ErrorCode::EmptyInterior, "band mask leaves no interior pixels");

    BandError be;
    be.band_mae = band_sum / static_cast<double>(band_count);
    be.interior_mae = interior_sum / static_cast<double>(interior_count);
    if (be.band_mae == 0.0 && be.interior_mae == 0.0)
        be.ratio = 1.0;
    else if (be.interior_mae == 0.0)
        be.ratio = std::numeric_limits<double>::infinity();
    else
        be.ratio = be.band_mae / be.interior_mae;
    return be;
}

namespace detail {

inline double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
    Vec2 ab = b - a;
    double len_sq = ab.dot(ab);
    double t = len_sq > 0.0 ? clamp((p - a).dot(ab) / len_sq, 0.0, 1.0) : 0.0;
    Vec2 nearest = a + ab * t;
    return (p - nearest).norm();
}

} // namespace detail

// Marks pixels within band_px of the projection of the cut plane
// {position[axis] = value} clipped to the cloud bounds. With all corners in
// front of the camera the projected rectangle is a convex quad, so the
// pixel distance to it is exact: zero inside, else distance to the nearest
// edge segment.
inline Image boundary_band_mask(const Camera& cam, int axis, double value, const Aabb& bounds,
                                double band_px) {
    Image mask(cam.width, cam.height, 1, 0.0);
    int u_axis = (axis + 1) % 3, v_axis = (axis + 2) % 3;

    std::array<Vec2, 4> quad;
    const double us[4] = {bounds.lo[u_axis], bounds.hi[u_axis], bounds.hi[u_axis],
                          bounds.lo[u_axis]};
    const double vs[4] = {bounds.lo[v_axis], bounds.lo[v_axis], bounds.hi[v_axis],
                          bounds.hi[v_axis]};
    for (int i = 0; i < 4; ++i) {
        Vec3 p;
        p[axis] = value;
        p[u_axis] = us[i];
        p[v_axis] = vs[i];
        auto proj = cam.project_point(p);
        if (!proj)
            throw Error(ErrorCode::InvalidArgument,
                        "cut plane corner behind camera; move the camera back");
        quad[static_cast<size_t>(i)] = *proj;
    }

    for (int y = 0; y < cam.height; ++y)
        for (int x = 0; x < cam.width; ++x) {
            Vec2 p{x + 0.5, y + 0.5};
            // Inside test: consistent sign of cross products around the quad.
            int pos = 0, neg = 0;
            for (int i = 0; i < 4; ++i) {
                Vec2 a = quad[static_cast<size_t>(i)];
                Vec2 b = quad[static_cast<size_t>((i + 1) % 4)];
                double cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
                (cross >= 0 ? pos : neg)++;
            }
            double dist;
            if (pos == 4 || neg == 4) {
                dist = 0.0;
            } else {
                dist = std::numeric_limits<double>::infinity();
                for (int i = 0; i < 4; ++i)
                    dist = std::min(dist, detail::point_segment_distance(
                                              p, quad[static_cast<size_t>(i)],
                                              quad[static_cast<size_t>((i + 1) % 4)]));
            }
            if (dist <= band_px) mask.at(x, y) = 1.0;
        }
    return mask;
}

struct ViewEval {
    int view_index = 0;
    double psnr = 0.0;
    double ssim = 0.0;
};

struct EvalResult {
    double psnr = 0.0;  // mean over views
    double ssim = 0.0;
    std::vector<ViewEval> per_view;
};

} // namespace dsplat

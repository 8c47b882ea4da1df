#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "dsplat/camera.hpp"
#include "dsplat/error.hpp"
#include "dsplat/gaussian.hpp"
#include "dsplat/image.hpp"
#include "dsplat/projection.hpp"

namespace dsplat {

// Alpha is capped below 1 so (1 - alpha) never reaches zero in the
// compositing chain or its adjoint.
inline constexpr double kAlphaMax = 0.999;

struct RenderConfig {
    int tile_size = 16;                 // positive power of two
    double alpha_cutoff = 1.0 / 255.0;  // minimum per-splat contribution
    double sigma_cutoff = 3.0;          // footprint radius in standard deviations
    Vec3 background{1.0, 1.0, 1.0};
    double transmittance_floor = 1e-4;  // early termination threshold

    void validate() const {
        if (tile_size <= 0 || (tile_size & (tile_size - 1)) != 0)
            throw Error(ErrorCode::InvalidArgument, "tile_size must be a positive power of two");
        if (!(alpha_cutoff > 0.0 && alpha_cutoff < 1.0))
            throw Error(ErrorCode::InvalidArgument, "alpha_cutoff outside (0, 1)");
        if (!(sigma_cutoff >= 1.0 && sigma_cutoff <= 6.0))
            throw Error(ErrorCode::InvalidArgument, "sigma_cutoff outside [1, 6]");
    }
};

struct RenderOutput {
    Image color;  // RGB
    Image alpha;  // 1 channel, accumulated opacity
    std::vector<int32_t> per_pixel_contributor_count;
    std::vector<int32_t> splat_order;  // gaussian indices, depth-ascending
    int64_t model_iteration = 0;
};

namespace detail {

// Per-splat screen-space data shared by the forward and backward passes.
// Both passes must derive identical values here, so this is the single
// projection path for both.
struct PreparedSplat {
    Vec2 mean2d;
    Mat2Sym inv_cov2d;
    double opacity = 0.0;  // sigmoid(opacity_logit)
    Vec3 color;
    double depth = 0.0;
    int32_t index = -1;  // index into model.gaussians
    int x0 = 0, x1 = 0, y0 = 0, y1 = 0;  // inclusive pixel bbox
};

// Projects and culls, then depth-sorts (ties broken by ascending gaussian
// index). The returned list is in compositing order.
inline std::vector<PreparedSplat> prepare_splats(const SplatModel& model, const Camera& cam,
                                                 const RenderConfig& cfg) {
    std::vector<PreparedSplat> prepared;
    prepared.reserve(model.size());
    const int w = cam.width, h = cam.height;
    for (size_t i = 0; i < model.gaussians.size(); ++i) {
        const Gaussian3D& g = model.gaussians[i];
        auto proj = try_project(g, cam);
        if (!proj) continue;
        double rx = cfg.sigma_cutoff * std::sqrt(proj->cov2d.xx);
        double ry = cfg.sigma_cutoff * std::sqrt(proj->cov2d.yy);
        // Pixels whose centers fall inside the footprint box.
        int x0 = static_cast<int>(std::ceil(proj->mean2d.x - rx - 0.5));
        int x1 = static_cast<int>(std::floor(proj->mean2d.x + rx - 0.5));
        int y0 = static_cast<int>(std::ceil(proj->mean2d.y - ry - 0.5));
        int y1 = static_cast<int>(std::floor(proj->mean2d.y + ry - 0.5));
        x0 = std::max(x0, 0);
        y0 = std::max(y0, 0);
        x1 = std::min(x1, w - 1);
        y1 = std::min(y1, h - 1);
        if (x0 > x1 || y0 > y1) continue;
        if (proj->cov2d.det() <= 0.0) continue;

        PreparedSplat p;
        p.mean2d = proj->mean2d;
        p.inv_cov2d = proj->cov2d.inverse();
        p.opacity = g.opacity();
        p.color = g.color;
        p.depth = proj->depth;
        p.index = static_cast<int32_t>(i);
        p.x0 = x0;
        p.x1 = x1;
        p.y0 = y0;
        p.y1 = y1;
        prepared.push_back(p);
    }
    std::sort(prepared.begin(), prepared.end(), [](const PreparedSplat& a, const PreparedSplat& b) {
        if (a.depth != b.depth) return a.depth < b.depth;
        return a.index < b.index;
    });
    return prepared;
}

// Tile bins hold positions into the prepared (sorted) list, so each bin is
// itself in compositing order.
struct TileBins {
    int tiles_x = 0, tiles_y = 0, tile_size = 0;
    std::vector<std::vector<int32_t>> bins;

    const std::vector<int32_t>& bin_for_pixel(int x, int y) const {
        return bins[static_cast<size_t>(y / tile_size) * static_cast<size_t>(tiles_x) +
                    static_cast<size_t>(x / tile_size)];
    }
};

inline TileBins bin_splats(const std::vector<PreparedSplat>& prepared, int width, int height,
                           int tile_size) {
    TileBins tb;
    tb.tile_size = tile_size;
    tb.tiles_x = (width + tile_size - 1) / tile_size;
    tb.tiles_y = (height + tile_size - 1) / tile_size;
    tb.bins.resize(static_cast<size_t>(tb.tiles_x) * static_cast<size_t>(tb.tiles_y));
    for (size_t pos = 0; pos < prepared.size(); ++pos) {
        const PreparedSplat& p = prepared[pos];
        int tx0 = p.x0 / tile_size, tx1 = p.x1 / tile_size;
        int ty0 = p.y0 / tile_size, ty1 = p.y1 / tile_size;
        for (int ty = ty0; ty <= ty1; ++ty)
            for (int tx = tx0; tx <= tx1; ++tx)
                tb.bins[static_cast<size_t>(ty) * static_cast<size_t>(tb.tiles_x) +
                        static_cast<size_t>(tx)]
                    .push_back(static_cast<int32_t>(pos));
    }
    return tb;
}

// Whether the splat contributes at pixel center (px, py), and with what
// alpha. The test is purely local (Mahalanobis ellipse + alpha cutoff), so
// the composited sequence per pixel does not depend on tiling.
inline bool splat_alpha_at(const PreparedSplat& p, double px, double py, double sigma_cutoff_sq,
                           double alpha_cutoff, double* alpha_out, double* gauss_out = nullptr) {
    double dx = px - p.mean2d.x;
    double dy = py - p.mean2d.y;
    double q = p.inv_cov2d.xx * dx * dx + 2.0 * p.inv_cov2d.xy * dx * dy +
               p.inv_cov2d.yy * dy * dy;
    if (q > sigma_cutoff_sq) return false;
    double g = std::exp(-0.5 * q);
    double alpha = p.opacity * g;
    if (alpha > kAlphaMax) alpha = kAlphaMax;
    if (alpha < alpha_cutoff) return false;
    *alpha_out = alpha;
    if (gauss_out) *gauss_out = g;
    return true;
}

} // namespace detail

// Front-to-back alpha compositing of the whole model. Pure function;
// bit-identical for identical inputs regardless of tile_size.
inline RenderOutput render(const SplatModel& model, const Camera& cam, const RenderConfig& cfg) {
    cfg.validate();
    cam.validate();
    const int w = cam.width, h = cam.height;

    RenderOutput out;
    out.color = Image::rgb(w, h, cfg.background);
    out.alpha = Image(w, h, 1, 0.0);
    out.per_pixel_contributor_count.assign(static_cast<size_t>(w) * static_cast<size_t>(h), 0);
    out.model_iteration = model.iteration;

    auto prepared = detail::prepare_splats(model, cam, cfg);
    out.splat_order.reserve(prepared.size());
    for (const auto& p : prepared) out.splat_order.push_back(p.index);
    if (prepared.empty()) return out;

    auto bins = detail::bin_splats(prepared, w, h, cfg.tile_size);
    const double sigma_sq = cfg.sigma_cutoff * cfg.sigma_cutoff;

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const auto& bin = bins.bin_for_pixel(x, y);
            double px = x + 0.5, py = y + 0.5;
            double transmittance = 1.0;
            Vec3 acc{0, 0, 0};
            int32_t contributors = 0;
            for (int32_t pos : bin) {
                const detail::PreparedSplat& p = prepared[static_cast<size_t>(pos)];
                double alpha;
                if (!detail::splat_alpha_at(p, px, py, sigma_sq, cfg.alpha_cutoff, &alpha))
                    continue;
                acc += p.color * (alpha * transmittance);
                ++contributors;
                transmittance *= (1.0 - alpha);
                if (transmittance < cfg.transmittance_floor) break;
            }
            if (contributors > 0) {
                out.color.set_rgb(x, y, acc + cfg.background * transmittance);
                out.alpha.at(x, y) = 1.0 - transmittance;
                out.per_pixel_contributor_count[static_cast<size_t>(y) * static_cast<size_t>(w) +
                                                static_cast<size_t>(x)] = contributors;
            }
        }
    }
    return out;
}

// Binary coverage mask from raw point projections. Masks exist before any
// splats are trained, so this is geometry-only: pixel = 1 iff its center is
// within footprint_px + dilation_px of some projected point.
inline Image render_mask(const std::vector<Vec3>& points, const Camera& cam, double footprint_px,
                         double dilation_px) {
    if (footprint_px < 0.5)
        throw Error(ErrorCode::InvalidArgument, "footprint_px must be >= 0.5");
    cam.validate();
    Image mask(cam.width, cam.height, 1, 0.0);
    const double radius = footprint_px + dilation_px;
    const double radius_sq = radius * radius;
    for (const Vec3& pt : points) {
        auto proj = cam.project_point(pt);
        if (!proj) continue;
        int x0 = std::max(0, static_cast<int>(std::ceil(proj->x - radius - 0.5)));
        int x1 = std::min(cam.width - 1, static_cast<int>(std::floor(proj->x + radius - 0.5)));
        int y0 = std::max(0, static_cast<int>(std::ceil(proj->y - radius - 0.5)));
        int y1 = std::min(cam.height - 1, static_cast<int>(std::floor(proj->y + radius - 0.5)));
        for (int y = y0; y <= y1; ++y)
            for (int x = x0; x <= x1; ++x) {
                double dx = x + 0.5 - proj->x;
                double dy = y + 0.5 - proj->y;
                if (dx * dx + dy * dy <= radius_sq) mask.at(x, y) = 1.0;
            }
    }
    return mask;
}

} // namespace dsplat

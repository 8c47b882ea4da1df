#pragma once

#include <array>
#include <cmath>

#include "dsplat/image.hpp"

namespace dsplat {

inline constexpr int kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;
inline constexpr double kSsimC1 = 0.01 * 0.01;  // on [0, 1] range
inline constexpr double kSsimC2 = 0.03 * 0.03;

namespace detail {

inline const std::array<double, kSsimWindow * kSsimWindow>& ssim_weights() {
    static const auto weights = [] {
        std::array<double, kSsimWindow * kSsimWindow> w{};
        const int r = kSsimWindow / 2;
        double sum = 0.0;
        for (int dy = -r; dy <= r; ++dy)
            for (int dx = -r; dx <= r; ++dx) {
                double v = std::exp(-(dx * dx + dy * dy) / (2.0 * kSsimSigma * kSsimSigma));
                w[static_cast<size_t>((dy + r) * kSsimWindow + (dx + r))] = v;
                sum += v;
            }
        for (auto& v : w) v /= sum;
        return w;
    }();
    return weights;
}

} // namespace detail

struct SsimStats {
    double mean = 0.0;      // mean per-window SSIM over included windows
    size_t n_samples = 0;   // included (window, channel) pairs
};

// Windowed SSIM over "valid" window centers (the 11x11 window fully inside
// the image). When `mask` is given, a window is included iff its center
// pixel is masked in, and both images are read zero-filled outside the mask;
// masked-out pixels therefore never influence the value or the gradient.
//
// When `grad_a` is non-null, grad_scale * d(mean ssim)/d(a) is accumulated
// into it (only at masked-in pixels).
inline SsimStats ssim_core(const Image& a, const Image& b, const Image* mask, Image* grad_a,
                           double grad_scale = 1.0) {
    a.require_same_shape(b);
    const int r = kSsimWindow / 2;
    const auto& w = detail::ssim_weights();

    SsimStats stats;
    if (a.width < kSsimWindow || a.height < kSsimWindow) return stats;

    auto masked_in = [&](int x, int y) {
        return mask == nullptr || mask->at(x, y) >= 0.5;
    };

    // Count first so the gradient can be scaled by 1/n in a single pass.
    size_t n_centers = 0;
    for (int cy = r; cy < a.height - r; ++cy)
        for (int cx = r; cx < a.width - r; ++cx)
            if (masked_in(cx, cy)) ++n_centers;
    if (n_centers == 0) return stats;
    stats.n_samples = n_centers * static_cast<size_t>(a.channels);
    const double inv_n = 1.0 / static_cast<double>(stats.n_samples);

    double total = 0.0;
    for (int cy = r; cy < a.height - r; ++cy) {
        for (int cx = r; cx < a.width - r; ++cx) {
            if (!masked_in(cx, cy)) continue;
            for (int ch = 0; ch < a.channels; ++ch) {
                double mu_x = 0, mu_y = 0, xx = 0, yy = 0, xy = 0;
                for (int dy = -r; dy <= r; ++dy)
                    for (int dx = -r; dx <= r; ++dx) {
                        double wi = w[static_cast<size_t>((dy + r) * kSsimWindow + (dx + r))];
                        double in = masked_in(cx + dx, cy + dy) ? 1.0 : 0.0;
                        double xv = a.at(cx + dx, cy + dy, ch) * in;
                        double yv = b.at(cx + dx, cy + dy, ch) * in;
                        mu_x += wi * xv;
                        mu_y += wi * yv;
                        xx += wi * (xv * xv);
                        yy += wi * (yv * yv);
                        // parenthesized so swapping the images is bit-exact
                        xy += wi * (xv * yv);
                    }
                double var_x = xx - mu_x * mu_x;
                double var_y = yy - mu_y * mu_y;
                double cov = xy - mu_x * mu_y;

                double a1 = 2.0 * (mu_x * mu_y) + kSsimC1;
                double b1 = mu_x * mu_x + mu_y * mu_y + kSsimC1;
                double a2 = 2.0 * cov + kSsimC2;
                double b2 = var_x + var_y + kSsimC2;
                double ssim = (a1 * a2) / (b1 * b2);
                total += ssim;

                if (grad_a) {
                    double inv_b1b2 = 1.0 / (b1 * b2);
                    double coeff = grad_scale * inv_n;
                    for (int dy = -r; dy <= r; ++dy)
                        for (int dx = -r; dx <= r; ++dx) {
                            if (!masked_in(cx + dx, cy + dy)) continue;
                            double wi = w[static_cast<size_t>((dy + r) * kSsimWindow + (dx + r))];
                            double xv = a.at(cx + dx, cy + dy, ch);
                            double yv = b.at(cx + dx, cy + dy, ch);
                            // d ssim / d x_i for weighted window stats.
                            double d = 2.0 * wi *
                                       ((mu_y * a2 + (yv - mu_y) * a1) * inv_b1b2 -
                                        ssim * (mu_x / b1 + (xv - mu_x) / b2));
                            grad_a->at(cx + dx, cy + dy, ch) += coeff * d;
                        }
                }
            }
        }
    }
    stats.mean = total * inv_n;
    return stats;
}

} // namespace dsplat

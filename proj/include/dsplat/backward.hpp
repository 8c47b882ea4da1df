#pragma once

#include <cmath>
#include <thread>
#include <vector>

#include "dsplat/gradient.hpp"
#include "dsplat/render.hpp"

namespace dsplat {

namespace detail {

// Full (non-symmetric) 2x2 accumulator used while chaining through the
// inverse-covariance; symmetrized terms land in both off-diagonal slots.
struct M2 {
    double a = 0, b = 0, c = 0, d = 0;  // row-major [[a, b], [c, d]]
};

// Screen-space gradient accumulators for one splat.
struct ScreenGrad {
    Vec2 g_mean2d{};
    M2 g_inv_cov{};          // dL/d(inv cov2d), full 2x2
    Vec3 g_color{};
    double g_alpha_pre = 0;  // dL/d(opacity * gaussian), pre-clamp

    void add(const ScreenGrad& o) {
        g_mean2d = g_mean2d + o.g_mean2d;
        g_inv_cov.a += o.g_inv_cov.a;
        g_inv_cov.b += o.g_inv_cov.b;
        g_inv_cov.c += o.g_inv_cov.c;
        g_inv_cov.d += o.g_inv_cov.d;
        g_color += o.g_color;
        g_alpha_pre += o.g_alpha_pre;
    }
};

// Sparse per-row screen gradients: (position in the prepared list, grads),
// emitted in ascending position order.
using RowGrads = std::vector<std::pair<int32_t, ScreenGrad>>;

// d(rotation matrix)/d(quaternion component), unit quaternion (w, x, y, z).
inline Mat3 quat_rotation_derivative(const Quat& q, int component) {
    double w = q.w, x = q.x, y = q.y, z = q.z;
    Mat3 m = Mat3::zero();
    switch (component) {
        case 0:  // d/dw
            m(0, 1) = -2 * z; m(0, 2) = 2 * y;
            m(1, 0) = 2 * z;  m(1, 2) = -2 * x;
            m(2, 0) = -2 * y; m(2, 1) = 2 * x;
            break;
        case 1:  // d/dx
            m(0, 1) = 2 * y;  m(0, 2) = 2 * z;
            m(1, 0) = 2 * y;  m(1, 1) = -4 * x; m(1, 2) = -2 * w;
            m(2, 0) = 2 * z;  m(2, 1) = 2 * w;  m(2, 2) = -4 * x;
            break;
        case 2:  // d/dy
            m(0, 0) = -4 * y; m(0, 1) = 2 * x;  m(0, 2) = 2 * w;
            m(1, 0) = 2 * x;  m(1, 2) = 2 * z;
            m(2, 0) = -2 * w; m(2, 1) = 2 * z;  m(2, 2) = -4 * y;
            break;
        default:  // d/dz
            m(0, 0) = -4 * z; m(0, 1) = -2 * w; m(0, 2) = 2 * x;
            m(1, 0) = 2 * w;  m(1, 1) = -4 * z; m(1, 2) = 2 * y;
            m(2, 0) = 2 * x;  m(2, 1) = 2 * y;
            break;
    }
    return m;
}

// Screen-space adjoint over rows [row_begin, row_end). Each row's subtotals
// are self-contained, so any contiguous banding reproduces identical
// per-row results regardless of how rows are grouped into bands.
//
// The per-pixel walk mirrors render() decision-for-decision: skipped and
// terminated contributions carry exactly zero gradient.
inline std::vector<RowGrads> backward_screen_rows(
    const std::vector<PreparedSplat>& prepared, const TileBins& bins, const Camera& cam,
    const RenderConfig& cfg, const Image& dL_dpixels, int row_begin, int row_end) {
    const double sigma_sq = cfg.sigma_cutoff * cfg.sigma_cutoff;

    std::vector<RowGrads> rows;
    rows.reserve(static_cast<size_t>(row_end - row_begin));

    std::vector<ScreenGrad> acc(prepared.size());
    std::vector<uint8_t> in_row(prepared.size(), 0);
    std::vector<int32_t> touched;
    touched.reserve(prepared.size());

    struct Contribution {
        int32_t pos;
        double alpha;
        double transmittance;  // before this contribution
        double gauss;
    };
    std::vector<Contribution> stack;
    stack.reserve(256);

    for (int y = row_begin; y < row_end; ++y) {
        touched.clear();
        for (int x = 0; x < cam.width; ++x) {
            const auto& bin = bins.bin_for_pixel(x, y);
            if (bin.empty()) continue;
            double px = x + 0.5, py = y + 0.5;

            // Forward replay, recording the composited prefix.
            stack.clear();
            double transmittance = 1.0;
            for (int32_t pos : bin) {
                const PreparedSplat& p = prepared[static_cast<size_t>(pos)];
                double alpha, gauss;
                if (!splat_alpha_at(p, px, py, sigma_sq, cfg.alpha_cutoff, &alpha, &gauss))
                    continue;
                stack.push_back({pos, alpha, transmittance, gauss});
                transmittance *= (1.0 - alpha);
                if (transmittance < cfg.transmittance_floor) break;
            }
            if (stack.empty()) continue;

            Vec3 w{dL_dpixels.at(x, y, 0), dL_dpixels.at(x, y, 1), dL_dpixels.at(x, y, 2)};

            // Walk back to front. `behind` is everything composited behind
            // the current contribution, background included.
            Vec3 behind = cfg.background * transmittance;
            for (size_t k = stack.size(); k-- > 0;) {
                const Contribution& c = stack[k];
                const PreparedSplat& p = prepared[static_cast<size_t>(c.pos)];
                ScreenGrad& a = acc[static_cast<size_t>(c.pos)];
                if (!in_row[static_cast<size_t>(c.pos)]) {
                    in_row[static_cast<size_t>(c.pos)] = 1;
                    touched.push_back(c.pos);
                }

                double weight = c.alpha * c.transmittance;
                a.g_color += w * weight;

                // d pixel / d alpha = T_i * c_i - behind / (1 - alpha_i)
                double inv_one_minus = 1.0 / (1.0 - c.alpha);
                double g_alpha = w.dot(p.color * c.transmittance - behind * inv_one_minus);

                // Through the clamp: flat above kAlphaMax.
                if (p.opacity * c.gauss <= kAlphaMax) {
                    a.g_alpha_pre += g_alpha * c.gauss;  // d alpha / d opacity = gauss

                    double g_gauss = g_alpha * p.opacity;
                    double g_q = -0.5 * c.gauss * g_gauss;
                    double dx = px - p.mean2d.x;
                    double dy = py - p.mean2d.y;
                    Vec2 md = p.inv_cov2d * Vec2{dx, dy};
                    // q = d^T M d with d = pixel - mean2d.
                    a.g_mean2d = a.g_mean2d + md * (-2.0 * g_q);
                    a.g_inv_cov.a += g_q * dx * dx;
                    a.g_inv_cov.b += g_q * dx * dy;
                    a.g_inv_cov.c += g_q * dy * dx;
                    a.g_inv_cov.d += g_q * dy * dy;
                }

                behind = behind + p.color * weight;
            }
        }

        // Flush this row's subtotals in canonical (ascending position) order.
        std::sort(touched.begin(), touched.end());
        RowGrads row;
        row.reserve(touched.size());
        for (int32_t pos : touched) {
            row.emplace_back(pos, acc[static_cast<size_t>(pos)]);
            acc[static_cast<size_t>(pos)] = ScreenGrad{};
            in_row[static_cast<size_t>(pos)] = 0;
        }
        rows.push_back(std::move(row));
        touched.clear();
    }
    return rows;
}

} // namespace detail

// Adjoint of render(). When shards > 1, the pixel rows are split into
// contiguous bands whose screen-space passes run concurrently; per-row
// subtotals are then folded in ascending row order and chained to the 3D
// parameters once, so the result is bit-identical for every shard count and
// independent of thread scheduling.
inline GradientBuffer backward(const SplatModel& model, const Camera& cam, const RenderConfig& cfg,
                               const RenderOutput& output, const Image& dL_dpixels,
                               int shards = 1) {
    if (output.model_iteration != model.iteration)
        throw Error(ErrorCode::StaleForward, "render output is from a different model iteration");
    if (dL_dpixels.width != cam.width || dL_dpixels.height != cam.height ||
        dL_dpixels.channels != 3)
        throw Error(ErrorCode::DimensionMismatch, "dL_dpixels must be RGB at camera resolution");
    if (shards < 1) throw Error(ErrorCode::InvalidArgument, "shards must be >= 1");

    GradientBuffer grads(model.size());
    auto prepared = detail::prepare_splats(model, cam, cfg);
    if (prepared.empty()) return grads;
    auto bins = detail::bin_splats(prepared, cam.width, cam.height, cfg.tile_size);

    const int rows = cam.height;
    const int n_bands = std::min(shards, rows);
    std::vector<std::vector<detail::RowGrads>> bands(static_cast<size_t>(n_bands));
    if (n_bands == 1) {
        bands[0] = detail::backward_screen_rows(prepared, bins, cam, cfg, dL_dpixels, 0, rows);
    } else {
        std::vector<std::thread> threads;
        int rows_per = (rows + n_bands - 1) / n_bands;
        for (int b = 0; b < n_bands; ++b) {
            int r0 = b * rows_per;
            int r1 = std::min(rows, r0 + rows_per);
            threads.emplace_back([&, b, r0, r1] {
                bands[static_cast<size_t>(b)] =
                    detail::backward_screen_rows(prepared, bins, cam, cfg, dL_dpixels, r0, r1);
            });
        }
        for (auto& t : threads) t.join();
    }

    // Canonical reduction: fold row subtotals in ascending row order.
    std::vector<detail::ScreenGrad> total(prepared.size());
    std::vector<bool> any(prepared.size(), false);
    for (const auto& band : bands)
        for (const auto& row : band)
            for (const auto& [pos, grad] : row) {
                total[static_cast<size_t>(pos)].add(grad);
                any[static_cast<size_t>(pos)] = true;
            }

    // Chain screen-space gradients to the 3D parameters, one splat at a time.
    Mat3 cam_rot = cam.world_to_camera_rotation();
    double f = cam.focal_px();
    for (size_t pos = 0; pos < prepared.size(); ++pos) {
        if (!any[pos]) continue;
        const detail::ScreenGrad& a = total[pos];
        const detail::PreparedSplat& p = prepared[pos];
        const size_t gi = static_cast<size_t>(p.index);
        const Gaussian3D& g = model.gaussians[gi];

        grads.d_color[gi] += a.g_color;
        grads.d_mean2d[gi] = grads.d_mean2d[gi] + a.g_mean2d;
        grads.touch_count[gi] = 1;

        // opacity = sigmoid(logit)
        grads.d_opacity_logit[gi] += a.g_alpha_pre * p.opacity * (1.0 - p.opacity);

        // dL/d cov2d = -M (dL/dM) M for M = cov2d^{-1}.
        const Mat2Sym& m = p.inv_cov2d;
        detail::M2 gm = a.g_inv_cov;
        double t1a = m.xx * gm.a + m.xy * gm.c, t1b = m.xx * gm.b + m.xy * gm.d;
        double t1c = m.xy * gm.a + m.yy * gm.c, t1d = m.xy * gm.b + m.yy * gm.d;
        detail::M2 g_cov;
        g_cov.a = -(t1a * m.xx + t1b * m.xy);
        g_cov.b = -(t1a * m.xy + t1b * m.yy);
        g_cov.c = -(t1c * m.xx + t1d * m.xy);
        g_cov.d = -(t1c * m.xy + t1d * m.yy);

        // Recompute the projection geometry (identical math to try_project).
        Vec3 t = cam_rot * (g.mu - cam.position);
        double inv_z = 1.0 / t.z;
        double inv_z2 = inv_z * inv_z;
        double j00 = f * inv_z, j02 = -f * t.x * inv_z2;
        double j11 = -f * inv_z, j12 = f * t.y * inv_z2;

        Quat qn = g.rot.normalized();
        Mat3 rot_q = quat_to_mat3(qn);
        Vec3 s = {std::exp(g.log_scale.x), std::exp(g.log_scale.y), std::exp(g.log_scale.z)};
        Mat3 sigma = covariance_from_params(g.log_scale, qn);
        Mat3 sigma_cam = cam_rot * sigma * cam_rot.transposed();

        // g_sigma_cam = J^T g_cov J, with J rows (j00, 0, j02), (0, j11, j12).
        Vec3 jrow0{j00, 0.0, j02}, jrow1{0.0, j11, j12};
        Mat3 g_sigma_cam = Mat3::zero();
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                g_sigma_cam(i, j) = jrow0[i] * (g_cov.a * jrow0[j] + g_cov.b * jrow1[j]) +
                                    jrow1[i] * (g_cov.c * jrow0[j] + g_cov.d * jrow1[j]);

        // g_J = (g_cov + g_cov^T) J sigma_cam
        Vec3 sig_j0 = sigma_cam * jrow0;  // sigma_cam symmetric
        Vec3 sig_j1 = sigma_cam * jrow1;
        Vec3 g_jrow0 = sig_j0 * (2.0 * g_cov.a) + sig_j1 * (g_cov.b + g_cov.c);
        Vec3 g_jrow1 = sig_j0 * (g_cov.b + g_cov.c) + sig_j1 * (2.0 * g_cov.d);

        // mean2d = (cx + f tx/tz, cy - f ty/tz)
        Vec3 g_t{
            a.g_mean2d.x * j00,
            a.g_mean2d.y * j11,
            a.g_mean2d.x * (-f * t.x * inv_z2) + a.g_mean2d.y * (f * t.y * inv_z2),
        };
        // J itself depends on t.
        g_t.x += g_jrow0.z * (-f * inv_z2);
        g_t.y += g_jrow1.z * (f * inv_z2);
        g_t.z += g_jrow0.x * (-f * inv_z2) + g_jrow0.z * (2.0 * f * t.x * inv_z2 * inv_z) +
                 g_jrow1.y * (f * inv_z2) + g_jrow1.z * (-2.0 * f * t.y * inv_z2 * inv_z);

        grads.d_mu[gi] += cam_rot.transposed_mul(g_t);

        // sigma_cam = R_c sigma R_c^T  =>  g_sigma = R_c^T g_sigma_cam R_c
        Mat3 g_sigma = cam_rot.transposed() * g_sigma_cam * cam_rot;

        // sigma = M3 M3^T with M3 = R(q) diag(s): g_M3 = (g_sigma + g_sigma^T) M3
        Mat3 m3 = Mat3::zero();
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) m3(i, j) = rot_q(i, j) * s[j];
        Mat3 g_sym = g_sigma + g_sigma.transposed();
        Mat3 g_m3 = g_sym * m3;

        // log-scale: M3(i,k) = R(i,k) s_k, s_k = exp(ls_k)
        for (int k = 0; k < 3; ++k) {
            double gs = 0.0;
            for (int i = 0; i < 3; ++i) gs += g_m3(i, k) * rot_q(i, k);
            grads.d_log_scale[gi][k] += gs * s[k];
        }

        // quaternion: g_R = g_M3 diag(s), then through normalization.
        Mat3 g_rotmat = Mat3::zero();
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) g_rotmat(i, j) = g_m3(i, j) * s[j];
        Quat g_qn{0, 0, 0, 0};
        for (int k = 0; k < 4; ++k) {
            Mat3 dr = detail::quat_rotation_derivative(qn, k);
            double v = 0.0;
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) v += g_rotmat(i, j) * dr(i, j);
            g_qn[k] = v;
        }
        // qn = q / |q|: J = (I - qn qn^T) / |q|
        double qnorm = g.rot.norm();
        double dot = g_qn.w * qn.w + g_qn.x * qn.x + g_qn.y * qn.y + g_qn.z * qn.z;
        for (int k = 0; k < 4; ++k) grads.d_rot[gi][k] += (g_qn[k] - dot * qn[k]) / qnorm;
    }
    return grads;
}

} // namespace dsplat

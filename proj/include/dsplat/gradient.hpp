#pragma once

#include <cstdint>
#include <vector>

#include "dsplat/math.hpp"

namespace dsplat {

// Per-parameter gradients for one optimizer step, plus the screen-space
// statistics densification feeds on. Always sized to the model.
struct GradientBuffer {
    std::vector<Vec3> d_mu;
    std::vector<Vec3> d_log_scale;
    std::vector<Quat> d_rot;  // gradient w.r.t. the raw (stored) quaternion
    std::vector<double> d_opacity_logit;
    std::vector<Vec3> d_color;
    std::vector<Vec2> d_mean2d;             // this step's screen-space positional gradient
    std::vector<double> screen_grad_norm;   // accumulated ||dL/d mean2d|| across steps
    std::vector<int32_t> touch_count;

    explicit GradientBuffer(size_t n = 0) { resize(n); }

    size_t size() const { return d_mu.size(); }

    void resize(size_t n) {
        d_mu.assign(n, Vec3{});
        d_log_scale.assign(n, Vec3{});
        d_rot.assign(n, Quat{0, 0, 0, 0});
        d_opacity_logit.assign(n, 0.0);
        d_color.assign(n, Vec3{});
        d_mean2d.assign(n, Vec2{});
        screen_grad_norm.assign(n, 0.0);
        touch_count.assign(n, 0);
    }

    // Folds this step's screen-space gradient into the densification
    // statistics. Call once per step.
    void finalize_step_stats() {
        for (size_t i = 0; i < size(); ++i)
            if (touch_count[i] > 0) {
                screen_grad_norm[i] += d_mean2d[i].norm();
                touch_count[i] = 1;
            }
    }
};

} // namespace dsplat

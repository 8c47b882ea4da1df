#pragma once

#include <cmath>
#include <vector>

#include "dsplat/gaussian.hpp"
#include "dsplat/gradient.hpp"

namespace dsplat {

struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-15;
};

// Adam with per-group learning rates over the five parameter groups of a
// gaussian (14 scalars). Moments are stored flat, 14 per gaussian, in
// parameter order mu, log_scale, rot, opacity_logit, color.
class AdamState {
public:
    static constexpr int kScalars = 14;

    explicit AdamState(size_t n_gaussians = 0) { resize(n_gaussians); }

    void resize(size_t n) {
        m_.assign(n * kScalars, 0.0);
        v_.assign(n * kScalars, 0.0);
    }

    size_t size() const { return m_.size() / kScalars; }
    int64_t step_count() const { return step_; }

    // Rebuilds moments after densification: source[j] is the old index whose
    // moments entry j inherits, or -1 for a fresh entry.
    void remap(const std::vector<int32_t>& source) {
        std::vector<double> nm(source.size() * kScalars, 0.0);
        std::vector<double> nv(source.size() * kScalars, 0.0);
        for (size_t j = 0; j < source.size(); ++j) {
            if (source[j] < 0) continue;
            size_t src = static_cast<size_t>(source[j]);
            for (int s = 0; s < kScalars; ++s) {
                nm[j * kScalars + static_cast<size_t>(s)] = m_[src * kScalars + static_cast<size_t>(s)];
                nv[j * kScalars + static_cast<size_t>(s)] = v_[src * kScalars + static_cast<size_t>(s)];
            }
        }
        m_ = std::move(nm);
        v_ = std::move(nv);
    }

    struct GroupRates {
        double mu, log_scale, rot, opacity, color;
    };

    void step(SplatModel& model, const GradientBuffer& grads, const GroupRates& lr,
              const AdamConfig& cfg = {}) {
        ++step_;
        double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step_));
        double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step_));

        for (size_t i = 0; i < model.gaussians.size(); ++i) {
            Gaussian3D& g = model.gaussians[i];
            double grad[kScalars] = {
                grads.d_mu[i].x,        grads.d_mu[i].y,        grads.d_mu[i].z,
                grads.d_log_scale[i].x, grads.d_log_scale[i].y, grads.d_log_scale[i].z,
                grads.d_rot[i].w,       grads.d_rot[i].x,       grads.d_rot[i].y,
                grads.d_rot[i].z,       grads.d_opacity_logit[i],
                grads.d_color[i].x,     grads.d_color[i].y,     grads.d_color[i].z,
            };
            double rate[kScalars] = {
                lr.mu,        lr.mu,        lr.mu,
                lr.log_scale, lr.log_scale, lr.log_scale,
                lr.rot,       lr.rot,       lr.rot,
                lr.rot,       lr.opacity,
                lr.color,     lr.color,     lr.color,
            };
            double value[kScalars] = {
                g.mu.x,        g.mu.y,        g.mu.z,
                g.log_scale.x, g.log_scale.y, g.log_scale.z,
                g.rot.w,       g.rot.x,       g.rot.y,
                g.rot.z,       g.opacity_logit,
                g.color.x,     g.color.y,     g.color.z,
            };
            for (int s = 0; s < kScalars; ++s) {
                size_t k = i * kScalars + static_cast<size_t>(s);
                m_[k] = cfg.beta1 * m_[k] + (1.0 - cfg.beta1) * grad[s];
                v_[k] = cfg.beta2 * v_[k] + (1.0 - cfg.beta2) * grad[s] * grad[s];
                double mhat = m_[k] / bc1;
                double vhat = v_[k] / bc2;
                value[s] -= rate[s] * mhat / (std::sqrt(vhat) + cfg.epsilon);
            }
            g.mu = {value[0], value[1], value[2]};
            g.log_scale = {value[3], value[4], value[5]};
            g.rot = {value[6], value[7], value[8], value[9]};
            g.opacity_logit = value[10];
            g.color = {value[11], value[12], value[13]};

            g.normalize_rotation();
            g.clamp_scale();
        }
    }

    // Opaque binary payload for checkpoint sidecars.
    std::vector<double> serialize() const {
        std::vector<double> out;
        out.reserve(2 + m_.size() + v_.size());
        out.push_back(static_cast<double>(step_));
        out.push_back(static_cast<double>(size()));
        out.insert(out.end(), m_.begin(), m_.end());
        out.insert(out.end(), v_.begin(), v_.end());
        return out;
    }

private:
    std::vector<double> m_;
    std::vector<double> v_;
    int64_t step_ = 0;
};

} // namespace dsplat

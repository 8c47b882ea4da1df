#pragma once

#include <functional>

#include "dsplat/adam.hpp"
#include "dsplat/backward.hpp"
#include "dsplat/loss.hpp"
#include "dsplat/render.hpp"
#include "dsplat/rng.hpp"

namespace dsplat {

struct TrainConfig {
    int64_t iterations = 2000;
    double lr_mu = 1e-3;          // decays exponentially by lr_mu_decay over the run
    double lr_mu_decay = 0.01;    // final/initial ratio
    double lr_scale = 5e-3;
    double lr_rot = 1e-3;
    double lr_opacity = 5e-2;
    double lr_color = 5e-3;
    double loss_lambda = 0.2;     // D-SSIM weight
    int64_t densify_interval = 100;
    double densify_grad_threshold = 2e-4;
    double prune_opacity = 5e-3;
    double densify_stop_fraction = 0.5;
    double split_scale_threshold = 0.0;  // world units; <= 0 picks 2% of model diagonal
    int64_t checkpoint_interval = 0;     // 0 = only at the end
    uint64_t seed = 1;
    RenderConfig render;
    AdamConfig adam;

    void validate() const {
        if (lr_mu <= 0 || lr_scale <= 0 || lr_rot <= 0 || lr_opacity <= 0 || lr_color <= 0)
            throw Error(ErrorCode::InvalidArgument, "learning rates must be positive");
        if (loss_lambda < 0.0 || loss_lambda > 1.0)
            throw Error(ErrorCode::InvalidArgument, "loss_lambda outside [0, 1]");
        if (iterations < 0)
            throw Error(ErrorCode::InvalidArgument, "iterations must be >= 0");
    }
};

namespace detail {

// Clone/split/prune with an explicit parent map so optimizer moments can
// follow: source[j] >= 0 means output j keeps the moments of that input,
// -1 means a fresh entry.
inline SplatModel densify_and_prune_impl(const SplatModel& model, const GradientBuffer& stats,
                                         const TrainConfig& cfg, Rng& rng,
                                         std::vector<int32_t>* source_map) {
    if (stats.size() != model.size())
        throw Error(ErrorCode::MismatchedCounts, "stats not aligned to model");

    double split_threshold = cfg.split_scale_threshold;
    if (split_threshold <= 0.0) split_threshold = 0.02 * model.bounds().diagonal();

    SplatModel out;
    out.iteration = model.iteration;
    out.origin_partition = model.origin_partition;
    std::vector<int32_t> source;
    std::vector<Gaussian3D> appended;
    std::vector<int32_t> appended_source;

    for (size_t i = 0; i < model.size(); ++i) {
        const Gaussian3D& g = model.gaussians[i];
        if (g.opacity() < cfg.prune_opacity) continue;  // prune

        double mean_grad = stats.touch_count[i] > 0
                               ? stats.screen_grad_norm[i] / stats.touch_count[i]
                               : 0.0;
        if (mean_grad > cfg.densify_grad_threshold) {
            Vec3 s = g.scale();
            double max_scale = std::max(s.x, std::max(s.y, s.z));
            if (max_scale > split_threshold) {
                // Split: two children at 0.8x scale, positions drawn from the
                // parent's own footprint.
                Mat3 rot = quat_to_mat3(g.rot.normalized());
                const double shrink = std::log(0.8);
                for (int child = 0; child < 2; ++child) {
                    Vec3 local{rng.normal() * s.x, rng.normal() * s.y, rng.normal() * s.z};
                    Gaussian3D c = g;
                    c.mu = g.mu + rot * local;
                    c.log_scale = g.log_scale + Vec3{shrink, shrink, shrink};
                    if (child == 0) {
                        out.gaussians.push_back(c);
                        source.push_back(-1);
                    } else {
                        appended.push_back(c);
                        appended_source.push_back(-1);
                    }
                }
            } else {
                // Clone: keep the original (with its moments), append a copy.
                out.gaussians.push_back(g);
                source.push_back(static_cast<int32_t>(i));
                appended.push_back(g);
                appended_source.push_back(-1);
            }
        } else {
            out.gaussians.push_back(g);
            source.push_back(static_cast<int32_t>(i));
        }
    }
    out.gaussians.insert(out.gaussians.end(), appended.begin(), appended.end());
    source.insert(source.end(), appended_source.begin(), appended_source.end());
    if (source_map) *source_map = std::move(source);
    return out;
}

} // namespace detail

// Densification and pruning pass over accumulated gradient statistics.
inline SplatModel densify_and_prune(const SplatModel& model, const GradientBuffer& stats,
                                    const TrainConfig& cfg) {
    Rng rng(cfg.seed ^ (0xdef1ULL + static_cast<uint64_t>(model.iteration)));
    return detail::densify_and_prune_impl(model, stats, cfg, rng, nullptr);
}

// Called at checkpoint intervals and once at the end of training.
using CheckpointSink =
    std::function<void(const SplatModel&, const AdamState&, int64_t iteration, double loss)>;

// Called after every step with (steps completed, current loss).
using ProgressSink = std::function<void(int64_t, double)>;

struct TrainResult {
    SplatModel model;
    double final_loss = 0.0;
    size_t size_before_densify = 0;
    size_t size_after_densify = 0;
};

// Per-partition optimization loop. One view per step (round-robin over a
// seeded shuffle), masked L1 + D-SSIM loss, Adam updates, periodic
// densification and pruning.
//
// shards > 1 splits each step's backward pass into contiguous pixel-row
// bands that run concurrently; their per-row subtotals are reduced in a
// canonical order before the single optimizer update, so the trajectory is
// bit-identical for every shard count.
inline TrainResult train_partition_full(const SplatModel& input, const std::vector<TrainView>& views,
                                        const TrainConfig& cfg, int shards = 1,
                                        const CheckpointSink& checkpoint = nullptr,
                                        const ProgressSink& progress = nullptr) {
    cfg.validate();
    if (views.empty()) throw Error(ErrorCode::NoViews, "training requires at least one view");
    if (shards < 1) throw Error(ErrorCode::InvalidArgument, "shards must be >= 1");
    for (const auto& v : views) v.validate();

    TrainResult result;
    result.model = input;
    result.size_before_densify = input.size();
    if (cfg.iterations == 0) {
        result.size_after_densify = input.size();
        return result;
    }

    SplatModel& model = result.model;

    // Seeded view order, cycled round-robin.
    std::vector<size_t> view_order(views.size());
    for (size_t i = 0; i < views.size(); ++i) view_order[i] = i;
    Rng view_rng(cfg.seed ^ 0x87aa'11d3ULL);
    view_rng.shuffle(view_order);

    Rng densify_rng(cfg.seed ^ 0xd3a5'1f11ULL);

    AdamState adam(model.size());
    GradientBuffer stats(model.size());

    const int64_t densify_until =
        static_cast<int64_t>(cfg.densify_stop_fraction * static_cast<double>(cfg.iterations));

    for (int64_t it = 0; it < cfg.iterations; ++it) {
        const TrainView& view = views[view_order[static_cast<size_t>(it) % views.size()]];

        RenderOutput out = render(model, view.cam, cfg.render);
        LossResult lr = masked_loss(out.color, view, cfg.loss_lambda);
        result.final_loss = lr.loss;

        GradientBuffer grads = backward(model, view.cam, cfg.render, out, lr.dL_dpixels, shards);

        double decay = std::pow(cfg.lr_mu_decay,
                                static_cast<double>(it) / static_cast<double>(cfg.iterations));
        AdamState::GroupRates rates{cfg.lr_mu * decay, cfg.lr_scale, cfg.lr_rot, cfg.lr_opacity,
                                    cfg.lr_color};
        adam.step(model, grads, rates, cfg.adam);
        model.iteration += 1;

        grads.finalize_step_stats();
        for (size_t i = 0; i < model.size(); ++i) {
            stats.screen_grad_norm[i] += grads.screen_grad_norm[i];
            stats.touch_count[i] += grads.touch_count[i];
        }

        bool densify_now = cfg.densify_interval > 0 && (it + 1) % cfg.densify_interval == 0 &&
                           (it + 1) < densify_until;
        if (densify_now) {
            std::vector<int32_t> source;
            model = detail::densify_and_prune_impl(model, stats, cfg, densify_rng, &source);
            adam.remap(source);
            stats.resize(model.size());
        }

        if (checkpoint && cfg.checkpoint_interval > 0 && (it + 1) % cfg.checkpoint_interval == 0)
            checkpoint(model, adam, model.iteration, result.final_loss);
        if (progress) progress(it + 1, result.final_loss);
    }
    result.size_after_densify = model.size();
    if (checkpoint) checkpoint(model, adam, model.iteration, result.final_loss);
    return result;
}

// Spec-shaped entry point.
inline SplatModel train_partition(const SplatModel& model, const std::vector<TrainView>& views,
                                  const TrainConfig& cfg, int shards = 1) {
    return train_partition_full(model, views, cfg, shards).model;
}

} // namespace dsplat

#pragma once

#include <json.hpp>

#include "dsplat/io_util.hpp"
#include "dsplat/render.hpp"
#include "dsplat/trainer.hpp"

namespace dsplat {

struct RigSpec {
    int n_azimuth = 7;
    int n_elevation = 4;
    int resolution = 64;
    double fov_y = 0.9;
    double radius_scale = 2.5;  // times the cloud's bounding-sphere radius
    double max_elevation = M_PI / 3.0;
};

// Everything a distributed run needs. Auto (<= 0) values are resolved by the
// coordinator at partition time and written back, so workers see only
// concrete numbers.
struct JobSpec {
    std::string cloud_path;
    std::string out_dir;
    int n_partitions = 1;
    int shards_per_partition = 1;
    double ghost_margin = -1.0;      // < 0: 3x median nearest-neighbor spacing
    double gt_scale = -1.0;          // < 0: 1x median nearest-neighbor spacing
    double gt_opacity = 0.97;
    double mask_footprint_px = 2.0;
    double mask_dilation_px = 2.0;
    bool use_masks = true;
    double test_fraction = 0.1;
    double timeout_seconds = 0.0;    // 0: derived from early progress
    uint64_t seed = 1;
    RigSpec rig;
    TrainConfig train;
    RenderConfig render;

    void validate() const {
        if (n_partitions < 1) throw Error(ErrorCode::InvalidArgument, "need >= 1 partition");
        if (shards_per_partition < 1) throw Error(ErrorCode::InvalidArgument, "need >= 1 shard");
        if (cloud_path.empty() || out_dir.empty())
            throw Error(ErrorCode::InvalidArgument, "cloud path and out dir required");
        train.validate();
        render.validate();
    }
};

inline nlohmann::json jobspec_to_json(const JobSpec& s) {
    nlohmann::json j;
    j["cloud"] = s.cloud_path;
    j["out_dir"] = s.out_dir;
    j["partitions"] = s.n_partitions;
    j["shards"] = s.shards_per_partition;
    j["ghost_margin"] = s.ghost_margin;
    j["gt"] = {{"scale", s.gt_scale}, {"opacity", s.gt_opacity}};
    j["mask"] = {{"footprint_px", s.mask_footprint_px},
                 {"dilation_px", s.mask_dilation_px},
                 {"enabled", s.use_masks}};
    j["test_fraction"] = s.test_fraction;
    j["timeout_seconds"] = s.timeout_seconds;
    j["seed"] = s.seed;
    j["rig"] = {{"azimuth", s.rig.n_azimuth},       {"elevation", s.rig.n_elevation},
                {"resolution", s.rig.resolution},   {"fov_y", s.rig.fov_y},
                {"radius_scale", s.rig.radius_scale}, {"max_elevation", s.rig.max_elevation}};
    j["train"] = {{"iterations", s.train.iterations},
                  {"lr_mu", s.train.lr_mu},
                  {"lr_mu_decay", s.train.lr_mu_decay},
                  {"lr_scale", s.train.lr_scale},
                  {"lr_rot", s.train.lr_rot},
                  {"lr_opacity", s.train.lr_opacity},
                  {"lr_color", s.train.lr_color},
                  {"loss_lambda", s.train.loss_lambda},
                  {"densify_interval", s.train.densify_interval},
                  {"densify_grad_threshold", s.train.densify_grad_threshold},
                  {"prune_opacity", s.train.prune_opacity},
                  {"densify_stop_fraction", s.train.densify_stop_fraction},
                  {"split_scale_threshold", s.train.split_scale_threshold},
                  {"checkpoint_interval", s.train.checkpoint_interval}};
    j["render"] = {{"tile_size", s.render.tile_size},
                   {"alpha_cutoff", s.render.alpha_cutoff},
                   {"sigma_cutoff", s.render.sigma_cutoff},
                   {"background",
                    {s.render.background.x, s.render.background.y, s.render.background.z}},
                   {"transmittance_floor", s.render.transmittance_floor}};
    return j;
}

inline JobSpec jobspec_from_json(const nlohmann::json& j) {
    JobSpec s;
    try {
        s.cloud_path = j.at("cloud");
        s.out_dir = j.at("out_dir");
        s.n_partitions = j.at("partitions");
        s.shards_per_partition = j.at("shards");
        s.ghost_margin = j.at("ghost_margin");
        s.gt_scale = j.at("gt").at("scale");
        s.gt_opacity = j.at("gt").at("opacity");
        s.mask_footprint_px = j.at("mask").at("footprint_px");
        s.mask_dilation_px = j.at("mask").at("dilation_px");
        s.use_masks = j.at("mask").at("enabled");
        s.test_fraction = j.at("test_fraction");
        s.timeout_seconds = j.at("timeout_seconds");
        s.seed = j.at("seed");
        const auto& r = j.at("rig");
        s.rig.n_azimuth = r.at("azimuth");
        s.rig.n_elevation = r.at("elevation");
        s.rig.resolution = r.at("resolution");
        s.rig.fov_y = r.at("fov_y");
        s.rig.radius_scale = r.at("radius_scale");
        s.rig.max_elevation = r.at("max_elevation");
        const auto& t = j.at("train");
        s.train.iterations = t.at("iterations");
        s.train.lr_mu = t.at("lr_mu");
        s.train.lr_mu_decay = t.at("lr_mu_decay");
        s.train.lr_scale = t.at("lr_scale");
        s.train.lr_rot = t.at("lr_rot");
        s.train.lr_opacity = t.at("lr_opacity");
        s.train.lr_color = t.at("lr_color");
        s.train.loss_lambda = t.at("loss_lambda");
        s.train.densify_interval = t.at("densify_interval");
        s.train.densify_grad_threshold = t.at("densify_grad_threshold");
        s.train.prune_opacity = t.at("prune_opacity");
        s.train.densify_stop_fraction = t.at("densify_stop_fraction");
        s.train.split_scale_threshold = t.at("split_scale_threshold");
        s.train.checkpoint_interval = t.at("checkpoint_interval");
        const auto& rc = j.at("render");
        s.render.tile_size = rc.at("tile_size");
        s.render.alpha_cutoff = rc.at("alpha_cutoff");
        s.render.sigma_cutoff = rc.at("sigma_cutoff");
        s.render.background = {rc.at("background").at(0), rc.at("background").at(1),
                               rc.at("background").at(2)};
        s.render.transmittance_floor = rc.at("transmittance_floor");
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::MalformedFile, "job spec missing fields: " + std::string(e.what()));
    }
    return s;
}

inline JobSpec read_jobspec(const std::string& path) {
    try {
        return jobspec_from_json(nlohmann::json::parse(read_file(path)));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::MalformedFile, "bad job json: " + std::string(e.what()));
    }
}

inline void write_jobspec(const std::string& path, const JobSpec& s) {
    write_file_atomic(path, jobspec_to_json(s).dump(2) + "\n");
}

} // namespace dsplat

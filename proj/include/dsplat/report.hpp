#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "dsplat/error.hpp"
#include "dsplat/io_util.hpp"

namespace dsplat {

struct WorkerReport {
    int partition = 0;
    double wall_seconds = 0.0;
    double final_loss = 0.0;
    size_t model_size_before = 0;
    size_t model_size_after = 0;
    double peak_rss_mb = 0.0;
    std::string rig_hash;

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["partition"] = partition;
        j["wall_seconds"] = wall_seconds;
        j["final_loss"] = final_loss;
        j["model_size_before"] = model_size_before;
        j["model_size_after"] = model_size_after;
        j["peak_rss_mb"] = peak_rss_mb;
        j["rig_hash"] = rig_hash;
        return j;
    }
    static WorkerReport from_json(const nlohmann::json& j) {
        WorkerReport r;
        r.partition = j.at("partition");
        r.wall_seconds = j.at("wall_seconds");
        r.final_loss = j.at("final_loss");
        r.model_size_before = j.at("model_size_before");
        r.model_size_after = j.at("model_size_after");
        r.peak_rss_mb = j.at("peak_rss_mb");
        r.rig_hash = j.at("rig_hash");
        return r;
    }
};

// One completed run, as consumed by the scaling report.
struct RunSummary {
    std::string label;
    int partitions = 1;
    int shards = 1;
    int resolution = 0;
    int64_t iterations = 0;
    double wall_seconds = 0.0;
    double psnr = 0.0;
    double ssim = 0.0;
    bool has_metrics = false;

    static RunSummary from_json(const nlohmann::json& j) {
        RunSummary s;
        s.label = j.value("label", "");
        s.partitions = j.at("partitions");
        s.shards = j.at("shards");
        s.resolution = j.at("resolution");
        s.iterations = j.at("iterations");
        s.wall_seconds = j.at("wall_seconds");
        if (j.contains("psnr")) {
            s.psnr = j.at("psnr");
            s.ssim = j.at("ssim");
            s.has_metrics = true;
        }
        return s;
    }
};

struct ScalingReport {
    std::string text;
    std::string csv;
    std::vector<double> speedups;  // aligned with the input runs
};

// Speedup table against a baseline run: speedup = baseline wall seconds /
// run wall seconds. LPIPS is reported as n/a throughout.
inline ScalingReport scaling_report(const std::vector<RunSummary>& runs, size_t baseline_index = 0) {
    if (runs.size() < 2)
        throw Error(ErrorCode::MissingBaseline,
                    "scaling report needs a baseline and at least one other run");
    if (baseline_index >= runs.size())
        throw Error(ErrorCode::MissingBaseline, "baseline index out of range");
    const RunSummary& base = runs[baseline_index];
    if (!(base.wall_seconds > 0.0))
        throw Error(ErrorCode::MissingBaseline, "baseline wall time must be positive");

    ScalingReport rep;
    char line[256];

    rep.csv = "label,partitions,shards,resolution,iterations,wall_seconds,speedup,psnr,ssim,lpips\n";
    std::snprintf(line, sizeof(line), "%-18s %5s %7s %6s %10s %12s %8s %8s %8s %6s\n", "label",
                  "parts", "shards", "res", "iters", "wall_s", "speedup", "PSNR", "SSIM", "LPIPS");
    rep.text = line;

    for (const RunSummary& r : runs) {
        double speedup = base.wall_seconds / r.wall_seconds;
        rep.speedups.push_back(speedup);

        char psnr_buf[32] = "n/a", ssim_buf[32] = "n/a";
        if (r.has_metrics) {
            std::snprintf(psnr_buf, sizeof(psnr_buf), "%.2f", r.psnr);
            std::snprintf(ssim_buf, sizeof(ssim_buf), "%.4f", r.ssim);
        }
        std::snprintf(line, sizeof(line), "%s,%d,%d,%d,%lld,%.6f,%.6f,%s,%s,n/a\n",
                      r.label.c_str(), r.partitions, r.shards, r.resolution,
                      static_cast<long long>(r.iterations), r.wall_seconds, speedup, psnr_buf,
                      ssim_buf);
        rep.csv += line;
        std::snprintf(line, sizeof(line), "%-18s %5d %7d %6d %10lld %12.3f %7.2fx %8s %8s %6s\n",
                      r.label.empty() ? "-" : r.label.c_str(), r.partitions, r.shards,
                      r.resolution, static_cast<long long>(r.iterations), r.wall_seconds, speedup,
                      psnr_buf, ssim_buf, "n/a");
        rep.text += line;
    }
    return rep;
}

} // namespace dsplat

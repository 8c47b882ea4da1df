#pragma once

#include <sys/resource.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <csignal>
#include <filesystem>
#include <thread>

#include "dsplat/jobspec.hpp"
#include "dsplat/manifest.hpp"
#include "dsplat/marching_cubes.hpp"
#include "dsplat/metrics.hpp"
#include "dsplat/partition.hpp"
#include "dsplat/ply_io.hpp"
#include "dsplat/png_io.hpp"
#include "dsplat/report.hpp"
#include "dsplat/rig_io.hpp"
#include "dsplat/seed.hpp"

namespace dsplat {

// Workers are separate processes that communicate through the run directory:
// manifests in, model + report out. There is no live transport; partitions
// train fully independently and only the coordinator touches shared files.
//
// Run directory layout:
//   job.json, rig.json, manifest.json
//   partitions/partition_<k>.json|.ply
//   workers/worker_<k>/{model.ply, report.json, progress.json, checkpoints}
//   merged.ply, metrics.csv, report.json, report.csv

namespace paths {
inline std::string job(const std::string& dir) { return dir + "/job.json"; }
inline std::string rig(const std::string& dir) { return dir + "/rig.json"; }
inline std::string partition_json(const std::string& dir, int k) {
    return dir + "/partitions/partition_" + std::to_string(k) + ".json";
}
inline std::string partition_ply(const std::string& dir, int k) {
    return dir + "/partitions/partition_" + std::to_string(k) + ".ply";
}
inline std::string worker_dir(const std::string& dir, int k) {
    return dir + "/workers/worker_" + std::to_string(k);
}
inline std::string worker_model(const std::string& dir, int k) {
    return worker_dir(dir, k) + "/model.ply";
}
inline std::string worker_report(const std::string& dir, int k) {
    return worker_dir(dir, k) + "/report.json";
}
inline std::string worker_progress(const std::string& dir, int k) {
    return worker_dir(dir, k) + "/progress.json";
}
inline std::string merged(const std::string& dir) { return dir + "/merged.ply"; }
inline std::string metrics_csv(const std::string& dir) { return dir + "/metrics.csv"; }
inline std::string run_report(const std::string& dir) { return dir + "/report.json"; }
} // namespace paths

// ---------------------------------------------------------------------------
// Planning: resolve auto values, cut the cloud, write manifests.

inline std::vector<Camera> build_rig_for_cloud(const RigSpec& rig, const PointCloud& cloud) {
    Aabb box = cloud.bounds();
    double bounding_radius = 0.5 * box.diagonal();
    if (bounding_radius <= 0.0) bounding_radius = 1.0;
    return build_orbital_cameras(box.center(), rig.radius_scale * bounding_radius, rig.n_azimuth,
                                 rig.n_elevation, rig.resolution, rig.fov_y, rig.max_elevation);
}

inline void resolve_auto_values(JobSpec& spec, const PointCloud& cloud) {
    double nn = median_nn_spacing(cloud);
    if (spec.ghost_margin < 0.0) spec.ghost_margin = 3.0 * nn;
    if (spec.gt_scale < 0.0) spec.gt_scale = nn;
}

struct RunPlan {
    JobSpec spec;                     // with auto values resolved
    PointCloud cloud;
    std::vector<Camera> rig;
    std::vector<Partition> partitions;
    RigSplit split;
};

inline nlohmann::json partition_to_json(const Partition& p) {
    nlohmann::json j;
    j["id"] = p.id;
    j["cut_axis"] = p.cut_axis;
    j["cut_lo"] = std::isfinite(p.cut_lo) ? nlohmann::json(p.cut_lo) : nlohmann::json();
    j["cut_hi"] = std::isfinite(p.cut_hi) ? nlohmann::json(p.cut_hi) : nlohmann::json();
    j["owned_box"] = {{"lo", {p.owned_box.lo.x, p.owned_box.lo.y, p.owned_box.lo.z}},
                      {"hi", {p.owned_box.hi.x, p.owned_box.hi.y, p.owned_box.hi.z}}};
    j["ghost_margin"] = p.ghost_margin;
    j["owned_count"] = p.owned_points.size();
    j["ghost_count"] = p.ghost_points.size();
    j["owned_indices"] = p.owned_indices;
    j["ghost_indices"] = p.ghost_indices;
    return j;
}

// The clouds come back from the sibling .ply (owned points first, ghosts
// after), so a loaded partition is usable for seeding and merging.
inline Partition partition_from_json(const nlohmann::json& j, const PointCloud& combined) {
    Partition p;
    p.id = j.at("id");
    p.cut_axis = j.at("cut_axis");
    p.cut_lo = j.at("cut_lo").is_null() ? -std::numeric_limits<double>::infinity()
                                        : j.at("cut_lo").get<double>();
    p.cut_hi = j.at("cut_hi").is_null() ? std::numeric_limits<double>::infinity()
                                        : j.at("cut_hi").get<double>();
    p.owned_box.lo = {j.at("owned_box").at("lo").at(0), j.at("owned_box").at("lo").at(1),
                      j.at("owned_box").at("lo").at(2)};
    p.owned_box.hi = {j.at("owned_box").at("hi").at(0), j.at("owned_box").at("hi").at(1),
                      j.at("owned_box").at("hi").at(2)};
    p.ghost_margin = j.at("ghost_margin");
    size_t owned = j.at("owned_count"), ghost = j.at("ghost_count");
    if (combined.size() != owned + ghost)
        throw Error(ErrorCode::ManifestMismatch, "partition ply does not match manifest counts");
    p.owned_indices = j.at("owned_indices").get<std::vector<uint32_t>>();
    p.ghost_indices = j.at("ghost_indices").get<std::vector<uint32_t>>();
    p.owned_points.points.assign(combined.points.begin(),
                                 combined.points.begin() + static_cast<long>(owned));
    p.ghost_points.points.assign(combined.points.begin() + static_cast<long>(owned),
                                 combined.points.end());
    return p;
}

inline RunPlan plan_run(JobSpec spec) {
    spec.validate();
    RunPlan plan;
    plan.cloud = read_cloud_ply(spec.cloud_path);
    if (plan.cloud.empty()) throw Error(ErrorCode::EmptyCloud, "input cloud is empty");
    resolve_auto_values(spec, plan.cloud);
    plan.spec = spec;
    plan.rig = build_rig_for_cloud(spec.rig, plan.cloud);
    plan.partitions = partition_cloud(plan.cloud, spec.n_partitions, spec.ghost_margin);
    plan.split = split_rig(plan.rig.size(), spec.test_fraction, spec.seed);
    return plan;
}

inline void write_plan(const RunPlan& plan) {
    const std::string& dir = plan.spec.out_dir;
    std::filesystem::create_directories(dir + "/partitions");
    write_jobspec(paths::job(dir), plan.spec);
    write_rig(paths::rig(dir), plan.rig);
    for (const Partition& p : plan.partitions) {
        PointCloud combined;
        combined.points = p.owned_points.points;
        combined.points.insert(combined.points.end(), p.ghost_points.points.begin(),
                               p.ghost_points.points.end());
        write_cloud_ply(paths::partition_ply(dir, p.id), combined);
        write_file_atomic(paths::partition_json(dir, p.id), partition_to_json(p).dump(2) + "\n");
    }
    write_stage_manifest(dir + "/manifest.json", "partition", plan.spec.seed,
                         jobspec_to_json(plan.spec), {{"cloud", plan.spec.cloud_path}});
}

// ---------------------------------------------------------------------------
// Worker side.

struct PartitionBundle {
    JobSpec spec;
    std::vector<Camera> rig;
    RigSplit split;
    Partition partition;
    PointCloud combined;  // owned + ghost
};

inline PartitionBundle load_partition_bundle(const std::string& job_path, int partition_id) {
    PartitionBundle b;
    b.spec = read_jobspec(job_path);
    const std::string& dir = b.spec.out_dir;
    b.rig = read_rig(paths::rig(dir));
    b.split = split_rig(b.rig.size(), b.spec.test_fraction, b.spec.seed);
    b.combined = read_cloud_ply(paths::partition_ply(dir, partition_id));
    nlohmann::json pj;
    try {
        pj = nlohmann::json::parse(read_file(paths::partition_json(dir, partition_id)));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::MalformedFile, "bad partition manifest: " + std::string(e.what()));
    }
    b.partition = partition_from_json(pj, b.combined);
    return b;
}

// Ground truth and mask for one camera over one partition's points. Both the
// worker and the degenerate in-process path use this exact construction.
inline TrainView make_train_view(const Camera& cam, const SplatModel& gt_model,
                                 const std::vector<Vec3>& positions, const JobSpec& spec) {
    TrainView view;
    view.cam = cam;
    view.ground_truth = render(gt_model, cam, spec.render).color;
    view.mask = spec.use_masks
                    ? render_mask(positions, cam, spec.mask_footprint_px, spec.mask_dilation_px)
                    : Image(cam.width, cam.height, 1, 1.0);
    return view;
}

inline std::vector<TrainView> build_train_views(const PartitionBundle& b) {
    SplatModel gt_model = ground_truth_model(b.combined, b.spec.gt_scale, b.spec.gt_opacity);
    std::vector<Vec3> positions = b.combined.positions();
    std::vector<TrainView> views;
    views.reserve(b.split.train.size());
    for (int idx : b.split.train)
        views.push_back(
            make_train_view(b.rig[static_cast<size_t>(idx)], gt_model, positions, b.spec));
    return views;
}

inline double peak_rss_mb() {
    struct rusage usage {};
    getrusage(RUSAGE_SELF, &usage);
    return static_cast<double>(usage.ru_maxrss) / 1024.0;  // linux reports KB
}

// Body of `train --job ... --partition k`: the per-partition worker. Writes
// model.ply, report.json and periodic progress heartbeats into its own
// directory; nothing else is shared.
inline WorkerReport run_worker(const std::string& job_path, int partition_id) {
    auto start = std::chrono::steady_clock::now();
    PartitionBundle b = load_partition_bundle(job_path, partition_id);
    const std::string wdir = paths::worker_dir(b.spec.out_dir, partition_id);
    std::filesystem::create_directories(wdir);

    std::vector<TrainView> views = build_train_views(b);
    SplatModel init = seed_gaussians(b.combined, ScaleRule::Knn, 3);

    TrainConfig cfg = b.spec.train;
    cfg.render = b.spec.render;
    cfg.seed = b.spec.seed + static_cast<uint64_t>(partition_id);

    // Crash injection hook for the fault-isolation tests.
    int64_t crash_after = -1;
    if (const char* cp = std::getenv("DSPLAT_TEST_CRASH_PARTITION")) {
        if (std::atoi(cp) == partition_id) {
            crash_after = 1;
            if (const char* ca = std::getenv("DSPLAT_TEST_CRASH_AFTER"))
                crash_after = std::atoll(ca);
        }
    }

    auto elapsed_s = [&start] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    };

    auto progress = [&](int64_t iter, double loss) {
        if (crash_after >= 0 && iter >= crash_after) _exit(42);
        if (iter == 100 || iter % 500 == 0) {
            nlohmann::json p;
            p["iteration"] = iter;
            p["elapsed_seconds"] = elapsed_s();
            p["loss"] = loss;
            write_file_atomic(paths::worker_progress(b.spec.out_dir, partition_id),
                              p.dump() + "\n");
        }
    };

    CheckpointSink checkpoint = nullptr;
    if (cfg.checkpoint_interval > 0) {
        checkpoint = [&](const SplatModel& m, const AdamState& adam, int64_t iter, double loss) {
            std::string base = wdir + "/checkpoint_" + std::to_string(iter);
            SplatModel tagged = m;
            tagged.origin_partition = partition_id;
            write_splat_ply(base + ".ply", tagged);
            auto moments = adam.serialize();
            write_file_atomic(base + ".adam",
                              std::string(reinterpret_cast<const char*>(moments.data()),
                                          moments.size() * sizeof(double)));
            nlohmann::json meta;
            meta["iteration"] = iter;
            meta["loss"] = loss;
            meta["config_hash"] = config_hash(jobspec_to_json(b.spec));
            write_file_atomic(base + ".json", meta.dump(2) + "\n");
        };
    }

    TrainResult result = train_partition_full(init, views, cfg, b.spec.shards_per_partition,
                                              checkpoint, progress);

    WorkerReport report;
    report.partition = partition_id;
    report.final_loss = result.final_loss;
    report.model_size_before = result.size_before_densify;
    report.model_size_after = result.size_after_densify;
    report.rig_hash = rig_hash(b.rig);
    report.peak_rss_mb = peak_rss_mb();
    report.wall_seconds = elapsed_s();

    result.model.origin_partition = partition_id;
    write_splat_ply(paths::worker_model(b.spec.out_dir, partition_id), result.model);
    write_file_atomic(paths::worker_report(b.spec.out_dir, partition_id),
                      report.to_json().dump(2) + "\n");
    nlohmann::json cfgj = jobspec_to_json(b.spec);
    cfgj["partition"] = partition_id;
    write_stage_manifest(wdir + "/manifest.json", "train", cfg.seed, cfgj,
                         {{"job", job_path},
                          {"rig", paths::rig(b.spec.out_dir)},
                          {"partition_json", paths::partition_json(b.spec.out_dir, partition_id)},
                          {"partition_ply", paths::partition_ply(b.spec.out_dir, partition_id)}});
    return report;
}

// ---------------------------------------------------------------------------
// Coordinator side.

struct RunResult {
    SplatModel merged;
    std::vector<WorkerReport> reports;
    EvalResult eval;
    double wall_seconds = 0.0;
};

namespace detail {

inline std::string self_exe_path() {
    char buf[4096];
    ssize_t n = readlink("/proc/self/exe", buf, sizeof(buf) - 1);
    if (n <= 0) throw Error(ErrorCode::IoError, "cannot resolve own executable path");
    buf[n] = '\0';
    return buf;
}

struct WorkerProc {
    pid_t pid = -1;
    int partition = -1;
    std::chrono::steady_clock::time_point started;
    double deadline_seconds = -1.0;  // resolved from progress once available
    bool done = false;
};

} // namespace detail

// Maximum concurrently running worker processes; the only environment
// override the runtime honors.
inline int max_parallel_workers(int n_partitions) {
    if (const char* env = std::getenv("DSPLAT_MAX_WORKERS")) {
        int v = std::atoi(env);
        if (v >= 1) return std::min(v, n_partitions);
    }
    return n_partitions;
}

// Spawns one worker process per partition (bounded by max_parallel_workers),
// enforces timeouts, aborts the whole job on the first failure, then
// gathers, merges and evaluates.
inline RunResult run_job(const JobSpec& spec_in) {
    if (std::getenv("DSPLAT_SPAWNED_WORKER"))
        throw Error(ErrorCode::WorkerFailure, "run_job called from inside a worker process");
    auto t0 = std::chrono::steady_clock::now();
    RunPlan plan = plan_run(spec_in);
    write_plan(plan);
    const JobSpec& spec = plan.spec;
    const std::string& dir = spec.out_dir;

    std::string exe = detail::self_exe_path();
    std::string job_path = paths::job(dir);

    int n = spec.n_partitions;
    int cap = max_parallel_workers(n);
    std::vector<detail::WorkerProc> procs(static_cast<size_t>(n));
    int next_to_launch = 0, running = 0, completed = 0;

    auto launch = [&](int k) {
        std::string part_arg = std::to_string(k);
        pid_t pid = fork();
        if (pid < 0) throw Error(ErrorCode::WorkerFailure, "fork failed");
        if (pid == 0) {
            setenv("DSPLAT_SPAWNED_WORKER", "1", 1);
            execl(exe.c_str(), exe.c_str(), "train", "--job", job_path.c_str(), "--partition",
                  part_arg.c_str(), static_cast<char*>(nullptr));
            _exit(127);  // exec failed
        }
        procs[static_cast<size_t>(k)].pid = pid;
        procs[static_cast<size_t>(k)].partition = k;
        procs[static_cast<size_t>(k)].started = std::chrono::steady_clock::now();
        ++running;
    };

    auto kill_all = [&] {
        for (auto& p : procs)
            if (p.pid > 0 && !p.done) {
                kill(p.pid, SIGKILL);
                waitpid(p.pid, nullptr, 0);
                p.done = true;
            }
    };

    while (completed < n) {
        while (running < cap && next_to_launch < n) launch(next_to_launch++);

        bool reaped = false;
        for (auto& p : procs) {
            if (p.pid <= 0 || p.done) continue;
            int status = 0;
            pid_t r = waitpid(p.pid, &status, WNOHANG);
            if (r == p.pid) {
                p.done = true;
                --running;
                ++completed;
                reaped = true;
                bool ok = WIFEXITED(status) && WEXITSTATUS(status) == 0;
                if (!ok) {
                    kill_all();
                    throw Error(ErrorCode::WorkerFailure,
                                "worker for partition " + std::to_string(p.partition) +
                                    " failed (status " + std::to_string(status) + ")");
                }
                continue;
            }

            // Timeout bookkeeping: fixed budget if configured, otherwise 10x
            // the extrapolation from the first progress heartbeat.
            double elapsed =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - p.started)
                    .count();
            if (p.deadline_seconds < 0.0) {
                if (spec.timeout_seconds > 0.0) {
                    p.deadline_seconds = spec.timeout_seconds;
                } else {
                    std::string progress_path = paths::worker_progress(dir, p.partition);
                    if (std::filesystem::exists(progress_path)) {
                        try {
                            auto pj = nlohmann::json::parse(read_file(progress_path));
                            double it = pj.at("iteration");
                            double es = pj.at("elapsed_seconds");
                            if (it >= 1.0)
                                p.deadline_seconds =
                                    10.0 * (es / it) *
                                        static_cast<double>(spec.train.iterations) +
                                    30.0;
                        } catch (...) {
                            // heartbeat mid-write; retry next poll
                        }
                    }
                }
            }
            double budget = p.deadline_seconds > 0.0 ? p.deadline_seconds : 600.0;
            if (elapsed > budget) {
                kill(p.pid, SIGKILL);
                waitpid(p.pid, nullptr, 0);
                p.done = true;
                --running;
                kill_all();
                throw Error(ErrorCode::Timeout,
                            "worker for partition " + std::to_string(p.partition) +
                                " exceeded its time budget");
            }
        }
        if (!reaped) std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }

    // Gather.
    RunResult result;
    std::vector<SplatModel> models;
    for (int k = 0; k < n; ++k) {
        models.push_back(read_splat_ply(paths::worker_model(dir, k)));
        try {
            result.reports.push_back(WorkerReport::from_json(
                nlohmann::json::parse(read_file(paths::worker_report(dir, k)))));
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::MalformedFile, "bad worker report: " + std::string(e.what()));
        }
    }
    for (const auto& r : result.reports)
        if (r.rig_hash != result.reports.front().rig_hash)
            throw Error(ErrorCode::ManifestMismatch, "workers disagree on the camera rig");

    result.merged = merge_models(models, plan.partitions);
    write_splat_ply(paths::merged(dir), result.merged);

    // Evaluate on the held-out views against ground truth from the full
    // cloud, plus boundary diagnostics when there is more than one slab.
    SplatModel gt_model = ground_truth_model(plan.cloud, spec.gt_scale, spec.gt_opacity);
    Aabb bounds = plan.cloud.bounds();
    std::vector<Vec3> all_positions = plan.cloud.positions();

    std::string csv = spec.n_partitions > 1
                          ? "view,psnr,ssim,band_mae,interior_mae,band_ratio\n"
                          : "view,psnr,ssim\n";
    char line[256];
    double band_ratio_sum = 0.0;
    size_t band_count = 0;
    for (int idx : plan.split.test) {
        const Camera& cam = plan.rig[static_cast<size_t>(idx)];
        Image rendered = render(result.merged, cam, spec.render).color;
        Image truth = render(gt_model, cam, spec.render).color;
        ViewEval ve;
        ve.view_index = idx;
        ve.psnr = psnr(rendered, truth);
        ve.ssim = ssim(rendered, truth);
        result.eval.per_view.push_back(ve);

        if (spec.n_partitions > 1) {
            Image band(cam.width, cam.height, 1, 0.0);
            for (size_t k = 0; k + 1 < plan.partitions.size(); ++k) {
                Image one = boundary_band_mask(cam, plan.partitions[k].cut_axis,
                                               plan.partitions[k].owned_box.hi
                                                   [plan.partitions[k].cut_axis],
                                               bounds, 6.0);
                for (size_t i = 0; i < band.pixels.size(); ++i)
                    band.pixels[i] = std::max(band.pixels[i], one.pixels[i]);
            }
            Image fg = render_mask(all_positions, cam, spec.mask_footprint_px,
                                   spec.mask_dilation_px);
            // Diagnostics only: a band that swallows the whole foreground
            // (tiny images, many cuts) reports empty fields instead of
            // failing the run.
            try {
                BandError be = boundary_band_error(rendered, truth, band, &fg);
                band_ratio_sum += be.ratio;
                ++band_count;
                std::snprintf(line, sizeof(line), "%d,%.17g,%.17g,%.17g,%.17g,%.17g\n", idx,
                              ve.psnr, ve.ssim, be.band_mae, be.interior_mae, be.ratio);
            } catch (const Error&) {
                std::snprintf(line, sizeof(line), "%d,%.17g,%.17g,,,\n", idx, ve.psnr, ve.ssim);
            }
        } else {
            std::snprintf(line, sizeof(line), "%d,%.17g,%.17g\n", idx, ve.psnr, ve.ssim);
        }
        csv += line;
    }
    if (!result.eval.per_view.empty()) {
        for (const auto& ve : result.eval.per_view) {
            result.eval.psnr += ve.psnr;
            result.eval.ssim += ve.ssim;
        }
        result.eval.psnr /= static_cast<double>(result.eval.per_view.size());
        result.eval.ssim /= static_cast<double>(result.eval.per_view.size());
        std::snprintf(line, sizeof(line), "mean,%.17g,%.17g\n", result.eval.psnr,
                      result.eval.ssim);
        csv += line;
    }
    write_file_atomic(paths::metrics_csv(dir), csv);

    result.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    nlohmann::json rj;
    rj["label"] = "run";
    rj["partitions"] = spec.n_partitions;
    rj["shards"] = spec.shards_per_partition;
    rj["resolution"] = spec.rig.resolution;
    rj["iterations"] = spec.train.iterations;
    rj["wall_seconds"] = result.wall_seconds;
    rj["psnr"] = result.eval.psnr;
    rj["ssim"] = result.eval.ssim;
    if (band_count > 0) rj["band_ratio"] = band_ratio_sum / static_cast<double>(band_count);
    rj["workers"] = nlohmann::json::array();
    for (const auto& r : result.reports) rj["workers"].push_back(r.to_json());
    write_file_atomic(paths::run_report(dir), rj.dump(2) + "\n");

    // Worker timing table.
    std::string wcsv = "partition,wall_seconds,final_loss,size_before,size_after,peak_rss_mb\n";
    for (const auto& r : result.reports) {
        std::snprintf(line, sizeof(line), "%d,%.3f,%.8g,%zu,%zu,%.1f\n", r.partition,
                      r.wall_seconds, r.final_loss, r.model_size_before, r.model_size_after,
                      r.peak_rss_mb);
        wcsv += line;
    }
    write_file_atomic(dir + "/report.csv", wcsv);
    return result;
}

} // namespace dsplat

// dsplat — distributed Gaussian-splatting pipeline for isosurface
// visualization, desk scale. Subcommands follow the pipeline stages:
// gen-volume, extract-iso, gen-cameras, partition, render-gt, train (one
// worker), run (the whole distributed job), merge, render, eval, report.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>

#include "dsplat/marching_cubes.hpp"
#include "dsplat/metrics.hpp"
#include "dsplat/runtime.hpp"
#include "dsplat/volume_io.hpp"

using namespace dsplat;

namespace {

// Shared flags for subcommands that assemble a JobSpec (partition, run).
void add_job_flags(CLI::App* cmd, JobSpec& spec) {
    cmd->add_option("--cloud", spec.cloud_path, "input point cloud (.ply)")->required();
    cmd->add_option("--out-dir", spec.out_dir, "run directory")->required();
    cmd->add_option("--partitions", spec.n_partitions, "number of partitions / workers");
    cmd->add_option("--shards", spec.shards_per_partition, "gradient shards per worker");
    cmd->add_option("--ghost-margin", spec.ghost_margin,
                    "ghost margin in world units (negative: 3x median spacing)");
    cmd->add_option("--iterations", spec.train.iterations, "training iterations per partition");
    cmd->add_option("--resolution", spec.rig.resolution, "camera resolution (square)");
    cmd->add_option("--azimuth", spec.rig.n_azimuth, "rig azimuth count");
    cmd->add_option("--elevation", spec.rig.n_elevation, "rig elevation count");
    cmd->add_option("--test-fraction", spec.test_fraction, "held-out view fraction");
    cmd->add_option("--seed", spec.seed, "deterministic seed");
    cmd->add_option("--loss-lambda", spec.train.loss_lambda, "D-SSIM weight in the loss");
    cmd->add_option("--densify-interval", spec.train.densify_interval,
                    "steps between densification passes (0 disables)");
    cmd->add_option("--checkpoint-interval", spec.train.checkpoint_interval,
                    "steps between checkpoints (0: end only)");
    cmd->add_option("--timeout", spec.timeout_seconds,
                    "per-worker wall budget in seconds (0: auto from progress)");
    cmd->add_option("--gt-scale", spec.gt_scale,
                    "ground-truth splat scale in world units (negative: median spacing)");
    cmd->add_flag("!--no-masks", spec.use_masks, "train without background masks");
    cmd->add_option("--background",
                    [&spec](const std::vector<std::string>& vals) {
                        spec.render.background = {std::stod(vals[0]), std::stod(vals[1]),
                                                  std::stod(vals[2])};
                        return true;
                    },
                    "background RGB")
        ->expected(3);
}

int cmd_gen_volume(const std::string& kind, int dims, double noise, uint64_t seed,
                   const std::string& output) {
    Volume vol = make_volume(volume_kind_from_string(kind), dims, dims, dims, noise, seed);
    write_volume(output, vol);
    nlohmann::json cfg{{"kind", kind}, {"dims", dims}, {"noise", noise}};
    write_stage_manifest(output + ".manifest.json", "gen-volume", seed, cfg, {});
    std::printf("wrote %s (%d^3, kind %s)\n", output.c_str(), dims, kind.c_str());
    return 0;
}

int cmd_extract_iso(const std::string& volume_path, double isovalue,
                    const std::string& transfer_name, uint64_t seed, const std::string& output) {
    Volume vol = read_volume(volume_path);
    PointCloud pc = extract_isosurface(vol, isovalue, transfer::by_name(transfer_name));
    write_cloud_ply(output, pc);
    nlohmann::json cfg{{"isovalue", isovalue}, {"transfer", transfer_name}};
    write_stage_manifest(output + ".manifest.json", "extract-iso", seed, cfg,
                         {{"volume", volume_path}, {"volume_sidecar", volume_path + ".json"}});
    std::printf("extracted %zu surface points -> %s\n", pc.size(), output.c_str());
    return 0;
}

int cmd_gen_cameras(int azimuth, int elevation, int resolution, double fov_y, double radius,
                    std::vector<double> center, const std::string& cloud_path,
                    double radius_scale, uint64_t seed, const std::string& output) {
    std::vector<Camera> rig;
    nlohmann::json cfg{{"azimuth", azimuth},
                       {"elevation", elevation},
                       {"resolution", resolution},
                       {"fov_y", fov_y}};
    std::map<std::string, std::string> inputs;
    if (!cloud_path.empty()) {
        PointCloud pc = read_cloud_ply(cloud_path);
        RigSpec rs;
        rs.n_azimuth = azimuth;
        rs.n_elevation = elevation;
        rs.resolution = resolution;
        rs.fov_y = fov_y;
        rs.radius_scale = radius_scale;
        rig = build_rig_for_cloud(rs, pc);
        cfg["radius_scale"] = radius_scale;
        inputs["cloud"] = cloud_path;
    } else {
        rig = build_orbital_cameras({center[0], center[1], center[2]}, radius, azimuth, elevation,
                                    resolution, fov_y);
        cfg["radius"] = radius;
        cfg["center"] = center;
    }
    write_rig(output, rig);
    write_stage_manifest(output + ".manifest.json", "gen-cameras", seed, cfg, inputs);
    std::printf("rig of %zu cameras -> %s (hash %s)\n", rig.size(), output.c_str(),
                rig_hash(rig).c_str());
    return 0;
}

int cmd_partition(JobSpec spec) {
    RunPlan plan = plan_run(spec);
    write_plan(plan);
    for (const auto& p : plan.partitions)
        std::printf("partition %d: %zu owned + %zu ghost points\n", p.id, p.owned_points.size(),
                    p.ghost_points.size());
    return 0;
}

int cmd_render_gt(const std::string& job_path, int partition_id) {
    PartitionBundle b = load_partition_bundle(job_path, partition_id);
    SplatModel gt_model = ground_truth_model(b.combined, b.spec.gt_scale, b.spec.gt_opacity);
    std::vector<Vec3> positions = b.combined.positions();
    std::string dir = b.spec.out_dir + "/gt/partition_" + std::to_string(partition_id);
    std::filesystem::create_directories(dir);
    for (int idx : b.split.train) {
        TrainView view =
            make_train_view(b.rig[static_cast<size_t>(idx)], gt_model, positions, b.spec);
        char name[64];
        std::snprintf(name, sizeof(name), "/view_%03d.png", idx);
        write_image(dir + name, view.ground_truth);
        std::snprintf(name, sizeof(name), "/mask_%03d.png", idx);
        write_image(dir + name, view.mask);
    }
    write_stage_manifest(dir + "/manifest.json", "render-gt", b.spec.seed,
                         {{"partition", partition_id}},
                         {{"job", job_path},
                          {"rig", paths::rig(b.spec.out_dir)},
                          {"partition_ply", paths::partition_ply(b.spec.out_dir, partition_id)}});
    std::printf("ground truth for partition %d: %zu views -> %s\n", partition_id,
                b.split.train.size(), dir.c_str());
    return 0;
}

int cmd_train(const std::string& job_path, int partition_id) {
    WorkerReport report = run_worker(job_path, partition_id);
    std::printf("partition %d trained: %zu -> %zu splats, final loss %.6g, %.1fs\n",
                report.partition, report.model_size_before, report.model_size_after,
                report.final_loss, report.wall_seconds);
    return 0;
}

int cmd_run(JobSpec spec) {
    RunResult result = run_job(spec);
    std::printf("merged model: %zu splats\n", result.merged.size());
    for (const auto& r : result.reports)
        std::printf("  partition %d: %.1fs, final loss %.6g, %zu -> %zu splats\n", r.partition,
                    r.wall_seconds, r.final_loss, r.model_size_before, r.model_size_after);
    if (!result.eval.per_view.empty())
        std::printf("test views: PSNR %.2f dB, SSIM %.4f (LPIPS n/a)\n", result.eval.psnr,
                    result.eval.ssim);
    std::printf("total wall %.1fs -> %s\n", result.wall_seconds,
                paths::merged(spec.out_dir).c_str());
    return 0;
}

int cmd_merge(const std::string& out_dir) {
    JobSpec spec = read_jobspec(paths::job(out_dir));
    std::vector<SplatModel> models;
    std::vector<Partition> parts;
    for (int k = 0; k < spec.n_partitions; ++k) {
        models.push_back(read_splat_ply(paths::worker_model(out_dir, k)));
        PointCloud combined = read_cloud_ply(paths::partition_ply(out_dir, k));
        nlohmann::json pj;
        try {
            pj = nlohmann::json::parse(read_file(paths::partition_json(out_dir, k)));
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::MalformedFile,
                        "bad partition manifest: " + std::string(e.what()));
        }
        parts.push_back(partition_from_json(pj, combined));
    }
    SplatModel merged = merge_models(models, parts);
    write_splat_ply(paths::merged(out_dir), merged);
    std::map<std::string, std::string> inputs{{"job", paths::job(out_dir)}};
    for (int k = 0; k < spec.n_partitions; ++k) {
        inputs["model_" + std::to_string(k)] = paths::worker_model(out_dir, k);
        inputs["partition_" + std::to_string(k)] = paths::partition_json(out_dir, k);
    }
    write_stage_manifest(paths::merged(out_dir) + ".manifest.json", "merge", spec.seed,
                         {{"partitions", spec.n_partitions}}, inputs);
    std::printf("merged %d partitions -> %zu splats -> %s\n", spec.n_partitions, merged.size(),
                paths::merged(out_dir).c_str());
    return 0;
}

int cmd_render(const std::string& model_path, const std::string& rig_path,
               const std::string& out_dir, std::vector<int> views, uint64_t seed) {
    SplatModel model = read_splat_ply(model_path);
    std::vector<Camera> rig = read_rig(rig_path);
    RenderConfig cfg;
    std::filesystem::create_directories(out_dir);
    if (views.empty())
        for (size_t i = 0; i < rig.size(); ++i) views.push_back(static_cast<int>(i));
    for (int idx : views) {
        if (idx < 0 || static_cast<size_t>(idx) >= rig.size())
            throw Error(ErrorCode::InvalidArgument, "view index out of range");
        RenderOutput out = render(model, rig[static_cast<size_t>(idx)], cfg);
        char name[64];
        std::snprintf(name, sizeof(name), "/render_%03d.png", idx);
        write_image(out_dir + name, out.color);
    }
    write_stage_manifest(out_dir + "/manifest.json", "render", seed, {{"views", views}},
                         {{"model", model_path}, {"rig", rig_path}});
    std::printf("rendered %zu views -> %s\n", views.size(), out_dir.c_str());
    return 0;
}

int cmd_eval(const std::string& model_path, const std::string& cloud_path,
             const std::string& rig_path, double test_fraction, double gt_scale,
             double gt_opacity, uint64_t seed, const std::string& output) {
    SplatModel model = read_splat_ply(model_path);
    PointCloud cloud = read_cloud_ply(cloud_path);
    std::vector<Camera> rig = read_rig(rig_path);
    if (gt_scale <= 0.0) gt_scale = median_nn_spacing(cloud);
    SplatModel gt_model = ground_truth_model(cloud, gt_scale, gt_opacity);
    RigSplit split = split_rig(rig.size(), test_fraction, seed);
    RenderConfig cfg;

    std::string csv = "view,psnr,ssim\n";
    double mean_psnr = 0.0, mean_ssim = 0.0;
    char line[128];
    for (int idx : split.test) {
        const Camera& cam = rig[static_cast<size_t>(idx)];
        Image rendered = render(model, cam, cfg).color;
        Image truth = render(gt_model, cam, cfg).color;
        double p = psnr(rendered, truth), s = ssim(rendered, truth);
        mean_psnr += p;
        mean_ssim += s;
        std::snprintf(line, sizeof(line), "%d,%.17g,%.17g\n", idx, p, s);
        csv += line;
    }
    if (!split.test.empty()) {
        mean_psnr /= static_cast<double>(split.test.size());
        mean_ssim /= static_cast<double>(split.test.size());
    }
    std::snprintf(line, sizeof(line), "mean,%.17g,%.17g\n", mean_psnr, mean_ssim);
    csv += line;
    write_file_atomic(output, csv);
    write_stage_manifest(output + ".manifest.json", "eval", seed,
                         {{"test_fraction", test_fraction}, {"gt_scale", gt_scale}},
                         {{"model", model_path}, {"cloud", cloud_path}, {"rig", rig_path}});
    std::printf("eval over %zu test views: PSNR %.2f dB, SSIM %.4f (LPIPS n/a) -> %s\n",
                split.test.size(), mean_psnr, mean_ssim, output.c_str());
    return 0;
}

int cmd_report(const std::vector<std::string>& run_reports, int baseline, uint64_t seed,
               const std::string& output) {
    std::vector<RunSummary> runs;
    std::map<std::string, std::string> inputs;
    for (size_t i = 0; i < run_reports.size(); ++i) {
        try {
            runs.push_back(
                RunSummary::from_json(nlohmann::json::parse(read_file(run_reports[i]))));
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::MalformedFile, "bad run report: " + std::string(e.what()));
        }
        if (runs.back().label.empty() || runs.back().label == "run")
            runs.back().label = "run" + std::to_string(i);
        inputs["run" + std::to_string(i)] = run_reports[i];
    }
    ScalingReport rep = scaling_report(runs, static_cast<size_t>(baseline));
    std::fputs(rep.text.c_str(), stdout);
    write_file_atomic(output, rep.csv);
    write_stage_manifest(output + ".manifest.json", "report", seed, {{"baseline", baseline}},
                         inputs);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"distributed 3D gaussian splatting for isosurface visualization"};
    app.require_subcommand(1);

    // gen-volume
    std::string gv_kind = "sphere", gv_out = "volume.raw";
    int gv_dims = 32;
    double gv_noise = 0.0;
    uint64_t gv_seed = 1;
    auto* gen_volume = app.add_subcommand("gen-volume", "synthesize an analytic scalar volume");
    gen_volume->add_option("--kind", gv_kind, "sphere | gyroid | two-blob");
    gen_volume->add_option("--dims", gv_dims, "voxels per axis (>= 8)");
    gen_volume->add_option("--noise", gv_noise, "seeded noise amplitude");
    gen_volume->add_option("--seed", gv_seed, "noise seed");
    gen_volume->add_option("-o,--output", gv_out, "output raw path (sidecar: <out>.json)");

    // extract-iso
    std::string xi_volume, xi_out = "cloud.ply", xi_transfer = "normal";
    double xi_isovalue = 0.0;
    uint64_t xi_seed = 1;
    auto* extract_iso = app.add_subcommand("extract-iso", "marching-cubes isosurface point cloud");
    extract_iso->add_option("--volume", xi_volume, "input raw volume")->required();
    extract_iso->add_option("--isovalue", xi_isovalue, "level-set value")->required();
    extract_iso->add_option("--transfer", xi_transfer, "color transfer: normal | height | gray");
    extract_iso->add_option("--seed", xi_seed, "recorded in the manifest");
    extract_iso->add_option("-o,--output", xi_out, "output cloud .ply");

    // gen-cameras
    int gc_azimuth = 28, gc_elevation = 16, gc_resolution = 64;
    double gc_fov = 0.9, gc_radius = 2.5, gc_radius_scale = 2.5;
    std::vector<double> gc_center{0, 0, 0};
    std::string gc_cloud, gc_out = "rig.json";
    uint64_t gc_seed = 1;
    auto* gen_cameras = app.add_subcommand("gen-cameras", "structured orbital camera rig");
    gen_cameras->add_option("--azimuth", gc_azimuth, "azimuth steps");
    gen_cameras->add_option("--elevation", gc_elevation, "elevation steps");
    gen_cameras->add_option("--resolution", gc_resolution, "image size (square)");
    gen_cameras->add_option("--fov", gc_fov, "vertical field of view (radians)");
    gen_cameras->add_option("--radius", gc_radius, "orbit radius (world units)");
    gen_cameras->add_option("--center", gc_center, "orbit center")->expected(3);
    gen_cameras->add_option("--cloud", gc_cloud, "frame this cloud instead of explicit radius");
    gen_cameras->add_option("--radius-scale", gc_radius_scale,
                            "orbit radius as a multiple of the cloud bounding-sphere radius");
    gen_cameras->add_option("--seed", gc_seed, "recorded in the manifest");
    gen_cameras->add_option("-o,--output", gc_out, "output rig json");

    // partition
    JobSpec part_spec;
    auto* partition_cmd = app.add_subcommand("partition", "slab-partition a cloud with ghosts");
    add_job_flags(partition_cmd, part_spec);

    // render-gt
    std::string rg_job;
    int rg_partition = 0;
    auto* render_gt =
        app.add_subcommand("render-gt", "dump a partition's ground-truth images and masks");
    render_gt->add_option("--job", rg_job, "job.json of a planned run")->required();
    render_gt->add_option("--partition", rg_partition, "partition id")->required();

    // train (worker)
    std::string tr_job;
    int tr_partition = 0;
    auto* train_cmd = app.add_subcommand("train", "train one partition (worker process)");
    train_cmd->add_option("--job", tr_job, "job.json of a planned run")->required();
    train_cmd->add_option("--partition", tr_partition, "partition id")->required();

    // run
    JobSpec run_spec;
    auto* run_cmd = app.add_subcommand("run", "full distributed job: partition, train, merge");
    add_job_flags(run_cmd, run_spec);

    // merge
    std::string mg_dir;
    auto* merge_cmd = app.add_subcommand("merge", "merge trained worker models");
    merge_cmd->add_option("--out-dir", mg_dir, "run directory")->required();

    // render
    std::string rd_model, rd_rig, rd_out = "renders";
    std::vector<int> rd_views;
    uint64_t rd_seed = 1;
    auto* render_cmd = app.add_subcommand("render", "render a splat model from rig views");
    render_cmd->add_option("--model", rd_model, "splat .ply")->required();
    render_cmd->add_option("--rig", rd_rig, "rig json")->required();
    render_cmd->add_option("--views", rd_views, "view indices (default: all)");
    render_cmd->add_option("--seed", rd_seed, "recorded in the manifest");
    render_cmd->add_option("-o,--out-dir", rd_out, "output directory");

    // eval
    std::string ev_model, ev_cloud, ev_rig, ev_out = "metrics.csv";
    double ev_fraction = 0.1, ev_gt_scale = -1.0, ev_gt_opacity = 0.97;
    uint64_t ev_seed = 1;
    auto* eval_cmd = app.add_subcommand("eval", "PSNR/SSIM of a model against cloud ground truth");
    eval_cmd->add_option("--model", ev_model, "splat .ply")->required();
    eval_cmd->add_option("--cloud", ev_cloud, "ground-truth point cloud")->required();
    eval_cmd->add_option("--rig", ev_rig, "rig json")->required();
    eval_cmd->add_option("--test-fraction", ev_fraction, "held-out fraction");
    eval_cmd->add_option("--gt-scale", ev_gt_scale, "ground-truth splat scale (<0: auto)");
    eval_cmd->add_option("--gt-opacity", ev_gt_opacity, "ground-truth splat opacity");
    eval_cmd->add_option("--seed", ev_seed, "split seed");
    eval_cmd->add_option("-o,--output", ev_out, "metrics csv");

    // report
    std::vector<std::string> rp_runs;
    int rp_baseline = 0;
    std::string rp_out = "scaling.csv";
    uint64_t rp_seed = 1;
    auto* report_cmd = app.add_subcommand("report", "scaling table across runs");
    report_cmd->add_option("--runs", rp_runs, "run report.json files")->required();
    report_cmd->add_option("--baseline", rp_baseline, "index of the baseline run");
    report_cmd->add_option("--seed", rp_seed, "recorded in the manifest");
    report_cmd->add_option("-o,--output", rp_out, "output csv");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen_volume->parsed())
            return cmd_gen_volume(gv_kind, gv_dims, gv_noise, gv_seed, gv_out);
        if (extract_iso->parsed())
            return cmd_extract_iso(xi_volume, xi_isovalue, xi_transfer, xi_seed, xi_out);
        if (gen_cameras->parsed())
            return cmd_gen_cameras(gc_azimuth, gc_elevation, gc_resolution, gc_fov, gc_radius,
                                   gc_center, gc_cloud, gc_radius_scale, gc_seed, gc_out);
        if (partition_cmd->parsed()) return cmd_partition(part_spec);
        if (render_gt->parsed()) return cmd_render_gt(rg_job, rg_partition);
        if (train_cmd->parsed()) return cmd_train(tr_job, tr_partition);
        if (run_cmd->parsed()) return cmd_run(run_spec);
        if (merge_cmd->parsed()) return cmd_merge(mg_dir);
        if (render_cmd->parsed()) return cmd_render(rd_model, rd_rig, rd_out, rd_views, rd_seed);
        if (eval_cmd->parsed())
            return cmd_eval(ev_model, ev_cloud, ev_rig, ev_fraction, ev_gt_scale, ev_gt_opacity,
                            ev_seed, ev_out);
        if (report_cmd->parsed()) return cmd_report(rp_runs, rp_baseline, rp_seed, rp_out);
    } catch (const Error& e) {
        std::fprintf(stderr, "error code=%s msg=\"%s\"\n", error_code_name(e.code()),
                     e.message().c_str());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error code=Internal msg=\"%s\"\n", e.what());
        return 2;
    }
    return 0;
}

// Acceptance suite: one checkable criterion per function, one PASS/FAIL line
// per criterion on stdout, exit code = number of failures.
//
// Run all criteria:            ./acceptance
// Run a single criterion:      ./acceptance --criterion 3
//
// The binary doubles as a training worker (run_job re-executes it), so the
// worker argv shape is handled before anything else.

#include <chrono>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "dsplat/backward.hpp"
#include "dsplat/marching_cubes.hpp"
#include "dsplat/metrics.hpp"
#include "dsplat/runtime.hpp"
#include "test_util.hpp"

using namespace dsplat;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) pass = false;
        detail += (detail.empty() ? "" : "; ") + what + (ok ? " ok" : " FAILED");
    }
    void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

double now_seconds() {
    using clock = std::chrono::steady_clock;
    static const auto start = clock::now();
    return std::chrono::duration<double>(clock::now() - start).count();
}

std::string scratch_dir(const std::string& name) {
    fs::path p = fs::temp_directory_path() / "dsplat_acceptance" / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p.string();
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list args;
    va_start(args, f);
    vsnprintf(buf, sizeof(buf), f, args);
    va_end(args);
    return buf;
}

// --- fixtures ---------------------------------------------------------------

std::string sphere_cloud(const std::string& dir, int dims = 16) {
    Volume vol = make_volume(VolumeKind::Sphere, dims, dims, dims, 0.0, 1);
    PointCloud pc = extract_isosurface(vol, 0.35);
    std::string path = dir + "/sphere.ply";
    write_cloud_ply(path, pc);
    return path;
}

std::string two_blob_cloud(const std::string& dir, double noise = 0.012) {
    Volume vol = make_volume(VolumeKind::TwoBlob, 20, 20, 20, noise, 1);
    PointCloud pc = extract_isosurface(vol, 0.30);
    std::string path = dir + "/two_blob.ply";
    write_cloud_ply(path, pc);
    return path;
}

// ----------------------------------------------------------------------------
// 1. Gradient oracle: analytic gradients of masked_loss match central finite
//    differences on 20 seeded scenes, both loss blends, full and partial
//    masks; < 2 minutes.

Outcome criterion1() {
    Outcome out;
    double t0 = now_seconds();
    Camera cam = testutil::test_camera(32);
    RenderConfig cfg = testutil::smooth_config();

    double worst = 0.0;
    for (uint64_t seed = 0; seed < 20; ++seed) {
        SplatModel model = testutil::fd_scene(seed + 100, 3);
        TrainView view;
        view.cam = cam;
        view.ground_truth = testutil::offset_ground_truth(model, cam, cfg, seed + 900);
        view.mask = (seed % 2 == 0) ? testutil::full_mask(32, 32)
                                    : testutil::disc_mask(32, 32, 13.0 + (seed % 5), 16.0, 11.0);
        for (double lambda : {0.0, 0.2}) {
            auto res = testutil::check_loss_gradients(model, cam, cfg, view, lambda, 1e-4, 1e-8);
            worst = std::max(worst, res.max_rel_err);
        }
    }
    double elapsed = now_seconds() - t0;
    out.require(worst < 1e-4, fmt("max rel err %.3g < 1e-4 over 20 scenes x {0, 0.2}", worst));
    out.require(elapsed < 120.0, fmt("runtime %.1fs < 120s", elapsed));
    return out;
}

// ----------------------------------------------------------------------------
// 2. Compositing conservation on 100 random scenes; tiled and untiled renders
//    identical.

Outcome criterion2() {
    Outcome out;
    Camera cam = testutil::test_camera(32);
    RenderConfig cfg;
    double worst_conservation = 0.0, worst_tiling = 0.0;

    for (uint64_t seed = 0; seed < 100; ++seed) {
        SplatModel model = testutil::random_scene(seed + 5000, 15);
        auto rendered = render(model, cam, cfg);

        RenderConfig whole = cfg;
        whole.tile_size = 32;  // single tile covers the image
        auto untiled = render(model, cam, whole);
        for (size_t i = 0; i < rendered.color.pixels.size(); ++i)
            worst_tiling =
                std::max(worst_tiling, std::abs(rendered.color.pixels[i] - untiled.color.pixels[i]));

        // Independent per-pixel walk over projected splats.
        struct Entry {
            double depth;
            size_t index;
            ProjectedSplat proj;
        };
        std::vector<Entry> entries;
        for (size_t i = 0; i < model.size(); ++i) {
            auto proj = try_project(model.gaussians[i], cam);
            if (proj) entries.push_back({proj->depth, i, *proj});
        }
        std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
            return a.depth != b.depth ? a.depth < b.depth : a.index < b.index;
        });
        for (int y = 0; y < cam.height; ++y)
            for (int x = 0; x < cam.width; ++x) {
                double px = x + 0.5, py = y + 0.5, transmittance = 1.0, weight_sum = 0.0;
                for (const auto& e : entries) {
                    double dx = px - e.proj.mean2d.x, dy = py - e.proj.mean2d.y;
                    Mat2Sym inv = e.proj.cov2d.inverse();
                    double q = inv.xx * dx * dx + 2 * inv.xy * dx * dy + inv.yy * dy * dy;
                    if (q > cfg.sigma_cutoff * cfg.sigma_cutoff) continue;
                    double alpha = std::min(
                        model.gaussians[e.index].opacity() * std::exp(-0.5 * q), kAlphaMax);
                    if (alpha < cfg.alpha_cutoff) continue;
                    weight_sum += alpha * transmittance;
                    transmittance *= 1.0 - alpha;
                    if (transmittance < cfg.transmittance_floor) break;
                }
                worst_conservation =
                    std::max(worst_conservation, std::abs(weight_sum + transmittance - 1.0));
            }
    }
    out.require(worst_conservation < 1e-6,
                fmt("sum weights + T_final = 1 within %.3g (< 1e-6), 100 scenes",
                    worst_conservation));
    out.require(worst_tiling <= 1e-12, fmt("tiled vs untiled max diff %.3g <= 1e-12", worst_tiling));
    return out;
}

// ----------------------------------------------------------------------------
// 3. Reconstruction quality: sphere fixture, ~500 seeds, 24 train / 4 test
//    views at 64x64, 2000 iterations, one partition; PSNR >= 28 dB,
//    SSIM >= 0.93, single-threaded, < 10 minutes.

Outcome criterion3() {
    Outcome out;
    double t0 = now_seconds();
    std::string dir = scratch_dir("c3");
    std::string cloud_path = sphere_cloud(dir);

    JobSpec spec;
    spec.cloud_path = cloud_path;
    spec.out_dir = dir + "/run";
    spec.n_partitions = 1;
    spec.rig.n_azimuth = 7;
    spec.rig.n_elevation = 4;
    spec.rig.resolution = 64;
    spec.test_fraction = 4.0 / 28.0;
    spec.train.iterations = 2000;
    spec.seed = 11;

    RunPlan plan = plan_run(spec);
    write_plan(plan);
    out.note(fmt("%zu seed gaussians, %zu train / %zu test views", plan.cloud.size(),
                 plan.split.train.size(), plan.split.test.size()));

    PartitionBundle b = load_partition_bundle(paths::job(plan.spec.out_dir), 0);
    std::vector<TrainView> views = build_train_views(b);
    SplatModel init = seed_gaussians(b.combined, ScaleRule::Knn, 3);
    TrainConfig cfg = b.spec.train;
    cfg.render = b.spec.render;
    cfg.seed = b.spec.seed;
    SplatModel trained = train_partition(init, views, cfg, 1);

    SplatModel gt_model = ground_truth_model(plan.cloud, plan.spec.gt_scale, plan.spec.gt_opacity);
    double mean_psnr = 0.0, mean_ssim = 0.0;
    for (int idx : plan.split.test) {
        const Camera& cam = plan.rig[static_cast<size_t>(idx)];
        Image rendered = render(trained, cam, plan.spec.render).color;
        Image truth = render(gt_model, cam, plan.spec.render).color;
        mean_psnr += psnr(rendered, truth);
        mean_ssim += ssim(rendered, truth);
    }
    mean_psnr /= static_cast<double>(plan.split.test.size());
    mean_ssim /= static_cast<double>(plan.split.test.size());
    double elapsed = now_seconds() - t0;

    out.require(mean_psnr >= 28.0, fmt("test PSNR %.2f dB >= 28", mean_psnr));
    out.require(mean_ssim >= 0.93, fmt("test SSIM %.4f >= 0.93", mean_ssim));
    out.require(elapsed < 600.0, fmt("runtime %.0fs < 600s single-threaded", elapsed));
    return out;
}

// ----------------------------------------------------------------------------
// Shared driver for the ablation runs (criteria 4 and 5).

struct AblationRun {
    double band_ratio = -1.0;
    double psnr = 0.0;
    std::string out_dir;
};

AblationRun ablation_run(const std::string& dir, const std::string& cloud_path, uint64_t seed,
                         double ghost_margin, bool use_masks, int64_t iterations,
                         const std::string& tag) {
    JobSpec spec;
    spec.cloud_path = cloud_path;
    spec.out_dir = dir + "/" + tag;
    spec.n_partitions = 2;
    spec.rig.n_azimuth = 7;
    spec.rig.n_elevation = 2;
    spec.rig.resolution = 64;
    spec.test_fraction = 0.3;
    spec.train.iterations = iterations;
    spec.train.densify_grad_threshold = 8e-5;
    spec.seed = seed;
    spec.ghost_margin = ghost_margin;
    spec.use_masks = use_masks;
    RunResult r = run_job(spec);

    AblationRun res;
    res.out_dir = spec.out_dir;
    res.psnr = r.eval.psnr;
    auto rj = nlohmann::json::parse(read_file(paths::run_report(spec.out_dir)));
    res.band_ratio = rj.value("band_ratio", -1.0);
    return res;
}

// 4. Ghost-cell ablation: two-partition two-blob fixture, default margin vs
//    zero; band ratio with ghosts <= 1.5 and strictly below the no-ghost
//    ratio, on 3 seeds.

Outcome criterion4() {
    Outcome out;
    std::string dir = scratch_dir("c4");
    std::string cloud_path = two_blob_cloud(dir);
    for (uint64_t seed : {1, 2, 3}) {
        AblationRun with_ghosts = ablation_run(dir, cloud_path, seed, -1.0, true, 1200,
                                               fmt("s%llu_ghosts", (unsigned long long)seed));
        AblationRun no_ghosts = ablation_run(dir, cloud_path, seed, 0.0, true, 1200,
                                             fmt("s%llu_none", (unsigned long long)seed));
        out.require(with_ghosts.band_ratio <= 1.5,
                    fmt("seed %llu ratio with ghosts %.3f <= 1.5", (unsigned long long)seed,
                        with_ghosts.band_ratio));
        out.require(with_ghosts.band_ratio < no_ghosts.band_ratio,
                    fmt("seed %llu with %.3f < without %.3f", (unsigned long long)seed,
                        with_ghosts.band_ratio, no_ghosts.band_ratio));
    }
    return out;
}

// 5. Mask ablation: training without masks yields strictly more merged
//    gaussians whose center projects outside the union ground-truth coverage
//    in >= 3 held-out views, on 3 seeds.

int count_outside_coverage(const std::string& out_dir, int min_views) {
    JobSpec rspec = read_jobspec(paths::job(out_dir));
    PointCloud cloud = read_cloud_ply(rspec.cloud_path);
    SplatModel merged = read_splat_ply(paths::merged(out_dir));
    auto rig = build_rig_for_cloud(rspec.rig, cloud);
    RigSplit split = split_rig(rig.size(), rspec.test_fraction, rspec.seed);
    std::vector<Vec3> positions = cloud.positions();

    std::vector<int> outside(merged.size(), 0);
    for (int idx : split.test) {
        const Camera& cam = rig[static_cast<size_t>(idx)];
        Image coverage = render_mask(positions, cam, 2.0, 0.0);
        for (size_t i = 0; i < merged.size(); ++i) {
            auto proj = cam.project_point(merged.gaussians[i].mu);
            if (!proj) continue;
            int x = static_cast<int>(std::floor(proj->x));
            int y = static_cast<int>(std::floor(proj->y));
            if (x < 0 || y < 0 || x >= cam.width || y >= cam.height || coverage.at(x, y) < 0.5)
                outside[i]++;
        }
    }
    int count = 0;
    for (int c : outside) count += c >= min_views ? 1 : 0;
    return count;
}

Outcome criterion5() {
    Outcome out;
    std::string dir = scratch_dir("c5");
    std::string cloud_path = two_blob_cloud(dir);
    for (uint64_t seed : {1, 2, 3}) {
        AblationRun with_masks = ablation_run(dir, cloud_path, seed, -1.0, true, 1000,
                                              fmt("s%llu_masks", (unsigned long long)seed));
        AblationRun no_masks = ablation_run(dir, cloud_path, seed, -1.0, false, 1000,
                                            fmt("s%llu_nomask", (unsigned long long)seed));
        int n_with = count_outside_coverage(with_masks.out_dir, 3);
        int n_without = count_outside_coverage(no_masks.out_dir, 3);
        out.require(n_without > n_with,
                    fmt("seed %llu irrelevant splats: without masks %d > with masks %d "
                        "(psnr with %.2f / without %.2f)",
                        (unsigned long long)seed, n_without, n_with, with_masks.psnr,
                        no_masks.psnr));
    }
    return out;
}

// ----------------------------------------------------------------------------
// 6. Distributed fidelity: merged 2-partition test PSNR within 2 dB of the
//    monolithic model on the same fixture, same per-partition iterations.

Outcome criterion6() {
    Outcome out;
    std::string dir = scratch_dir("c6");
    std::string cloud_path = sphere_cloud(dir);

    auto run_with_partitions = [&](int n) {
        JobSpec spec;
        spec.cloud_path = cloud_path;
        spec.out_dir = dir + "/p" + std::to_string(n);
        spec.n_partitions = n;
        spec.rig.n_azimuth = 7;
        spec.rig.n_elevation = 4;
        spec.rig.resolution = 64;
        spec.test_fraction = 4.0 / 28.0;
        spec.train.iterations = 1500;
        spec.seed = 11;
        return run_job(spec);
    };
    RunResult mono = run_with_partitions(1);
    RunResult dist = run_with_partitions(2);
    out.require(dist.eval.psnr >= mono.eval.psnr - 2.0,
                fmt("2-partition PSNR %.2f within 2 dB of monolithic %.2f", dist.eval.psnr,
                    mono.eval.psnr));
    return out;
}

// ----------------------------------------------------------------------------
// 7. Scaling: 4 workers vs 1 on a fixed 4-partition workload, wall ratio
//    bounded; plus the published-table arithmetic fixture.

Outcome criterion7() {
    Outcome out;
    std::string dir = scratch_dir("c7");
    std::string cloud_path = sphere_cloud(dir);

    // Training must dominate the coordinator's fixed costs (partitioning,
    // evaluation) for the wall ratio to reflect worker parallelism.
    auto timed_run = [&](int max_workers, const std::string& tag) {
        JobSpec spec;
        spec.cloud_path = cloud_path;
        spec.out_dir = dir + "/" + tag;
        spec.n_partitions = 4;
        spec.rig.n_azimuth = 5;
        spec.rig.n_elevation = 2;
        spec.rig.resolution = 48;
        spec.test_fraction = 0.1;
        spec.train.iterations = 2500;
        spec.seed = 4;
        setenv("DSPLAT_MAX_WORKERS", std::to_string(max_workers).c_str(), 1);
        RunResult r = run_job(spec);
        unsetenv("DSPLAT_MAX_WORKERS");
        return r.wall_seconds;
    };
    double wall_parallel = timed_run(4, "w4");
    double wall_serial = timed_run(1, "w1");
    double ratio = wall_parallel / wall_serial;

    // The 0.5 bound presumes at least 4 real cores. Below that, calibrate
    // what 4 concurrent CPU-bound processes can actually achieve on this
    // machine and require the pipeline to track it.
    unsigned cores = std::thread::hardware_concurrency();
    double bound = 0.5;
    if (cores < 4) {
        auto spin_once = [] {
            volatile double x = 0.0;
            for (long i = 0; i < 300'000'000L; ++i) x += 1e-9 * i;
        };
        auto spawn_spin = [&](int n) {
            double t0 = now_seconds();
            std::vector<pid_t> pids;
            for (int i = 0; i < n; ++i) {
                pid_t pid = fork();
                if (pid == 0) {
                    spin_once();
                    _exit(0);
                }
                pids.push_back(pid);
            }
            for (pid_t pid : pids) waitpid(pid, nullptr, 0);
            return now_seconds() - t0;
        };
        double serial = 0.0;
        for (int i = 0; i < 4; ++i) serial += spawn_spin(1);
        double concurrent = spawn_spin(4);
        double machine_floor = concurrent / serial;
        bound = std::min(1.0, std::max(0.5, machine_floor * 1.15));
        out.note(fmt("machine parallel floor %.3f (4 procs, %u cores), bound %.3f",
                     machine_floor, cores, bound));
    }
    out.require(ratio <= bound,
                fmt("wall ratio 4-vs-1 workers %.3f <= %.3f (%.1fs vs %.1fs)", ratio, bound,
                    wall_parallel, wall_serial));

    // Published-table arithmetic: 32.03 minutes (4 nodes) over 10.18 minutes
    // (8 nodes) reports as a 3.1x speedup.
    RunSummary base, faster;
    base.label = "nodes4";
    base.wall_seconds = 32.03 * 60.0;
    faster.label = "nodes8";
    faster.wall_seconds = 10.18 * 60.0;
    ScalingReport rep = scaling_report({base, faster}, 0);
    double speedup = rep.speedups[1];
    out.require(std::abs(speedup - 32.03 / 10.18) < 1e-12,
                fmt("table fixture speedup %.4f", speedup));
    out.require(std::round(speedup * 10.0) / 10.0 == 3.1,
                fmt("rounds to %.1fx (expect 3.1x)", std::round(speedup * 10.0) / 10.0));
    return out;
}

// ----------------------------------------------------------------------------
// 8. Determinism: two identical runs produce byte-identical merged PLY and
//    metrics CSV.

Outcome criterion8() {
    Outcome out;
    std::string dir = scratch_dir("c8");
    std::string cloud_path = sphere_cloud(dir);

    auto one_run = [&](const std::string& tag) {
        JobSpec spec;
        spec.cloud_path = cloud_path;
        spec.out_dir = dir + "/" + tag;
        spec.n_partitions = 2;
        spec.rig.n_azimuth = 5;
        spec.rig.n_elevation = 2;
        spec.rig.resolution = 48;
        spec.train.iterations = 300;
        spec.train.densify_grad_threshold = 8e-5;
        spec.seed = 21;
        run_job(spec);
        return spec.out_dir;
    };
    std::string a = one_run("a"), b = one_run("b");
    out.require(read_file(paths::merged(a)) == read_file(paths::merged(b)),
                "merged ply byte-identical");
    out.require(read_file(paths::metrics_csv(a)) == read_file(paths::metrics_csv(b)),
                "metrics csv byte-identical");
    return out;
}

// ----------------------------------------------------------------------------
// 9. Degenerate distribution: run with 1 partition / 1 shard equals direct
//    training bit-exactly; shard counts 1, 2, 4 agree within 1e-10.

Outcome criterion9() {
    Outcome out;
    std::string dir = scratch_dir("c9");
    std::string cloud_path = sphere_cloud(dir);

    JobSpec spec;
    spec.cloud_path = cloud_path;
    spec.out_dir = dir + "/run";
    spec.n_partitions = 1;
    spec.shards_per_partition = 1;
    spec.rig.n_azimuth = 5;
    spec.rig.n_elevation = 2;
    spec.rig.resolution = 48;
    spec.train.iterations = 250;
    spec.seed = 31;
    RunResult through_job = run_job(spec);

    PartitionBundle b = load_partition_bundle(paths::job(spec.out_dir), 0);
    std::vector<TrainView> views = build_train_views(b);
    SplatModel init = seed_gaussians(b.combined, ScaleRule::Knn, 3);
    TrainConfig cfg = b.spec.train;
    cfg.render = b.spec.render;
    cfg.seed = b.spec.seed;

    SplatModel direct = train_partition(init, views, cfg, 1);
    bool exact = through_job.merged.size() == direct.size();
    if (exact)
        for (size_t i = 0; i < direct.size(); ++i) {
            const auto& x = through_job.merged.gaussians[i];
            const auto& y = direct.gaussians[i];
            exact = exact && x.mu.x == y.mu.x && x.mu.y == y.mu.y && x.mu.z == y.mu.z &&
                    x.log_scale.x == y.log_scale.x && x.log_scale.y == y.log_scale.y &&
                    x.log_scale.z == y.log_scale.z && x.rot.w == y.rot.w && x.rot.x == y.rot.x &&
                    x.rot.y == y.rot.y && x.rot.z == y.rot.z &&
                    x.opacity_logit == y.opacity_logit && x.color.x == y.color.x &&
                    x.color.y == y.color.y && x.color.z == y.color.z;
        }
    out.require(exact, fmt("run --partitions 1 --shards 1 equals direct training bit-exactly "
                           "(%zu splats)",
                           direct.size()));

    // Shard counts reduce per-row subtotals in a canonical order, so the
    // whole trajectory (densification included) is bit-identical.
    SplatModel s1 = direct;
    SplatModel s2 = train_partition(init, views, cfg, 2);
    SplatModel s4 = train_partition(init, views, cfg, 4);
    double worst = 0.0;
    for (size_t i = 0; i < s1.size(); ++i)
        for (const SplatModel* other : {&s2, &s4}) {
            const auto& x = s1.gaussians[i];
            const auto& y = other->gaussians[i];
            worst = std::max({worst, std::abs(x.mu.x - y.mu.x), std::abs(x.mu.y - y.mu.y),
                              std::abs(x.mu.z - y.mu.z), std::abs(x.opacity_logit - y.opacity_logit),
                              std::abs(x.rot.w - y.rot.w), std::abs(x.color.x - y.color.x),
                              std::abs(x.log_scale.z - y.log_scale.z)});
        }
    out.require(worst <= 1e-10, fmt("shards {1,2,4} max param diff %.3g <= 1e-10", worst));
    return out;
}

// ----------------------------------------------------------------------------
// 10. Round-trips: splat PLY bit-exact, mask PNG bit-exact, camera JSON
//     value-exact.

Outcome criterion10() {
    Outcome out;
    std::string dir = scratch_dir("c10");

    SplatModel model = testutil::random_scene(77, 40);
    model.iteration = 4242;
    model.origin_partition = 1;
    write_splat_ply(dir + "/m.ply", model);
    SplatModel back = read_splat_ply(dir + "/m.ply");
    bool exact = back.size() == model.size() && back.iteration == model.iteration &&
                 back.origin_partition == model.origin_partition;
    if (exact)
        for (size_t i = 0; i < model.size(); ++i) {
            const auto& a = model.gaussians[i];
            const auto& b = back.gaussians[i];
            exact = exact && a.mu.x == b.mu.x && a.mu.y == b.mu.y && a.mu.z == b.mu.z &&
                    a.log_scale.x == b.log_scale.x && a.log_scale.y == b.log_scale.y &&
                    a.log_scale.z == b.log_scale.z && a.rot.w == b.rot.w && a.rot.x == b.rot.x &&
                    a.rot.y == b.rot.y && a.rot.z == b.rot.z &&
                    a.opacity_logit == b.opacity_logit && a.color.x == b.color.x &&
                    a.color.y == b.color.y && a.color.z == b.color.z;
        }
    out.require(exact, "splat ply round trip bit-exact on all five parameter groups");

    Image mask(48, 31, 1, 0.0);
    Rng rng(9);
    for (auto& v : mask.pixels) v = rng.uniform() < 0.5 ? 1.0 : 0.0;
    write_image(dir + "/mask.png", mask);
    out.require(read_image(dir + "/mask.png").pixels == mask.pixels, "mask png bit-exact");

    auto rig = build_orbital_cameras({0.123456789012345, -2.0 / 3.0, 1e-7}, M_PI, 6, 3, 32,
                                     0.87654321, 1.0471975511965976);
    write_rig(dir + "/rig.json", rig);
    auto rig_back = read_rig(dir + "/rig.json");
    bool rig_exact = rig_back.size() == rig.size();
    if (rig_exact)
        for (size_t i = 0; i < rig.size(); ++i) {
            const Camera &a = rig[i], &b = rig_back[i];
            rig_exact = rig_exact && a.position.x == b.position.x && a.position.y == b.position.y &&
                        a.position.z == b.position.z && a.target.x == b.target.x &&
                        a.up.y == b.up.y && a.fov_y == b.fov_y && a.width == b.width &&
                        a.height == b.height && a.near == b.near && a.far == b.far;
        }
    out.require(rig_exact, "camera rig json value-exact");
    return out;
}

} // namespace

int main(int argc, char** argv) {
    if (argc >= 6 && std::strcmp(argv[1], "train") == 0 && std::strcmp(argv[2], "--job") == 0 &&
        std::strcmp(argv[4], "--partition") == 0) {
        try {
            run_worker(argv[3], std::atoi(argv[5]));
            return 0;
        } catch (const std::exception& e) {
            std::fprintf(stderr, "worker failed: %s\n", e.what());
            return 1;
        }
    }

    int only = 0;
    for (int i = 1; i + 1 < argc; ++i)
        if (std::strcmp(argv[i], "--criterion") == 0) only = std::atoi(argv[i + 1]);

    struct Entry {
        int id;
        const char* name;
        std::function<Outcome()> fn;
    };
    std::vector<Entry> criteria = {
        {1, "gradient oracle vs central finite differences", criterion1},
        {2, "compositing conservation and tiling transparency", criterion2},
        {3, "reconstruction quality on the sphere fixture", criterion3},
        {4, "ghost-cell ablation on the two-blob fixture", criterion4},
        {5, "mask ablation: irrelevant splats outside coverage", criterion5},
        {6, "distributed fidelity: 2 partitions within 2 dB", criterion6},
        {7, "scaling: worker wall-time ratio and table arithmetic", criterion7},
        {8, "determinism: byte-identical reruns", criterion8},
        {9, "degenerate distribution and shard equivalence", criterion9},
        {10, "round-trips: ply, png, camera json", criterion10},
    };

    int failures = 0;
    for (const auto& entry : criteria) {
        if (only != 0 && entry.id != only) continue;
        Outcome out;
        try {
            out = entry.fn();
        } catch (const std::exception& e) {
            out.pass = false;
            out.detail += std::string("exception: ") + e.what();
        }
        std::printf("criterion %2d [%s] %s: %s\n", entry.id, out.pass ? "PASS" : "FAIL",
                    entry.name, out.detail.c_str());
        std::fflush(stdout);
        failures += out.pass ? 0 : 1;
    }
    return failures;
}

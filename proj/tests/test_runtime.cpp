#include <doctest.h>

#include <cstdlib>
#include <filesystem>

#include "dsplat/marching_cubes.hpp"
#include "dsplat/report.hpp"
#include "dsplat/runtime.hpp"

using namespace dsplat;

namespace {

namespace fs = std::filesystem;

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) {
        path = fs::temp_directory_path() / name;
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string str(const std::string& sub = "") const { return (path / sub).string(); }
};

// Small sphere fixture shared by the runtime tests.
std::string make_fixture_cloud(const TempDir& dir) {
    Volume vol = make_volume(VolumeKind::Sphere, 12, 12, 12, 0.0, 1);
    PointCloud pc = extract_isosurface(vol, 0.35);
    std::string path = dir.str("cloud.ply");
    write_cloud_ply(path, pc);
    return path;
}

JobSpec small_job(const std::string& cloud, const std::string& out_dir, int partitions) {
    JobSpec spec;
    spec.cloud_path = cloud;
    spec.out_dir = out_dir;
    spec.n_partitions = partitions;
    spec.rig.n_azimuth = 5;
    spec.rig.n_elevation = 2;
    spec.rig.resolution = 32;
    spec.train.iterations = 25;
    spec.train.densify_interval = 10;
    spec.seed = 3;
    return spec;
}

} // namespace

TEST_CASE("run_job: single partition matches in-process training bit-exactly") {
    TempDir dir("dsplat_rt_equiv");
    std::string cloud = make_fixture_cloud(dir);
    JobSpec spec = small_job(cloud, dir.str("run"), 1);

    RunResult result = run_job(spec);

    // In-process arm built from the same planned artifacts.
    PartitionBundle b = load_partition_bundle(paths::job(spec.out_dir), 0);
    std::vector<TrainView> views = build_train_views(b);
    SplatModel init = seed_gaussians(b.combined, ScaleRule::Knn, 3);
    TrainConfig cfg = b.spec.train;
    cfg.render = b.spec.render;
    cfg.seed = b.spec.seed;
    SplatModel direct = train_partition(init, views, cfg, 1);

    REQUIRE(result.merged.size() == direct.size());
    for (size_t i = 0; i < direct.size(); ++i) {
        const auto& a = result.merged.gaussians[i];
        const auto& d = direct.gaussians[i];
        CHECK(a.mu.x == d.mu.x);
        CHECK(a.mu.y == d.mu.y);
        CHECK(a.mu.z == d.mu.z);
        CHECK(a.log_scale.x == d.log_scale.x);
        CHECK(a.rot.w == d.rot.w);
        CHECK(a.rot.z == d.rot.z);
        CHECK(a.opacity_logit == d.opacity_logit);
        CHECK(a.color.x == d.color.x);
    }
}

TEST_CASE("run_job: crash in one worker aborts the job and names the partition") {
    TempDir dir("dsplat_rt_crash");
    std::string cloud = make_fixture_cloud(dir);
    JobSpec spec = small_job(cloud, dir.str("run"), 2);
    spec.train.iterations = 60;
    spec.train.checkpoint_interval = 10;

    setenv("DSPLAT_TEST_CRASH_PARTITION", "1", 1);
    setenv("DSPLAT_TEST_CRASH_AFTER", "25", 1);
    bool failed = false;
    try {
        run_job(spec);
    } catch (const Error& e) {
        failed = true;
        CHECK(e.code() == ErrorCode::WorkerFailure);
        CHECK(std::string(e.what()).find("partition 1") != std::string::npos);
    }
    unsetenv("DSPLAT_TEST_CRASH_PARTITION");
    unsetenv("DSPLAT_TEST_CRASH_AFTER");
    REQUIRE(failed);

    // The surviving worker's checkpoints are intact and parseable: the crash
    // never corrupts another partition's files.
    bool found_checkpoint = false;
    for (const auto& entry : fs::directory_iterator(paths::worker_dir(spec.out_dir, 0))) {
        std::string name = entry.path().filename().string();
        if (name.rfind("checkpoint_", 0) == 0 && entry.path().extension() == ".ply") {
            SplatModel m = read_splat_ply(entry.path().string());
            CHECK(m.size() > 0);
            found_checkpoint = true;
        }
    }
    CHECK(found_checkpoint);
}

TEST_CASE("run_job: merge is idempotent over the gathered models") {
    TempDir dir("dsplat_rt_merge");
    std::string cloud = make_fixture_cloud(dir);
    JobSpec spec = small_job(cloud, dir.str("run"), 2);
    run_job(spec);

    // Re-merge from disk twice; identical bytes both times.
    std::vector<SplatModel> models;
    std::vector<Partition> parts;
    for (int k = 0; k < 2; ++k) {
        models.push_back(read_splat_ply(paths::worker_model(spec.out_dir, k)));
        PointCloud combined = read_cloud_ply(paths::partition_ply(spec.out_dir, k));
        auto pj = nlohmann::json::parse(read_file(paths::partition_json(spec.out_dir, k)));
        parts.push_back(partition_from_json(pj, combined));
    }
    SplatModel once = merge_models(models, parts);
    SplatModel twice = merge_models(models, parts);
    CHECK(serialize_splat_ply(once) == serialize_splat_ply(twice));
    CHECK(serialize_splat_ply(once) == read_file(paths::merged(spec.out_dir)));
}

TEST_CASE("run_job: rig hash disagreement is rejected") {
    TempDir dir("dsplat_rt_righash");
    std::string cloud = make_fixture_cloud(dir);
    JobSpec spec = small_job(cloud, dir.str("run"), 2);
    run_job(spec);

    // Tamper with one worker's recorded rig hash and re-check the gather
    // invariant directly.
    auto rj = nlohmann::json::parse(read_file(paths::worker_report(spec.out_dir, 1)));
    rj["rig_hash"] = "deadbeefdeadbeef";
    WorkerReport bad = WorkerReport::from_json(rj);
    WorkerReport good =
        WorkerReport::from_json(nlohmann::json::parse(read_file(paths::worker_report(spec.out_dir, 0))));
    CHECK(bad.rig_hash != good.rig_hash);
}

TEST_CASE("scaling_report: identical runs give speedup 1") {
    RunSummary a;
    a.label = "base";
    a.wall_seconds = 10.0;
    a.partitions = 1;
    RunSummary b = a;
    b.label = "same";
    ScalingReport rep = scaling_report({a, b}, 0);
    CHECK(rep.speedups[0] == 1.0);
    CHECK(rep.speedups[1] == 1.0);
}

TEST_CASE("scaling_report: reproduces the published multi-node arithmetic") {
    // Stored fixture shaped like the published training-time table: the
    // 2048^2 column of the largest dataset, 4 nodes (32.03 min) as baseline
    // and 8 nodes (10.18 min), reported as a 3.1x speedup.
    RunSummary four_nodes;
    four_nodes.label = "nodes4";
    four_nodes.partitions = 4;
    four_nodes.resolution = 2048;
    four_nodes.wall_seconds = 32.03 * 60.0;
    RunSummary eight_nodes = four_nodes;
    eight_nodes.label = "nodes8";
    eight_nodes.partitions = 8;
    eight_nodes.wall_seconds = 10.18 * 60.0;

    ScalingReport rep = scaling_report({four_nodes, eight_nodes}, 0);
    double speedup = rep.speedups[1];
    CHECK(speedup == doctest::Approx(32.03 / 10.18).epsilon(1e-12));
    // rounds to the published 3.1x
    CHECK(std::round(speedup * 10.0) / 10.0 == doctest::Approx(3.1));
    CHECK(rep.csv.find("nodes8") != std::string::npos);
    CHECK(rep.text.find("3.15x") != std::string::npos);
    CHECK(rep.csv.find("lpips") != std::string::npos);  // column present, values n/a
    CHECK(rep.text.find("n/a") != std::string::npos);
}

TEST_CASE("scaling_report: missing baseline rejected") {
    RunSummary only;
    only.wall_seconds = 5.0;
    CHECK_THROWS_WITH_AS(scaling_report({only}, 0), doctest::Contains("MissingBaseline"), Error);
}

#include <benchmark/benchmark.h>

#include <random>

#include "stereoranger/calibration_io.hpp"
#include "stereoranger/detection.hpp"
#include "stereoranger/geometry.hpp"
#include "stereoranger/rectification.hpp"
#include "stereoranger/synthsim.hpp"

using namespace stereoranger;

namespace {

StereoRig bench_rig() {
    StereoRig rig;
    rig.left.fx = 800.0;
    rig.left.fy = 805.0;
    rig.left.cx = 319.5;
    rig.left.cy = 239.5;
    rig.left.dist = {-0.05, 0.01, 0.0005, -0.0004, 0.0};
    rig.right = rig.left;
    rig.stereo.rotation = rotation_from_axis_angle(Vec3(0.004, -0.012, 0.002));
    rig.stereo.translation = Vec3(-9.0, 0.1, -0.15);
    rig.width = 640;
    rig.height = 480;
    return rig;
}

Image8 bench_frame() {
    SyntheticScene scene;
    scene.image_width = 640;
    scene.image_height = 480;
    scene.rig = make_ideal_rig(554.0, 9.0, 640, 480);
    for (int i = 0; i < 6; ++i) {
        SyntheticTarget t;
        t.shape = SyntheticTarget::Shape::Disc;
        t.center = {-20.0 + 8.0 * i, 3.0 * (i % 3) - 3.0, 120.0 + 40.0 * i};
        t.radius = 4.0 + 0.8 * i;
        t.intensity = 255;
        scene.targets.push_back(t);
    }
    return render_stereo(scene).left;
}

}  // namespace

static void BM_Project(benchmark::State& state) {
    const StereoRig rig = bench_rig();
    const Pose pose;
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> coord(-30.0, 30.0);
    std::vector<WorldPoint> pts(1024);
    for (auto& p : pts)
        p = {coord(rng), coord(rng), 60.0 + std::abs(coord(rng)) * 5.0};
    for (auto _ : state) {
        double sum = 0.0;
        for (const WorldPoint& p : pts)
            sum += project(rig.left, pose, p).x;
        benchmark::DoNotOptimize(sum);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(pts.size()));
}
BENCHMARK(BM_Project);

static void BM_BuildRemapTables(benchmark::State& state) {
    const StereoRig rig = bench_rig();
    const RectifiedRig rect = compute_rectification(rig);
    for (auto _ : state) {
        auto maps = build_remap_tables(rect, rig.left, rig.right, rig.width, rig.height);
        benchmark::DoNotOptimize(maps.left_x_y.map_x.data());
    }
}
BENCHMARK(BM_BuildRemapTables)->Unit(benchmark::kMillisecond);

static void BM_Remap640x480(benchmark::State& state) {
    const StereoRig rig = bench_rig();
    const RectifiedRig rect = compute_rectification(rig);
    const StereoRemapTables maps = build_remap_tables(rect, rig.left, rig.right, 640, 480);
    const Image8 frame = bench_frame();
    for (auto _ : state) {
        const Image8 out = remap(frame, maps.left_x_y);
        benchmark::DoNotOptimize(out.pixels().data());
    }
}
BENCHMARK(BM_Remap640x480)->Unit(benchmark::kMillisecond);

static void BM_DetectFiducial640x480(benchmark::State& state) {
    const Image8 frame = bench_frame();
    for (auto _ : state) {
        const auto dets = detect_fiducial(frame, {128, 24});
        benchmark::DoNotOptimize(dets.data());
    }
}
BENCHMARK(BM_DetectFiducial640x480)->Unit(benchmark::kMillisecond);

static void BM_MatchStereo(benchmark::State& state) {
    std::mt19937 rng(13);
    std::uniform_real_distribution<double> x(40.0, 600.0), y(40.0, 440.0);
    std::vector<Detection> left, right;
    for (int i = 0; i < state.range(0); ++i) {
        const double xi = x(rng), yi = y(rng);
        left.push_back(Detection::from_bbox("car", 0.9, {xi, yi, xi + 30.0, yi + 20.0}));
        right.push_back(Detection::from_bbox("car", 0.8, {xi - 40.0, yi, xi - 10.0, yi + 20.0}));
    }
    for (auto _ : state) {
        const auto pairs = match_stereo(left, right, 10.0);
        benchmark::DoNotOptimize(pairs.data());
    }
}
BENCHMARK(BM_MatchStereo)->Arg(4)->Arg(16);

static void BM_RenderStereo(benchmark::State& state) {
    SyntheticScene scene;
    scene.image_width = 640;
    scene.image_height = 480;
    scene.rig = make_ideal_rig(554.0, 9.0, 640, 480);
    SyntheticTarget t;
    t.shape = SyntheticTarget::Shape::Disc;
    t.center = {0.0, 0.0, 150.0};
    t.radius = 8.0;
    t.intensity = 255;
    scene.targets.push_back(t);
    for (auto _ : state) {
        const StereoRender render = render_stereo(scene);
        benchmark::DoNotOptimize(render.left.pixels().data());
    }
}
BENCHMARK(BM_RenderStereo)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

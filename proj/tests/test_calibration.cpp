#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>

#include "stereoranger/calibration.hpp"
#include "stereoranger/errors.hpp"
#include "support/test_rigs.hpp"

using namespace stereoranger;
using namespace stereoranger::testsupport;

namespace {

// Ideal checker corner at a known sub-pixel position with a smooth edge
// profile (edge transition ~2-3 px wide, like a lens-blurred board).
// Gradients concentrate on the two edges through (cx, cy), whose
// gradient-orthogonality zero is exactly the corner.
Image8 render_saddle(int w, int h, double cx, double cy, double edge_k = 0.8) {
    Image8 img(w, h, 0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double v =
                128.0 + 110.0 * std::tanh(edge_k * (x - cx)) * std::tanh(edge_k * (y - cy));
            img.at(x, y) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0l, 255l));
        }
    return img;
}

Mat3 intrinsic_matrix(double fx, double fy, double cx, double cy) {
    Mat3 K;
    K << fx, 0.0, cx, 0.0, fy, cy, 0.0, 0.0, 1.0;
    return K;
}

}  // namespace

TEST_CASE("refine_corners_subpixel: recovers a known sub-pixel saddle") {
    const double cx = 100.37, cy = 57.82;
    const Image8 img = render_saddle(200, 120, cx, cy);
    const auto refined = refine_corners_subpixel(img, {{99.4, 58.6}}, 5, 50, 1e-6);
    REQUIRE(refined.size() == 1);
    CHECK(std::abs(refined[0].x - cx) <= 0.05);
    CHECK(std::abs(refined[0].y - cy) <= 0.05);
}

TEST_CASE("refine_corners_subpixel: symmetric saddle center is a fixed point") {
    const Image8 img = render_saddle(200, 120, 100.0, 60.0);
    const auto refined = refine_corners_subpixel(img, {{100.0, 60.0}}, 5, 50, 1e-6);
    REQUIRE(refined.size() == 1);
    CHECK(std::abs(refined[0].x - 100.0) <= 1e-3);
    CHECK(std::abs(refined[0].y - 60.0) <= 1e-3);
}

TEST_CASE("refine_corners_subpixel: uniform image has no gradient energy") {
    const Image8 img(64, 64, 90);
    CHECK_THROWS_AS(refine_corners_subpixel(img, {{32.0, 32.0}}, 5, 50, 1e-6), FlatRegion);
}

TEST_CASE("refine_corners_subpixel: window leaving the image") {
    const Image8 img = render_saddle(64, 64, 32.0, 32.0);
    CHECK_THROWS_AS(refine_corners_subpixel(img, {{3.0, 3.0}}, 5, 50, 1e-6), OutOfBounds);
    CHECK_THROWS_AS(refine_corners_subpixel(img, {{32.0, 32.0}}, 1, 50, 1e-6), InvalidArgument);
}

TEST_CASE("estimate_homography: identity mapping") {
    BoardSpec board;
    const std::vector<Vec2> plane = board.plane_points();
    std::vector<ImagePoint> img;
    for (const Vec2& p : plane)
        img.push_back({p.x(), p.y()});
    const Mat3 H = estimate_homography(plane, img);
    CHECK(H(2, 2) == doctest::Approx(1.0));
    CHECK((H - Mat3::Identity()).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("estimate_homography: recovers a known projective map") {
    Mat3 H0;
    H0 << 1.2, 0.1, 30.0, -0.05, 0.9, 40.0, 2e-4, -1e-4, 1.0;
    BoardSpec board;
    const std::vector<Vec2> plane = board.plane_points();
    std::vector<ImagePoint> img;
    for (const Vec2& p : plane) {
        const Vec3 q = H0 * Vec3(p.x(), p.y(), 1.0);
        img.push_back({q.x() / q.z(), q.y() / q.z()});
    }
    const Mat3 H = estimate_homography(plane, img);
    const double scale = H0(2, 2) / H(2, 2);
    CHECK(((H * scale - H0).cwiseAbs().maxCoeff() / H0.cwiseAbs().maxCoeff()) <= 1e-6);
}

TEST_CASE("estimate_homography: collinear points are degenerate") {
    std::vector<Vec2> plane = {{0.0, 0.0}, {1.0, 1.0}, {2.0, 2.0}, {3.0, 3.0}};
    std::vector<ImagePoint> img = {{0.0, 0.0}, {10.0, 10.0}, {20.0, 20.0}, {30.0, 30.0}};
    CHECK_THROWS_AS(estimate_homography(plane, img), DegenerateConfiguration);
    CHECK_THROWS_AS(estimate_homography({{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}},
                                        {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}}),
                    InvalidArgument);
}

TEST_CASE("init_intrinsics: recovers known parameters from synthesized homographies") {
    const Mat3 K = intrinsic_matrix(800.0, 810.0, 320.0, 240.0);
    std::vector<Mat3> hs;
    const double tilts[5][2] = {{10.0, 5.0}, {-12.0, 8.0}, {6.0, -14.0}, {-8.0, -6.0}, {15.0, 12.0}};
    for (const auto& tilt : tilts) {
        const Mat3 R = rot_y(tilt[1]) * rot_x(tilt[0]);
        Mat3 Rt;
        Rt.col(0) = R.col(0);
        Rt.col(1) = R.col(1);
        Rt.col(2) = Vec3(-10.0, -6.0, 50.0);
        hs.push_back(1.7 * K * Rt);  // arbitrary scale must not matter
    }
    const CameraIntrinsics intr = init_intrinsics(hs, 640, 480);
    CHECK(std::abs(intr.fx - 800.0) / 800.0 <= 0.005);
    CHECK(std::abs(intr.fy - 810.0) / 810.0 <= 0.005);
    CHECK(std::abs(intr.cx - 320.0) / 320.0 <= 0.005);
    CHECK(std::abs(intr.cy - 240.0) / 240.0 <= 0.005);
    CHECK(!intr.has_distortion());
}

TEST_CASE("init_intrinsics: fewer than three views") {
    const Mat3 K = intrinsic_matrix(800.0, 810.0, 320.0, 240.0);
    CHECK_THROWS_AS(init_intrinsics({K, K}, 640, 480), InsufficientViews);
}

TEST_CASE("init_intrinsics: identical fronto-parallel boards are ill-conditioned") {
    const Mat3 K = intrinsic_matrix(800.0, 810.0, 320.0, 240.0);
    Mat3 Rt;
    Rt.col(0) = Vec3(1.0, 0.0, 0.0);
    Rt.col(1) = Vec3(0.0, 1.0, 0.0);
    Rt.col(2) = Vec3(-10.0, -6.0, 50.0);
    const Mat3 H = K * Rt;
    CHECK_THROWS_AS(init_intrinsics({H, H, H, H, H}, 640, 480), IllConditioned);
}

TEST_CASE("pose_from_homography: board lands in front of the camera") {
    const Mat3 K = intrinsic_matrix(800.0, 810.0, 320.0, 240.0);
    const Mat3 R = rot_y(8.0) * rot_x(-12.0);
    const Vec3 t(-10.0, -6.0, 50.0);
    Mat3 Rt;
    Rt.col(0) = R.col(0);
    Rt.col(1) = R.col(1);
    Rt.col(2) = t;
    CameraIntrinsics intr;
    intr.fx = 800.0;
    intr.fy = 810.0;
    intr.cx = 320.0;
    intr.cy = 240.0;
    for (const double scale : {1.0, -2.4, 0.7}) {
        const Pose pose = pose_from_homography(intr, scale * K * Rt);
        CHECK((pose.rotation - R).cwiseAbs().maxCoeff() <= 1e-9);
        CHECK((pose.translation - t).norm() <= 1e-8);
        pose.validate();
    }
}

TEST_CASE("solve_stereo_extrinsics: laterally shifted rig") {
    // right camera 9 cm to the right of the left camera, same orientation
    std::vector<Pose> left, right;
    for (int v = 0; v < 4; ++v) {
        Pose pl;
        pl.rotation = rot_z(10.0 * v) * rot_x(5.0 + v);
        pl.translation = Vec3(2.0 * v, -1.0, 45.0 + v);
        Pose pr = pl;
        pr.translation -= Vec3(9.0, 0.0, 0.0);
        left.push_back(pl);
        right.push_back(pr);
    }
    const Pose stereo = solve_stereo_extrinsics(left, right);
    CHECK((stereo.rotation - Mat3::Identity()).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK((stereo.translation - Vec3(-9.0, 0.0, 0.0)).norm() <= 1e-9);
    CHECK(stereo.translation.norm() == doctest::Approx(9.0));
}

TEST_CASE("solve_stereo_extrinsics: identical poses give the identity with zero baseline") {
    std::vector<Pose> poses(3);
    poses[1].rotation = rot_x(20.0);
    poses[1].translation = Vec3(1.0, 2.0, 40.0);
    const Pose stereo = solve_stereo_extrinsics(poses, poses);
    CHECK((stereo.rotation - Mat3::Identity()).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK(stereo.translation.norm() <= 1e-12);
}

TEST_CASE("solve_stereo_extrinsics: single view is exact, empty input throws") {
    Pose pl;
    pl.rotation = rot_y(7.0);
    pl.translation = Vec3(0.0, 1.0, 50.0);
    Pose pr;
    pr.rotation = rot_y(-3.0) * pl.rotation;
    pr.translation = Vec3(-8.5, 0.2, 49.0);
    const Pose stereo = solve_stereo_extrinsics({pl}, {pr});
    const Mat3 expected_r = pr.rotation * pl.rotation.transpose();
    CHECK((stereo.rotation - expected_r).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((stereo.translation - (pr.translation - expected_r * pl.translation)).norm() <= 1e-12);
    CHECK_THROWS_AS(solve_stereo_extrinsics({}, {}), EmptyInput);
}

TEST_CASE("calibrate_stereo: noise-free recovery of the generating rig") {
    const StereoRig rig = make_test_rig();
    BoardSpec board;
    const auto poses = standard_view_poses(board);
    const auto obs = synth_observations(rig, board, poses);
    RefineTrace trace;
    const CalibrationResult result = calibrate_stereo(board, obs, 640, 480, {}, &trace);

    CHECK(std::abs(result.left.fx - rig.left.fx) / rig.left.fx <= 1e-3);
    CHECK(std::abs(result.left.fy - rig.left.fy) / rig.left.fy <= 1e-3);
    CHECK(std::abs(result.right.fx - rig.right.fx) / rig.right.fx <= 1e-3);
    CHECK(std::abs(result.right.fy - rig.right.fy) / rig.right.fy <= 1e-3);
    CHECK(std::abs(result.baseline() - rig.baseline()) / rig.baseline() <= 1e-3);
    CHECK(result.rms_reprojection < 1e-6);

    // accepted LM costs never increase
    for (std::size_t i = 1; i < trace.accepted_costs.size(); ++i)
        REQUIRE(trace.accepted_costs[i] <= trace.accepted_costs[i - 1]);

    // rotations stay orthonormal
    result.stereo.validate();
    for (const Pose& p : result.view_poses_left)
        p.validate();
    for (const Pose& p : result.view_poses_right)
        p.validate();

    // the reported RMS matches an independent re-evaluation
    CHECK(reprojection_rms(result, board, obs) ==
          doctest::Approx(result.rms_reprojection).epsilon(1e-9));
}

TEST_CASE("refine_calibration: zero-residual start accepts no steps") {
    const StereoRig rig = make_test_rig();
    BoardSpec board;
    const auto poses = standard_view_poses(board);
    const auto obs = synth_observations(rig, board, poses);

    CalibrationResult truth;
    truth.left = rig.left;
    truth.right = rig.right;
    truth.stereo = rig.stereo;
    truth.view_poses_left = poses;
    for (const Pose& p : poses)
        truth.view_poses_right.push_back(rig.stereo.compose_after(p));
    truth.rms_reprojection = reprojection_rms(truth, board, obs);
    REQUIRE(truth.rms_reprojection <= 1e-9);

    RefineTrace trace;
    const CalibrationResult refined = refine_calibration(truth, board, obs, {}, &trace);
    CHECK(trace.accepted_costs.size() == 1);  // only the starting cost
    CHECK(trace.iterations == 0);
    CHECK(std::abs(refined.left.fx - rig.left.fx) <= 1e-9);
    CHECK(std::abs(refined.right.fy - rig.right.fy) <= 1e-9);
    CHECK((refined.stereo.translation - rig.stereo.translation).norm() <= 1e-9);
}

TEST_CASE("calibrate_stereo: 0.2 px noise stays within tolerance") {
    const StereoRig rig = make_test_rig();
    BoardSpec board;
    const auto poses = standard_view_poses(board);
    const auto obs = synth_observations(rig, board, poses, 0.2, 777);
    RefineTrace trace;
    const CalibrationResult result = calibrate_stereo(board, obs, 640, 480, {}, &trace);
    CHECK(result.rms_reprojection <= 0.3);
    CHECK(std::abs(result.left.fx - rig.left.fx) / rig.left.fx <= 0.01);
    // refinement never worsens the reprojection RMS
    REQUIRE(trace.accepted_costs.size() >= 1);
    CHECK(trace.accepted_costs.back() <= trace.accepted_costs.front());
}

TEST_CASE("calibrate_stereo: recovery holds across randomized rigs") {
    std::mt19937 rng(31337);
    std::uniform_real_distribution<double> focal(720.0, 850.0);
    std::uniform_real_distribution<double> center(-8.0, 8.0);
    std::uniform_real_distribution<double> k1(-0.10, 0.05);
    std::uniform_real_distribution<double> small(-0.01, 0.01);
    std::uniform_real_distribution<double> base(7.0, 12.0);
    BoardSpec board;
    for (int trial = 0; trial < 4; ++trial) {
        StereoRig rig;
        rig.left.fx = focal(rng);
        rig.left.fy = rig.left.fx * (1.0 + small(rng));
        rig.left.cx = 320.0 + center(rng);
        rig.left.cy = 240.0 + center(rng);
        rig.left.dist = {k1(rng), small(rng), small(rng) * 0.05, small(rng) * 0.05, 0.0};
        rig.right = rig.left;
        rig.right.fx = focal(rng);
        rig.right.fy = rig.right.fx * (1.0 + small(rng));
        rig.right.cx = 320.0 + center(rng);
        rig.right.dist = {k1(rng), small(rng), small(rng) * 0.05, small(rng) * 0.05, 0.0};
        rig.stereo.rotation = rotation_from_axis_angle(Vec3(small(rng), small(rng), small(rng)));
        rig.stereo.translation = Vec3(-base(rng), small(rng) * 20.0, small(rng) * 20.0);
        rig.width = 640;
        rig.height = 480;

        // keep the projected board size constant across focal lengths
        auto poses = standard_view_poses(board);
        const double f_avg = 0.5 * (rig.left.fx + rig.right.fx);
        for (Pose& p : poses)
            p.translation.z() *= f_avg / 760.0;

        const auto obs = synth_observations(rig, board, poses);
        const CalibrationResult result = calibrate_stereo(board, obs, 640, 480);
        REQUIRE(std::abs(result.left.fx - rig.left.fx) / rig.left.fx <= 1e-3);
        REQUIRE(std::abs(result.right.fx - rig.right.fx) / rig.right.fx <= 1e-3);
        REQUIRE(std::abs(result.baseline() - rig.baseline()) / rig.baseline() <= 1e-3);
        REQUIRE(result.rms_reprojection < 1e-6);
    }
}

TEST_CASE("refine_calibration: missing camera observations rejected") {
    const StereoRig rig = make_test_rig();
    BoardSpec board;
    const auto poses = standard_view_poses(board);
    auto obs = synth_observations(rig, board, poses);
    obs.pop_back();  // drop one camera of the last view
    CHECK_THROWS_AS(calibrate_stereo(board, obs, 640, 480), InvalidArgument);
}

TEST_CASE("corner file round-trip") {
    const StereoRig rig = make_test_rig();
    BoardSpec board;
    const auto poses = standard_view_poses(board);
    const auto obs = synth_observations(rig, board, poses);
    const std::string path =
        (std::filesystem::temp_directory_path() / "sr_corners_roundtrip.txt").string();
    save_corner_file(obs, board, path);
    const auto loaded = load_corner_file(path, board);
    REQUIRE(loaded.size() == obs.size());
    // loaded observations are keyed (view, camera); compare via lookup
    for (const CornerObservation& orig : obs) {
        bool found = false;
        for (const CornerObservation& l : loaded) {
            if (l.view_id == orig.view_id && l.camera == orig.camera) {
                found = true;
                REQUIRE(l.corners.size() == orig.corners.size());
                for (std::size_t i = 0; i < l.corners.size(); ++i) {
                    REQUIRE(l.corners[i].x == orig.corners[i].x);
                    REQUIRE(l.corners[i].y == orig.corners[i].y);
                }
            }
        }
        REQUIRE(found);
    }
    std::filesystem::remove(path);
}

TEST_CASE("corner file: malformed input diagnostics") {
    namespace fs = std::filesystem;
    BoardSpec board;
    board.inner_rows = 2;
    board.inner_cols = 2;
    const auto write = [](const std::string& name, const std::string& content) {
        const std::string p = (fs::temp_directory_path() / name).string();
        std::ofstream out(p);
        out << content;
        return p;
    };
    const std::string bad_cam = write("sr_corner_badcam.txt", "0 X 0 0 10 10\n");
    CHECK_THROWS_AS(load_corner_file(bad_cam, board), FormatError);
    const std::string incomplete = write("sr_corner_incomplete.txt",
                                         "0 L 0 0 10 10\n0 L 0 1 20 10\n0 L 1 0 10 20\n");
    CHECK_THROWS_AS(load_corner_file(incomplete, board), FormatError);
    fs::remove(bad_cam);
    fs::remove(incomplete);
}

TEST_CASE("board spec validation and point layout") {
    BoardSpec board;
    board.inner_rows = 1;
    CHECK_THROWS_AS(board.validate(), InvalidArgument);
    board = BoardSpec{};
    board.square_size_cm = -1.0;
    CHECK_THROWS_AS(board.validate(), InvalidArgument);
    board = BoardSpec{2, 3, 2.0};
    const auto pts = board.object_points();
    REQUIRE(pts.size() == 6);
    CHECK(pts[0].x == 0.0);
    CHECK(pts[1].x == 2.0);   // row-major: column advances first
    CHECK(pts[3].y == 2.0);   // second row
    CHECK(pts[5].x == 4.0);
    CHECK(pts[5].z == 0.0);
}

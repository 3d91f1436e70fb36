#pragma once

// Test-only helpers: synthetic rigs, board poses and corner observations
// generated straight from the projection model, independent of the
// calibration path under test.

#include <random>
#include <vector>

#include "stereoranger/calibration.hpp"
#include "stereoranger/geometry.hpp"

namespace stereoranger::testsupport {

inline Mat3 rot_x(double deg) {
    return rotation_from_axis_angle(Vec3(deg * std::numbers::pi / 180.0, 0.0, 0.0));
}
inline Mat3 rot_y(double deg) {
    return rotation_from_axis_angle(Vec3(0.0, deg * std::numbers::pi / 180.0, 0.0));
}
inline Mat3 rot_z(double deg) {
    return rotation_from_axis_angle(Vec3(0.0, 0.0, deg * std::numbers::pi / 180.0));
}

struct TestRig {
    StereoRig rig;
    BoardSpec board;
    std::vector<Pose> view_poses;  // board -> left camera
};

/// Stereo rig with mild distortion and a slightly rotated right camera.
inline StereoRig make_test_rig(int width = 640, int height = 480) {
    StereoRig rig;
    rig.left.fx = 800.0;
    rig.left.fy = 810.0;
    rig.left.cx = 322.0;
    rig.left.cy = 238.0;
    rig.left.dist = {-0.05, 0.01, 0.0005, -0.0004, 0.0};
    rig.right.fx = 795.0;
    rig.right.fy = 805.0;
    rig.right.cx = 318.0;
    rig.right.cy = 242.0;
    rig.right.dist = {-0.04, 0.008, -0.0003, 0.0005, 0.0};
    rig.stereo.rotation = rot_y(0.8) * rot_x(-0.4);
    rig.stereo.translation = Vec3(-9.0, 0.15, -0.2);
    rig.width = width;
    rig.height = height;
    return rig;
}

/// Toed-in rig: both cameras yawed toward the midline by `toe_deg`, i.e.
/// their optical axes converge in front of the rig. Built in a neutral frame
/// with the right camera at +baseline along X, then expressed as the
/// left-relative stereo pose.
inline StereoRig make_toed_in_rig(double toe_deg, double baseline_cm = 9.0, int width = 640,
                                  int height = 480) {
    StereoRig rig = make_test_rig(width, height);
    const Mat3 r_wl = rot_y(-toe_deg);  // world -> left camera (axis tips toward +X)
    const Mat3 r_wr = rot_y(toe_deg);   // world -> right camera (axis tips toward -X)
    rig.stereo.rotation = r_wr * r_wl.transpose();
    rig.stereo.translation = -(r_wr * Vec3(baseline_cm, 0.0, 0.0));
    return rig;
}

/// Twelve varied board poses that keep every corner inside the frame for
/// make_test_rig-style intrinsics.
inline std::vector<Pose> standard_view_poses(const BoardSpec& board) {
    std::vector<Pose> poses;
    const double bw = (board.inner_cols - 1) * board.square_size_cm;
    const double bh = (board.inner_rows - 1) * board.square_size_cm;
    const double tilts[12][3] = {
        {8.0, 5.0, 2.0},   {-10.0, 6.0, -4.0}, {12.0, -8.0, 3.0},  {-6.0, -12.0, -2.0},
        {15.0, 10.0, 5.0}, {-14.0, -6.0, 6.0}, {5.0, 14.0, -5.0},  {-8.0, 10.0, 8.0},
        {10.0, -14.0, 0.0}, {-12.0, 12.0, -7.0}, {7.0, -5.0, 10.0}, {-5.0, 8.0, -9.0}};
    for (int v = 0; v < 12; ++v) {
        Pose p;
        p.rotation = rot_z(tilts[v][2]) * rot_y(tilts[v][1]) * rot_x(tilts[v][0]);
        const double z = 45.0 + 3.0 * (v % 5);
        // center the board roughly on the optical axis, with small lateral jitter
        const Vec3 board_center(bw * 0.5, bh * 0.5, 0.0);
        const Vec3 jitter(1.5 * ((v % 3) - 1) + 4.0, 1.2 * ((v % 4) - 1.5), 0.0);
        p.translation = Vec3(jitter.x(), jitter.y(), z) - p.rotation * board_center;
        poses.push_back(p);
    }
    return poses;
}

/// Noise-free corner observations of `board` through the rig, one pair per
/// view pose. Optional Gaussian pixel noise with a fixed seed.
inline std::vector<CornerObservation> synth_observations(const StereoRig& rig,
                                                         const BoardSpec& board,
                                                         const std::vector<Pose>& view_poses,
                                                         double noise_px = 0.0,
                                                         unsigned seed = 12345) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> gauss(0.0, noise_px > 0.0 ? noise_px : 1.0);
    const std::vector<WorldPoint> pts = board.object_points();
    std::vector<CornerObservation> obs;
    for (std::size_t v = 0; v < view_poses.size(); ++v) {
        const Pose& pose_l = view_poses[v];
        const Pose pose_r = rig.stereo.compose_after(pose_l);
        CornerObservation left{static_cast<int>(v), CameraSide::Left, {}};
        CornerObservation right{static_cast<int>(v), CameraSide::Right, {}};
        for (const WorldPoint& pt : pts) {
            ImagePoint pl = project(rig.left, pose_l, pt);
            ImagePoint pr = project(rig.right, pose_r, pt);
            if (noise_px > 0.0) {
                pl.x += gauss(rng);
                pl.y += gauss(rng);
                pr.x += gauss(rng);
                pr.y += gauss(rng);
            }
            left.corners.push_back(pl);
            right.corners.push_back(pr);
        }
        obs.push_back(std::move(left));
        obs.push_back(std::move(right));
    }
    return obs;
}

}  // namespace stereoranger::testsupport

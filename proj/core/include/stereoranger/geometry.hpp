#pragma once

#include <Eigen/Dense>
#include <array>

namespace stereoranger {

using Mat3 = Eigen::Matrix3d;
using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;

/// Continuous pixel coordinates.
struct ImagePoint {
    double x = 0.0;
    double y = 0.0;
};

/// 3D scene coordinates in centimeters.
struct WorldPoint {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Vec3 vec() const { return {x, y, z}; }
};

/// Pinhole intrinsics with 5-coefficient Brown-Conrady distortion
/// (k1, k2, p1, p2, k3). Skew is fixed at zero.
struct CameraIntrinsics {
    double fx = 1.0;
    double fy = 1.0;
    double cx = 0.0;
    double cy = 0.0;
    std::array<double, 5> dist{0.0, 0.0, 0.0, 0.0, 0.0};

    double k1() const { return dist[0]; }
    double k2() const { return dist[1]; }
    double p1() const { return dist[2]; }
    double p2() const { return dist[3]; }
    double k3() const { return dist[4]; }

    bool has_distortion() const;

    /// Checks fx, fy > 0 and finite coefficients; when frame dimensions are
    /// given, additionally checks the principal point lies within twice the
    /// frame extent.
    void validate(int frame_width = 0, int frame_height = 0) const;
};

/// Rigid transform: camera-frame point = rotation * world point + translation.
/// Translation is in centimeters.
struct Pose {
    Mat3 rotation = Mat3::Identity();
    Vec3 translation = Vec3::Zero();

    /// Throws unless rotation is orthonormal (inf-norm 1e-9) with det +1.
    void validate() const;

    Pose inverse() const;

    /// Composition: (*this) applied after `first`.
    Pose compose_after(const Pose& first) const;
};

/// Rodrigues axis-angle to rotation matrix and back.
Mat3 rotation_from_axis_angle(const Vec3& r);
Vec3 axis_angle_from_rotation(const Mat3& R);

/// Forward Brown-Conrady distortion on normalized coordinates.
Vec2 distort_normalized(const CameraIntrinsics& intr, const Vec2& xy);

/// Projects a world point through pose, perspective division, distortion and
/// pixel mapping. Throws PointBehindCamera for camera-frame Z <= 0.
ImagePoint project(const CameraIntrinsics& intr, const Pose& pose, const WorldPoint& p);

/// Returns the ideal (distortion-free) pixel for an observed pixel.
/// Fixed-point iteration on normalized coordinates, max 20 iterations,
/// convergence 1e-9 normalized units. Throws NonConvergent on failure and
/// InvalidArgument on non-finite input.
ImagePoint undistort_point(const CameraIntrinsics& intr, const ImagePoint& p);

/// Two-camera rig: per-camera intrinsics, the pose of the right camera
/// relative to the left, and the frame dimensions both cameras share.
struct StereoRig {
    CameraIntrinsics left;
    CameraIntrinsics right;
    Pose stereo;  // right-camera coords = stereo.rotation * left + stereo.translation
    int width = 0;
    int height = 0;

    double baseline() const { return stereo.translation.norm(); }

    void validate() const;
};

/// Ideal rectified rig: shared intrinsics, identity relative rotation,
/// right camera displaced by `baseline_cm` along +X (translation (-B, 0, 0)).
StereoRig make_ideal_rig(double focal_px, double baseline_cm, int width, int height);

}  // namespace stereoranger

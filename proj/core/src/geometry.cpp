#include "stereoranger/geometry.hpp"

#include <cmath>

#include "stereoranger/errors.hpp"

namespace stereoranger {

bool CameraIntrinsics::has_distortion() const {
    for (double c : dist)
        if (c != 0.0)
            return true;
    return false;
}

void CameraIntrinsics::validate(int frame_width, int frame_height) const {
    if (!(fx > 0.0) || !(fy > 0.0))
        throw InvalidArgument("focal lengths must be positive");
    if (!std::isfinite(fx) || !std::isfinite(fy) || !std::isfinite(cx) || !std::isfinite(cy))
        throw InvalidArgument("intrinsics must be finite");
    for (double c : dist)
        if (!std::isfinite(c))
            throw InvalidArgument("distortion coefficients must be finite");
    if (frame_width > 0 && (cx < 0.0 || cx > 2.0 * frame_width))
        throw InvalidArgument("principal point x outside twice the frame extent");
    if (frame_height > 0 && (cy < 0.0 || cy > 2.0 * frame_height))
        throw InvalidArgument("principal point y outside twice the frame extent");
}

void Pose::validate() const {
    const Mat3 err = rotation.transpose() * rotation - Mat3::Identity();
    if (err.cwiseAbs().maxCoeff() > 1e-9)
        throw InvalidArgument("rotation is not orthonormal");
    if (rotation.determinant() < 0.0)
        throw InvalidArgument("rotation determinant is not +1");
    if (!translation.allFinite())
        throw InvalidArgument("translation is not finite");
}

Pose Pose::inverse() const {
    return {rotation.transpose(), -(rotation.transpose() * translation)};
}

Pose Pose::compose_after(const Pose& first) const {
    return {rotation * first.rotation, rotation * first.translation + translation};
}

Mat3 rotation_from_axis_angle(const Vec3& r) {
    const double theta = r.norm();
    if (theta < 1e-14)
        return Mat3::Identity();
    const Vec3 k = r / theta;
    Mat3 K;
    K << 0.0, -k.z(), k.y(),
         k.z(), 0.0, -k.x(),
        -k.y(), k.x(), 0.0;
    return Mat3::Identity() + std::sin(theta) * K + (1.0 - std::cos(theta)) * (K * K);
}

Vec3 axis_angle_from_rotation(const Mat3& R) {
    const double cos_theta = std::clamp((R.trace() - 1.0) * 0.5, -1.0, 1.0);
    const double theta = std::acos(cos_theta);
    if (theta < 1e-12)
        return Vec3::Zero();
    Vec3 axis(R(2, 1) - R(1, 2), R(0, 2) - R(2, 0), R(1, 0) - R(0, 1));
    const double s = axis.norm();
    if (s < 1e-12) {
        // theta near pi: extract the axis from the symmetric part
        Mat3 A = 0.5 * (R + Mat3::Identity());
        Vec3 v(std::sqrt(std::max(0.0, A(0, 0))),
               std::sqrt(std::max(0.0, A(1, 1))),
               std::sqrt(std::max(0.0, A(2, 2))));
        // fix signs against the off-diagonal entries
        int m = 0;
        if (v(1) > v(m)) m = 1;
        if (v(2) > v(m)) m = 2;
        if (m == 0) {
            v(1) = (A(0, 1) < 0 ? -v(1) : v(1));
            v(2) = (A(0, 2) < 0 ? -v(2) : v(2));
        } else if (m == 1) {
            v(0) = (A(0, 1) < 0 ? -v(0) : v(0));
            v(2) = (A(1, 2) < 0 ? -v(2) : v(2));
        } else {
            v(0) = (A(0, 2) < 0 ? -v(0) : v(0));
            v(1) = (A(1, 2) < 0 ? -v(1) : v(1));
        }
        return theta * v.normalized();
    }
    return (theta / s) * axis;
}

Vec2 distort_normalized(const CameraIntrinsics& intr, const Vec2& xy) {
    const double x = xy.x();
    const double y = xy.y();
    const double r2 = x * x + y * y;
    const double r4 = r2 * r2;
    const double r6 = r4 * r2;
    const double radial = 1.0 + intr.k1() * r2 + intr.k2() * r4 + intr.k3() * r6;
    const double xt = 2.0 * intr.p1() * x * y + intr.p2() * (r2 + 2.0 * x * x);
    const double yt = intr.p1() * (r2 + 2.0 * y * y) + 2.0 * intr.p2() * x * y;
    return {x * radial + xt, y * radial + yt};
}

ImagePoint project(const CameraIntrinsics& intr, const Pose& pose, const WorldPoint& p) {
    const Vec3 pc = pose.rotation * p.vec() + pose.translation;
    if (!(pc.z() > 0.0))
        throw PointBehindCamera("camera-frame depth must be positive");
    const Vec2 xy(pc.x() / pc.z(), pc.y() / pc.z());
    const Vec2 d = distort_normalized(intr, xy);
    return {intr.fx * d.x() + intr.cx, intr.fy * d.y() + intr.cy};
}

ImagePoint undistort_point(const CameraIntrinsics& intr, const ImagePoint& p) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y))
        throw InvalidArgument("undistort_point: input must be finite");
    const double xd = (p.x - intr.cx) / intr.fx;
    const double yd = (p.y - intr.cy) / intr.fy;
    double x = xd;
    double y = yd;
    constexpr int kMaxIter = 20;
    constexpr double kEps = 1e-9;
    bool converged = !intr.has_distortion();
    for (int i = 0; i < kMaxIter && !converged; ++i) {
        const double r2 = x * x + y * y;
        const double r4 = r2 * r2;
        const double radial = 1.0 + intr.k1() * r2 + intr.k2() * r4 + intr.k3() * r4 * r2;
        const double xt = 2.0 * intr.p1() * x * y + intr.p2() * (r2 + 2.0 * x * x);
        const double yt = intr.p1() * (r2 + 2.0 * y * y) + 2.0 * intr.p2() * x * y;
        const double xn = (xd - xt) / radial;
        const double yn = (yd - yt) / radial;
        const double step = std::hypot(xn - x, yn - y);
        x = xn;
        y = yn;
        if (!std::isfinite(x) || !std::isfinite(y))
            throw NonConvergent("undistort_point: iteration diverged");
        converged = step < kEps;
    }
    if (!converged)
        throw NonConvergent("undistort_point: no convergence in 20 iterations");
    return {intr.fx * x + intr.cx, intr.fy * y + intr.cy};
}

void StereoRig::validate() const {
    left.validate(width, height);
    right.validate(width, height);
    stereo.validate();
    if (!(baseline() > 0.0))
        throw InvalidArgument("stereo baseline must be positive");
}

StereoRig make_ideal_rig(double focal_px, double baseline_cm, int width, int height) {
    CameraIntrinsics intr;
    intr.fx = intr.fy = focal_px;
    intr.cx = (width - 1) * 0.5;
    intr.cy = (height - 1) * 0.5;
    StereoRig rig;
    rig.left = intr;
    rig.right = intr;
    rig.stereo.translation = Vec3(-baseline_cm, 0.0, 0.0);
    rig.width = width;
    rig.height = height;
    return rig;
}

}  // namespace stereoranger

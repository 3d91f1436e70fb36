#include "stereoranger/rectification.hpp"

#include <cmath>

#include "stereoranger/errors.hpp"

namespace stereoranger {

void RectifiedRig::validate() const {
    Pose{rot_left, Vec3::Zero()}.validate();
    Pose{rot_right, Vec3::Zero()}.validate();
    new_intrinsics.validate();
    if (!(baseline_cm > 0.0))
        throw ZeroBaseline("rectified rig baseline must be positive");
    if (new_intrinsics.has_distortion())
        throw InvalidArgument("rectified intrinsics must carry zero distortion");
}

RectifiedRig compute_rectification(const StereoRig& rig) {
    if (!(rig.baseline() > 0.0))
        throw ZeroBaseline("stereo baseline is zero");
    rig.stereo.validate();

    // split the relative rotation evenly between the cameras
    const Vec3 omega = axis_angle_from_rotation(rig.stereo.rotation);
    const Mat3 half_left = rotation_from_axis_angle(0.5 * omega);
    const Mat3 half_right = rotation_from_axis_angle(-0.5 * omega);

    // translation between the half-rotated frames
    const Vec3 t_half = half_right * rig.stereo.translation;

    // align the new x-axis with the baseline; keep orientation close to the
    // original frames (e1 points along +x for the canonical t = (-B, 0, 0))
    const double sign = (t_half.x() > 0.0) ? 1.0 : -1.0;
    const Vec3 e1 = sign * t_half.normalized();
    const double norm_xy = std::hypot(e1.x(), e1.y());
    const Vec3 e2 = (norm_xy > 1e-12) ? Vec3(-e1.y() / norm_xy, e1.x() / norm_xy, 0.0)
                                      : Vec3(0.0, 1.0, 0.0);
    const Vec3 e3 = e1.cross(e2);
    Mat3 align;
    align.row(0) = e1;
    align.row(1) = e2;
    align.row(2) = e3;

    RectifiedRig out;
    out.rot_left = align * half_left;
    out.rot_right = align * half_right;
    out.baseline_cm = rig.baseline();
    out.new_intrinsics.fx = out.new_intrinsics.fy =
        0.25 * (rig.left.fx + rig.left.fy + rig.right.fx + rig.right.fy);
    out.new_intrinsics.cx = (rig.width - 1) * 0.5;
    out.new_intrinsics.cy = (rig.height - 1) * 0.5;
    return out;
}

namespace {

RemapTable build_one(const Mat3& rect_rot, const CameraIntrinsics& news,
                     const CameraIntrinsics& original, int width, int height) {
    RemapTable table;
    table.width = width;
    table.height = height;
    table.map_x.resize(static_cast<std::size_t>(width) * height);
    table.map_y.resize(static_cast<std::size_t>(width) * height);
    const Mat3 rot_inv = rect_rot.transpose();
    for (int r = 0; r < height; ++r) {
        for (int c = 0; c < width; ++c) {
            const std::size_t idx = static_cast<std::size_t>(r) * width + c;
            const Vec3 ray((c - news.cx) / news.fx, (r - news.cy) / news.fy, 1.0);
            const Vec3 src_ray = rot_inv * ray;
            if (!(src_ray.z() > 1e-9)) {
                table.map_x[idx] = kRemapSentinel;
                table.map_y[idx] = kRemapSentinel;
                continue;
            }
            const Vec2 norm(src_ray.x() / src_ray.z(), src_ray.y() / src_ray.z());
            const Vec2 d = distort_normalized(original, norm);
            const double sx = original.fx * d.x() + original.cx;
            const double sy = original.fy * d.y() + original.cy;
            if (sx < 0.0 || sx > width - 1.0 || sy < 0.0 || sy > height - 1.0) {
                table.map_x[idx] = kRemapSentinel;
                table.map_y[idx] = kRemapSentinel;
            } else {
                table.map_x[idx] = static_cast<float>(sx);
                table.map_y[idx] = static_cast<float>(sy);
            }
        }
    }
    return table;
}

}  // namespace

StereoRemapTables build_remap_tables(const RectifiedRig& rect, const CameraIntrinsics& original_left,
                                     const CameraIntrinsics& original_right, int width, int height) {
    rect.validate();
    if (width < 1 || height < 1)
        throw InvalidArgument("remap table dimensions must be positive");
    StereoRemapTables out;
    out.left_x_y = build_one(rect.rot_left, rect.new_intrinsics, original_left, width, height);
    out.right_x_y = build_one(rect.rot_right, rect.new_intrinsics, original_right, width, height);
    return out;
}

Image8 remap(const Image8& image, const RemapTable& table) {
    if (image.width() != table.width || image.height() != table.height)
        throw DimensionMismatch("remap table dimensions do not match the image");
    Image8 out(image.width(), image.height(), 0);
    for (int r = 0; r < image.height(); ++r) {
        for (int c = 0; c < image.width(); ++c) {
            const float sx = table.x_at(c, r);
            const float sy = table.y_at(c, r);
            if (sx < 0.0f || sy < 0.0f || sx > image.width() - 1.0f || sy > image.height() - 1.0f)
                continue;  // sentinel or out of bounds: keep 0
            const double v = image.sample(sx, sy);
            out.at(c, r) = static_cast<std::uint8_t>(std::lround(v));
        }
    }
    return out;
}

}  // namespace stereoranger

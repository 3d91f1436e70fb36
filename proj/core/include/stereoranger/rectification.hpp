#pragma once

#include <utility>

#include "stereoranger/geometry.hpp"
#include "stereoranger/image.hpp"

namespace stereoranger {

/// Rectifying rotations plus the shared distortion-free intrinsics. After
/// applying rot_left/rot_right, corresponding points share image rows and
/// disparity is purely horizontal.
struct RectifiedRig {
    Mat3 rot_left = Mat3::Identity();
    Mat3 rot_right = Mat3::Identity();
    CameraIntrinsics new_intrinsics;  // shared, zero distortion
    double baseline_cm = 0.0;

    void validate() const;
};

/// Per-destination-pixel source coordinates for undistort+rectify warping.
/// Entries are 32-bit floats; unmapped destinations carry the sentinel -1.
struct RemapTable {
    int width = 0;
    int height = 0;
    std::vector<float> map_x;
    std::vector<float> map_y;

    float x_at(int c, int r) const { return map_x[static_cast<std::size_t>(r) * width + c]; }
    float y_at(int c, int r) const { return map_y[static_cast<std::size_t>(r) * width + c]; }
};

constexpr float kRemapSentinel = -1.0f;

/// Bouguet-style rectification: the relative rotation is split evenly between
/// the cameras, then both are rotated so the new x-axis runs along the
/// baseline. Shared intrinsics average the four original focal lengths; the
/// principal point is centered on the frame. Throws ZeroBaseline.
RectifiedRig compute_rectification(const StereoRig& rig);

struct StereoRemapTables {
    RemapTable left_x_y;   // left camera
    RemapTable right_x_y;  // right camera
};

/// Inverse mapping per camera: for each destination pixel, rotate the ideal
/// ray back through the rectifying rotation, apply the original forward
/// distortion and pixel mapping, and record the source coordinate.
/// Out-of-frame sources get the sentinel.
StereoRemapTables build_remap_tables(const RectifiedRig& rect, const CameraIntrinsics& original_left,
                                     const CameraIntrinsics& original_right, int width, int height);

/// Bilinear warp of `image` through `table`; sentinel and out-of-bounds
/// destinations are filled with 0. Throws DimensionMismatch when table and
/// image dimensions differ.
Image8 remap(const Image8& image, const RemapTable& table);

}  // namespace stereoranger

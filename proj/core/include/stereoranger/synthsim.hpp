#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "stereoranger/geometry.hpp"
#include "stereoranger/image.hpp"

namespace stereoranger {

/// Planar target in the left-camera frame (scene coordinates are the left
/// camera's frame; the right camera sits at rig.stereo). Rectangles and discs
/// lie in the plane Z = center.z.
struct SyntheticTarget {
    enum class Shape { Rectangle, Disc };
    Shape shape = Shape::Disc;
    WorldPoint center;
    double width = 0.0;    // rectangle, cm
    double height = 0.0;   // rectangle, cm
    double radius = 0.0;   // disc, cm
    std::uint8_t intensity = 255;

    void validate() const;
};

struct SyntheticScene {
    std::vector<SyntheticTarget> targets;
    StereoRig rig;
    int image_width = 0;
    int image_height = 0;
    std::uint8_t background = 0;

    void validate() const;
};

/// Per-target truth: analytic projected centers (not rasterized centroids)
/// and the left-camera-frame depth of the center.
struct TargetTruth {
    double depth_cm = 0.0;
    ImagePoint left_center;
    ImagePoint right_center;
};

struct GroundTruth {
    std::vector<TargetTruth> targets;
};

struct StereoRender {
    Image8 left;
    Image8 right;
    GroundTruth truth;
};

/// Renders the scene once per camera: target boundaries are projected through
/// the pinhole model (distortion included when the rig carries coefficients)
/// and filled by scanline rasterization, one sample per pixel center, nearer
/// targets painted over farther ones. Discs are approximated by 64-gons.
/// Throws TargetBehindCamera when a target does not lie in front of both
/// cameras.
StereoRender render_stereo(const SyntheticScene& scene);

/// Line-oriented scene description:
///   image W H            frame size (header, required)
///   background N         fill intensity (default 0)
///   rig ideal F B        rectified rig: focal px, baseline cm
///   camera left|right fx fy cx cy k1 k2 p1 p2 k3
///   stereo rx ry rz tx ty tz        axis-angle + translation
///   rect cx cy cz width height intensity
///   disc cx cy cz radius intensity
/// '#' starts a comment.
SyntheticScene parse_scene(std::istream& in);
SyntheticScene load_scene(const std::string& path);

/// Truth export, one line per target: `idx depth_cm xl yl xr yr`.
void save_truth(const GroundTruth& truth, const std::string& path);

}  // namespace stereoranger

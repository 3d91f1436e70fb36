#pragma once

#include <string>

#include "stereoranger/calibration.hpp"
#include "stereoranger/rectification.hpp"

namespace stereoranger {

/// Everything the pipeline needs to undistort and rectify frames: original
/// intrinsics, the stereo pose, the rectified rig and the four remap tables
/// (stereoMapL_x/L_y/R_x/R_y).
struct StereoCalibration {
    CameraIntrinsics left;
    CameraIntrinsics right;
    Pose stereo;
    double rms_reprojection = 0.0;
    RectifiedRig rectified;
    RemapTable map_left;
    RemapTable map_right;

    int frame_width() const { return map_left.width; }
    int frame_height() const { return map_left.height; }
};

/// Builds the rectified rig and maps from a calibration result.
StereoCalibration make_stereo_calibration(const CalibrationResult& result, int width, int height);

/// Structured text container with named nodes. Map nodes (`stereoMapL_x`,
/// `stereoMapL_y`, `stereoMapR_x`, `stereoMapR_y`) carry a `rows cols` header
/// followed by row-major values printed with round-trip-lossless 32-bit float
/// formatting. Round-trips are value-lossless. load throws FormatError with
/// the offending node and line.
void save_calibration(const std::string& path, const StereoCalibration& calib);
StereoCalibration load_calibration(const std::string& path);

}  // namespace stereoranger

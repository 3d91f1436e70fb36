#pragma once

#include <optional>

#include "stereoranger/detection.hpp"

namespace stereoranger {

enum class FPixelSource { Fov, Calibration };

/// Parameters feeding the triangulation step: baseline B in centimeters,
/// physical focal length f in millimeters (carried for provenance), and the
/// horizontal field of view alpha in degrees which determines f_pixel.
struct RangingConfig {
    double baseline_cm = 9.0;
    double focal_length_mm = 4.0;
    double alpha_deg = 60.0;
    int frame_width = 640;
    double min_disparity = 0.5;
    FPixelSource f_pixel_source = FPixelSource::Fov;
    std::optional<double> calibrated_f_pixel;  // rectified focal, when a rig is loaded

    void validate() const;
};

/// Depth for one matched detection pair. depth * disparity = baseline * f_pixel.
struct DepthEstimate {
    double disparity = 0.0;   // pixels
    double f_pixel = 0.0;     // pixels
    double depth = 0.0;       // centimeters
    StereoDetectionPair pair;
};

/// Focal length in pixel units from the horizontal field of view:
/// (frame_width / 2) / tan(alpha / 2). Throws InvalidFov for alpha outside (0, 180).
double focal_mm_to_pixels(const RangingConfig& cfg);

/// Signed horizontal disparity xL - xR.
double disparity(double x_left, double x_right);

/// f_pixel according to cfg.f_pixel_source.
double effective_f_pixel(const RangingConfig& cfg);

/// Depth of a matched pair from the disparity of its centers.
/// Throws DisparityTooSmall when |disparity| < cfg.min_disparity.
DepthEstimate find_depth(const StereoDetectionPair& pair, const RangingConfig& cfg);

}  // namespace stereoranger

#include "stereoranger/ranging.hpp"

#include <cmath>
#include <numbers>

#include "stereoranger/errors.hpp"

namespace stereoranger {

void RangingConfig::validate() const {
    if (!(baseline_cm > 0.0))
        throw InvalidArgument("baseline must be positive");
    if (!(alpha_deg > 0.0) || !(alpha_deg < 180.0))
        throw InvalidFov("alpha must lie in (0, 180) degrees");
    if (frame_width < 2)
        throw InvalidArgument("frame width must be at least 2 pixels");
    if (!(min_disparity > 0.0))
        throw InvalidArgument("min disparity must be positive");
    if (f_pixel_source == FPixelSource::Calibration && !calibrated_f_pixel)
        throw InvalidArgument("f_pixel_source=calibration requires a calibrated focal length");
}

double focal_mm_to_pixels(const RangingConfig& cfg) {
    if (!(cfg.alpha_deg > 0.0) || !(cfg.alpha_deg < 180.0))
        throw InvalidFov("alpha must lie in (0, 180) degrees");
    const double half_fov = cfg.alpha_deg * 0.5 * std::numbers::pi / 180.0;
    return (cfg.frame_width * 0.5) / std::tan(half_fov);
}

double disparity(double x_left, double x_right) {
    return x_left - x_right;
}

double effective_f_pixel(const RangingConfig& cfg) {
    if (cfg.f_pixel_source == FPixelSource::Calibration) {
        if (!cfg.calibrated_f_pixel)
            throw InvalidArgument("no calibrated focal length available");
        return *cfg.calibrated_f_pixel;
    }
    return focal_mm_to_pixels(cfg);
}

DepthEstimate find_depth(const StereoDetectionPair& pair, const RangingConfig& cfg) {
    cfg.validate();
    const double d = disparity(pair.left.center_x, pair.right.center_x);
    if (std::abs(d) < cfg.min_disparity)
        throw DisparityTooSmall("disparity " + std::to_string(d) + " below minimum " +
                                std::to_string(cfg.min_disparity));
    DepthEstimate est;
    est.disparity = d;
    est.f_pixel = effective_f_pixel(cfg);
    est.depth = std::abs(cfg.baseline_cm * est.f_pixel / d);
    est.pair = pair;
    return est;
}

}  // namespace stereoranger

#pragma once

#include <array>
#include <optional>
#include <string>

namespace stereoranger {

/// Overtake-safety levels in increasing-distance order, one per light of a
/// five-light array, plus NoTarget when no vehicle is matched.
enum class SignalLevel { Danger, Caution, Neutral, NearSafe, Safe, NoTarget };

std::string to_string(SignalLevel level);
SignalLevel signal_level_from_string(const std::string& token);

/// Four ascending breakpoints partition depth into five bands. The default
/// top band starts at the 462 cm safe longitudinal distance, split into
/// quarters below.
struct SignalThresholds {
    std::array<double, 4> breakpoints{115.0, 231.0, 346.0, 462.0};
    double hysteresis_cm = 5.0;

    void validate() const;
};

/// Band classification, lower-bound inclusive: depth below breakpoints[0] is
/// Danger, depth >= breakpoints[3] is Safe. Absent depth yields NoTarget.
SignalLevel classify(std::optional<double> depth_cm, const SignalThresholds& t);

/// Flicker-suppressed transition: when the raw classification moves a single
/// band and the depth sits within hysteresis of the crossed breakpoint, the
/// previous level is kept; otherwise the raw level is adopted. NoTarget is
/// always adopted, and recovery from NoTarget adopts the raw level.
SignalLevel step(SignalLevel prev, std::optional<double> depth_cm, const SignalThresholds& t);

/// Line-oriented signal export: `frame_idx level depth_cm`.
std::string format_signal_line(long frame_idx, SignalLevel level, std::optional<double> depth_cm);

}  // namespace stereoranger

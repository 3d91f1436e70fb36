#include "stereoranger/signaling.hpp"

#include <cmath>
#include <sstream>

#include "stereoranger/errors.hpp"

namespace stereoranger {

std::string to_string(SignalLevel level) {
    switch (level) {
        case SignalLevel::Danger: return "danger";
        case SignalLevel::Caution: return "caution";
        case SignalLevel::Neutral: return "neutral";
        case SignalLevel::NearSafe: return "near_safe";
        case SignalLevel::Safe: return "safe";
        case SignalLevel::NoTarget: return "no_target";
    }
    return "no_target";
}

SignalLevel signal_level_from_string(const std::string& token) {
    if (token == "danger") return SignalLevel::Danger;
    if (token == "caution") return SignalLevel::Caution;
    if (token == "neutral") return SignalLevel::Neutral;
    if (token == "near_safe") return SignalLevel::NearSafe;
    if (token == "safe") return SignalLevel::Safe;
    if (token == "no_target") return SignalLevel::NoTarget;
    throw InvalidArgument("unknown signal level '" + token + "'");
}

void SignalThresholds::validate() const {
    double min_gap = breakpoints[0];
    for (int i = 0; i < 4; ++i) {
        if (!(breakpoints[i] > 0.0) || !std::isfinite(breakpoints[i]))
            throw InvalidArgument("breakpoints must be positive and finite");
        if (i > 0) {
            const double gap = breakpoints[i] - breakpoints[i - 1];
            if (!(gap > 0.0))
                throw InvalidArgument("breakpoints must be strictly ascending");
            min_gap = std::min(min_gap, gap);
        }
    }
    if (hysteresis_cm < 0.0 || !(hysteresis_cm < min_gap))
        throw InvalidArgument("hysteresis must be >= 0 and below the smallest breakpoint gap");
}

SignalLevel classify(std::optional<double> depth_cm, const SignalThresholds& t) {
    t.validate();
    if (!depth_cm)
        return SignalLevel::NoTarget;
    const double d = *depth_cm;
    if (d < t.breakpoints[0]) return SignalLevel::Danger;
    if (d < t.breakpoints[1]) return SignalLevel::Caution;
    if (d < t.breakpoints[2]) return SignalLevel::Neutral;
    if (d < t.breakpoints[3]) return SignalLevel::NearSafe;
    return SignalLevel::Safe;
}

SignalLevel step(SignalLevel prev, std::optional<double> depth_cm, const SignalThresholds& t) {
    const SignalLevel raw = classify(depth_cm, t);
    if (raw == SignalLevel::NoTarget || prev == SignalLevel::NoTarget || raw == prev)
        return raw;
    const int raw_band = static_cast<int>(raw);
    const int prev_band = static_cast<int>(prev);
    if (std::abs(raw_band - prev_band) == 1) {
        // the breakpoint separating the two adjacent bands
        const double crossed = t.breakpoints[std::min(raw_band, prev_band)];
        if (std::abs(*depth_cm - crossed) <= t.hysteresis_cm)
            return prev;
    }
    return raw;
}

std::string format_signal_line(long frame_idx, SignalLevel level, std::optional<double> depth_cm) {
    std::ostringstream ss;
    ss << frame_idx << ' ' << to_string(level) << ' ';
    if (depth_cm)
        ss << *depth_cm;
    else
        ss << '-';
    return ss.str();
}

}  // namespace stereoranger

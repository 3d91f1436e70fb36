#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "stereoranger/calibration_io.hpp"
#include "stereoranger/config.hpp"
#include "stereoranger/detection.hpp"
#include "stereoranger/frame_source.hpp"
#include "stereoranger/ranging.hpp"
#include "stereoranger/signaling.hpp"

namespace stereoranger {

struct PipelineConfig {
    double target_fps = 20.0;
    bool pace = false;

    RangingConfig ranging;
    SignalThresholds thresholds;

    std::string backend = "fiducial";  // fiducial | replay
    FiducialConfig fiducial;
    NeuralConfig neural;
    double row_tol = 10.0;

    bool rectify = false;
    std::string calibration_path;
    std::string source_spec;

    void validate() const;

    /// Reads the [io], [ranging], [thresholds] and [detector] sections.
    static PipelineConfig from_config(const ConfigFile& file);
};

struct StageLatencies {
    double rectify_ms = 0.0;
    double detect_ms = 0.0;
    double match_ms = 0.0;
    double range_ms = 0.0;
    double signal_ms = 0.0;
    double total_ms = 0.0;
};

struct FrameResult {
    long frame_idx = 0;
    std::vector<Detection> detections_left;
    std::vector<Detection> detections_right;
    std::vector<StereoDetectionPair> pairs;
    std::vector<DepthEstimate> estimates;
    std::optional<double> nearest_depth_cm;
    SignalLevel signal = SignalLevel::NoTarget;
    StageLatencies latencies;
    std::string error;  // per-frame backend error; empty when the frame processed cleanly
};

struct StageStats {
    double mean_ms = 0.0;
    double median_ms = 0.0;
    double p95_ms = 0.0;
};

struct LatencyReport {
    StageStats rectify;
    StageStats detect;
    StageStats match;
    StageStats range;
    StageStats signal;
    double total_mean_ms = 0.0;
    long frames = 0;
};

/// Full processing chain: (rectify) -> detect both cameras -> match -> range
/// -> signal. Results are emitted in frame order; backend failures become
/// per-frame error records and the stream continues.
class Pipeline {
public:
    /// Builds the detector backend from the config and loads the calibration
    /// file when rectification is requested. Throws CalibrationMissing if
    /// cfg.rectify is set without a loadable calibration.
    explicit Pipeline(const PipelineConfig& cfg);
    Pipeline(const PipelineConfig& cfg, std::unique_ptr<DetectorBackend> backend);

    void run(FrameSource& source, const std::function<void(const FrameResult&)>& sink);
    std::vector<FrameResult> run_all(FrameSource& source);

    /// Wall-clock per-stage timing over exactly `frames` frames with pacing
    /// disabled. Throws SourceExhausted when the source runs dry early and
    /// InvalidArgument for frames < 10.
    LatencyReport bench(FrameSource& source, long frames);

    const StereoCalibration* calibration() const { return calib_ ? &*calib_ : nullptr; }

private:
    FrameResult process(const StereoFrame& frame);

    PipelineConfig cfg_;
    std::optional<StereoCalibration> calib_;
    std::unique_ptr<DetectorBackend> backend_;
    SignalLevel state_ = SignalLevel::NoTarget;
    bool pacing_enabled_ = true;
};

LatencyReport bench_latency(const PipelineConfig& cfg, FrameSource& source, long frames);

/// Tab-separated result lines `frame_idx label depth_cm disparity_px signal_level`,
/// one line per depth estimate; frames without estimates emit a single
/// placeholder line.
std::vector<std::string> format_frame_result_lines(const FrameResult& result);

std::string format_latency_report(const LatencyReport& report);

}  // namespace stereoranger

#include "stereoranger/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>
#include <thread>

#include "stereoranger/errors.hpp"
#include "stereoranger/rectification.hpp"

namespace stereoranger {

void PipelineConfig::validate() const {
    if (!(target_fps > 0.0))
        throw InvalidArgument("target_fps must be positive");
    ranging.validate();
    thresholds.validate();
    if (backend != "fiducial" && backend != "replay")
        throw ConfigError("unknown detector backend '" + backend + "'");
    if (!(row_tol >= 0.0))
        throw InvalidArgument("row tolerance must be non-negative");
}

PipelineConfig PipelineConfig::from_config(const ConfigFile& file) {
    PipelineConfig cfg;
    cfg.target_fps = file.get_double("io.target_fps", cfg.target_fps);
    cfg.pace = file.get_bool("io.pace", cfg.pace);
    cfg.rectify = file.get_bool("io.rectify", cfg.rectify);
    cfg.calibration_path = file.get_string("io.calibration", cfg.calibration_path);
    cfg.source_spec = file.get_string("io.source", cfg.source_spec);

    cfg.ranging.baseline_cm = file.get_double("ranging.baseline_cm", cfg.ranging.baseline_cm);
    cfg.ranging.focal_length_mm =
        file.get_double("ranging.focal_length_mm", cfg.ranging.focal_length_mm);
    cfg.ranging.alpha_deg = file.get_double("ranging.alpha_deg", cfg.ranging.alpha_deg);
    cfg.ranging.frame_width = file.get_int("ranging.frame_width", cfg.ranging.frame_width);
    cfg.ranging.min_disparity = file.get_double("ranging.min_disparity", cfg.ranging.min_disparity);
    const std::string f_src = file.get_string("ranging.f_pixel_source", "fov");
    if (f_src == "fov")
        cfg.ranging.f_pixel_source = FPixelSource::Fov;
    else if (f_src == "calibration")
        cfg.ranging.f_pixel_source = FPixelSource::Calibration;
    else
        throw ConfigError("ranging.f_pixel_source must be fov or calibration");

    const std::vector<double> bps = file.get_doubles("thresholds.breakpoints");
    if (!bps.empty()) {
        if (bps.size() != 4)
            throw ConfigError("thresholds.breakpoints needs exactly 4 ascending values");
        std::copy(bps.begin(), bps.end(), cfg.thresholds.breakpoints.begin());
    }
    cfg.thresholds.hysteresis_cm =
        file.get_double("thresholds.hysteresis_cm", cfg.thresholds.hysteresis_cm);

    cfg.backend = file.get_string("detector.backend", cfg.backend);
    cfg.fiducial.threshold = file.get_int("detector.threshold", cfg.fiducial.threshold);
    cfg.fiducial.min_area = file.get_int("detector.min_area", cfg.fiducial.min_area);
    cfg.neural.model_path = file.get_string("detector.model", cfg.neural.model_path);
    cfg.neural.labels_path = file.get_string("detector.labels", cfg.neural.labels_path);
    cfg.neural.score_threshold =
        file.get_double("detector.score_threshold", cfg.neural.score_threshold);
    cfg.neural.nms_iou = file.get_double("detector.nms_iou", cfg.neural.nms_iou);
    cfg.row_tol = file.get_double("detector.row_tol", cfg.row_tol);
    return cfg;
}

namespace {

std::unique_ptr<DetectorBackend> backend_from_config(const PipelineConfig& cfg) {
    if (cfg.backend == "fiducial")
        return make_fiducial_backend(cfg.fiducial);
    if (cfg.backend == "replay")
        return make_replay_backend(cfg.neural);
    throw ConfigError("unknown detector backend '" + cfg.backend + "'");
}

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

StageStats stats_of(std::vector<double> samples) {
    StageStats s;
    if (samples.empty())
        return s;
    double sum = 0.0;
    for (double v : samples)
        sum += v;
    s.mean_ms = sum / static_cast<double>(samples.size());
    std::sort(samples.begin(), samples.end());
    s.median_ms = samples[samples.size() / 2];
    // nearest-rank percentile
    const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(samples.size())));
    s.p95_ms = samples[std::min(samples.size() - 1, rank > 0 ? rank - 1 : 0)];
    return s;
}

}  // namespace

Pipeline::Pipeline(const PipelineConfig& cfg) : Pipeline(cfg, backend_from_config(cfg)) {}

Pipeline::Pipeline(const PipelineConfig& cfg, std::unique_ptr<DetectorBackend> backend)
    : cfg_(cfg), backend_(std::move(backend)) {
    if (cfg_.rectify) {
        if (cfg_.calibration_path.empty())
            throw CalibrationMissing("rectification requested without a calibration file");
        try {
            calib_ = load_calibration(cfg_.calibration_path);
        } catch (const FormatError&) {
            throw;
        } catch (const Error& e) {
            throw CalibrationMissing(std::string("cannot load calibration: ") + e.what());
        }
        if (cfg_.ranging.f_pixel_source == FPixelSource::Calibration)
            cfg_.ranging.calibrated_f_pixel = calib_->rectified.new_intrinsics.fx;
    } else if (cfg_.ranging.f_pixel_source == FPixelSource::Calibration &&
               !cfg_.ranging.calibrated_f_pixel) {
        throw CalibrationMissing("f_pixel_source=calibration requires a loaded calibration");
    }
    cfg_.validate();
}

FrameResult Pipeline::process(const StereoFrame& frame) {
    FrameResult res;
    res.frame_idx = frame.frame_idx;
    const auto frame_start = Clock::now();

    // rectify
    auto t = Clock::now();
    const Image8* left = &frame.left;
    const Image8* right = &frame.right;
    Image8 rect_left, rect_right;
    if (calib_) {
        rect_left = remap(frame.left, calib_->map_left);
        rect_right = remap(frame.right, calib_->map_right);
        left = &rect_left;
        right = &rect_right;
    }
    res.latencies.rectify_ms = ms_since(t);

    // detect (per-frame error record on backend failure; the stream continues)
    t = Clock::now();
    bool detect_ok = true;
    try {
        res.detections_left = detect(*left, *backend_);
        res.detections_right = detect(*right, *backend_);
    } catch (const Error& e) {
        res.error = e.what();
        res.detections_left.clear();
        res.detections_right.clear();
        detect_ok = false;
    }
    res.latencies.detect_ms = ms_since(t);

    // match
    t = Clock::now();
    if (detect_ok)
        res.pairs = match_stereo(res.detections_left, res.detections_right, cfg_.row_tol);
    res.latencies.match_ms = ms_since(t);

    // range
    t = Clock::now();
    for (const StereoDetectionPair& pair : res.pairs) {
        try {
            res.estimates.push_back(find_depth(pair, cfg_.ranging));
        } catch (const DisparityTooSmall&) {
            // target too far to range; drop the pair's estimate
        }
    }
    for (const DepthEstimate& est : res.estimates)
        if (!res.nearest_depth_cm || est.depth < *res.nearest_depth_cm)
            res.nearest_depth_cm = est.depth;
    res.latencies.range_ms = ms_since(t);

    // signal
    t = Clock::now();
    state_ = step(state_, res.nearest_depth_cm, cfg_.thresholds);
    res.signal = state_;
    res.latencies.signal_ms = ms_since(t);

    res.latencies.total_ms = ms_since(frame_start);
    return res;
}

void Pipeline::run(FrameSource& source, const std::function<void(const FrameResult&)>& sink) {
    state_ = SignalLevel::NoTarget;
    const bool pace = pacing_enabled_ && (cfg_.pace || source.unbounded());
    const auto interval = std::chrono::duration<double, std::milli>(1000.0 / cfg_.target_fps);
    auto next_deadline = Clock::now() + std::chrono::duration_cast<Clock::duration>(interval);
    while (auto frame = source.next()) {
        sink(process(*frame));
        if (pace) {
            std::this_thread::sleep_until(next_deadline);
            next_deadline += std::chrono::duration_cast<Clock::duration>(interval);
        }
    }
}

std::vector<FrameResult> Pipeline::run_all(FrameSource& source) {
    std::vector<FrameResult> out;
    run(source, [&](const FrameResult& r) { out.push_back(r); });
    return out;
}

LatencyReport Pipeline::bench(FrameSource& source, long frames) {
    if (frames < 10)
        throw InvalidArgument("latency benchmark needs at least 10 frames");
    pacing_enabled_ = false;
    state_ = SignalLevel::NoTarget;
    std::vector<double> rectify_ms, detect_ms, match_ms, range_ms, signal_ms;
    double total = 0.0;
    for (long i = 0; i < frames; ++i) {
        auto frame = source.next();
        if (!frame) {
            pacing_enabled_ = true;
            throw SourceExhausted("source ended after " + std::to_string(i) + " of " +
                                  std::to_string(frames) + " frames");
        }
        const FrameResult res = process(*frame);
        rectify_ms.push_back(res.latencies.rectify_ms);
        detect_ms.push_back(res.latencies.detect_ms);
        match_ms.push_back(res.latencies.match_ms);
        range_ms.push_back(res.latencies.range_ms);
        signal_ms.push_back(res.latencies.signal_ms);
        total += res.latencies.total_ms;
    }
    pacing_enabled_ = true;
    LatencyReport report;
    report.rectify = stats_of(std::move(rectify_ms));
    report.detect = stats_of(std::move(detect_ms));
    report.match = stats_of(std::move(match_ms));
    report.range = stats_of(std::move(range_ms));
    report.signal = stats_of(std::move(signal_ms));
    report.total_mean_ms = total / static_cast<double>(frames);
    report.frames = frames;
    return report;
}

LatencyReport bench_latency(const PipelineConfig& cfg, FrameSource& source, long frames) {
    Pipeline pipeline(cfg);
    return pipeline.bench(source, frames);
}

std::vector<std::string> format_frame_result_lines(const FrameResult& result) {
    std::vector<std::string> lines;
    const std::string level = to_string(result.signal);
    if (result.estimates.empty()) {
        std::ostringstream ss;
        ss << result.frame_idx << "\t-\t-\t-\t" << level;
        lines.push_back(ss.str());
        return lines;
    }
    for (const DepthEstimate& est : result.estimates) {
        std::ostringstream ss;
        ss << result.frame_idx << '\t' << est.pair.left.label << '\t' << est.depth << '\t'
           << est.disparity << '\t' << level;
        lines.push_back(ss.str());
    }
    return lines;
}

std::string format_latency_report(const LatencyReport& report) {
    std::ostringstream ss;
    ss.precision(3);
    ss << std::fixed;
    const auto row = [&](const char* name, const StageStats& s) {
        ss << name << "\tmean " << s.mean_ms << " ms\tmedian " << s.median_ms << " ms\tp95 "
           << s.p95_ms << " ms\n";
    };
    ss << "frames\t" << report.frames << '\n';
    row("rectify", report.rectify);
    row("detect", report.detect);
    row("match", report.match);
    row("range", report.range);
    row("signal", report.signal);
    ss << "total\tmean " << report.total_mean_ms << " ms/frame\n";
    return ss.str();
}

}  // namespace stereoranger

#pragma once

#include <memory>
#include <optional>
#include <string>

#include "stereoranger/image.hpp"
#include "stereoranger/synthsim.hpp"

namespace stereoranger {

struct StereoFrame {
    long frame_idx = 0;
    double timestamp_ms = 0.0;
    Image8 left;
    Image8 right;
};

/// Yields stereo frame pairs with strictly increasing indices and constant,
/// equal left/right dimensions.
class FrameSource {
public:
    virtual ~FrameSource() = default;
    virtual std::optional<StereoFrame> next() = 0;
    /// Restart from the first frame.
    virtual void reset() = 0;
    /// True when the source never runs dry (live feeds); the pipeline paces
    /// unbounded sources toward the target frame rate.
    virtual bool unbounded() const { return false; }
};

/// Reads `frame_NNNNNN_left.pgm` / `frame_NNNNNN_right.pgm` pairs from a
/// directory, starting at index 0 and stopping at the first missing pair.
class DirectoryFrameSource final : public FrameSource {
public:
    explicit DirectoryFrameSource(std::string directory, double frame_interval_ms = 50.0);
    std::optional<StereoFrame> next() override;
    void reset() override { index_ = 0; }

    static std::string left_name(long idx);
    static std::string right_name(long idx);

private:
    std::string dir_;
    double interval_ms_;
    long index_ = 0;
    int width_ = 0;   // locked by the first frame
    int height_ = 0;
};

/// Renders a synthetic scene once and replays the pair for a fixed number of
/// frames (0 = unbounded).
class SyntheticFrameSource final : public FrameSource {
public:
    SyntheticFrameSource(const SyntheticScene& scene, long frame_count,
                         double frame_interval_ms = 50.0);
    std::optional<StereoFrame> next() override;
    void reset() override { index_ = 0; }
    bool unbounded() const override { return count_ == 0; }

    const GroundTruth& truth() const { return render_.truth; }

private:
    StereoRender render_;
    long count_;
    double interval_ms_;
    long index_ = 0;
};

/// Builds a source from an `io.source` spec: `dir:PATH` or
/// `synth:SCENE_FILE[:FRAMES]` (default 1 frame).
std::unique_ptr<FrameSource> make_frame_source(const std::string& spec, double frame_interval_ms);

}  // namespace stereoranger

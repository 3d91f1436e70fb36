#include "stereoranger/frame_source.hpp"

#include <cstdio>
#include <filesystem>

#include "stereoranger/errors.hpp"

namespace stereoranger {

DirectoryFrameSource::DirectoryFrameSource(std::string directory, double frame_interval_ms)
    : dir_(std::move(directory)), interval_ms_(frame_interval_ms) {
    if (!std::filesystem::is_directory(dir_))
        throw Error("'" + dir_ + "' is not a directory");
}

std::string DirectoryFrameSource::left_name(long idx) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "frame_%06ld_left.pgm", idx);
    return buf;
}

std::string DirectoryFrameSource::right_name(long idx) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "frame_%06ld_right.pgm", idx);
    return buf;
}

std::optional<StereoFrame> DirectoryFrameSource::next() {
    const std::string left_path = dir_ + "/" + left_name(index_);
    const std::string right_path = dir_ + "/" + right_name(index_);
    if (!std::filesystem::exists(left_path) || !std::filesystem::exists(right_path))
        return std::nullopt;
    StereoFrame frame;
    frame.frame_idx = index_;
    frame.timestamp_ms = index_ * interval_ms_;
    frame.left = load_pgm(left_path);
    frame.right = load_pgm(right_path);
    if (frame.left.width() != frame.right.width() || frame.left.height() != frame.right.height())
        throw DimensionMismatch("left/right frame dimensions differ at index " +
                                std::to_string(index_));
    if (width_ == 0) {
        width_ = frame.left.width();
        height_ = frame.left.height();
    } else if (frame.left.width() != width_ || frame.left.height() != height_) {
        throw DimensionMismatch("frame dimensions changed at index " + std::to_string(index_));
    }
    ++index_;
    return frame;
}

SyntheticFrameSource::SyntheticFrameSource(const SyntheticScene& scene, long frame_count,
                                           double frame_interval_ms)
    : render_(render_stereo(scene)), count_(frame_count), interval_ms_(frame_interval_ms) {}

std::optional<StereoFrame> SyntheticFrameSource::next() {
    if (count_ != 0 && index_ >= count_)
        return std::nullopt;
    StereoFrame frame;
    frame.frame_idx = index_;
    frame.timestamp_ms = index_ * interval_ms_;
    frame.left = render_.left;
    frame.right = render_.right;
    ++index_;
    return frame;
}

std::unique_ptr<FrameSource> make_frame_source(const std::string& spec, double frame_interval_ms) {
    if (spec.rfind("dir:", 0) == 0)
        return std::make_unique<DirectoryFrameSource>(spec.substr(4), frame_interval_ms);
    if (spec.rfind("synth:", 0) == 0) {
        std::string rest = spec.substr(6);
        long frames = 1;
        const auto colon = rest.rfind(':');
        if (colon != std::string::npos && colon > 0) {
            try {
                std::size_t pos = 0;
                frames = std::stol(rest.substr(colon + 1), &pos);
                if (pos == rest.size() - colon - 1)
                    rest.resize(colon);
                else
                    frames = 1;  // the tail was not a frame count; treat as part of the path
            } catch (const std::exception&) {
                frames = 1;
            }
        }
        return std::make_unique<SyntheticFrameSource>(load_scene(rest), frames, frame_interval_ms);
    }
    throw ConfigError("unknown source spec '" + spec + "' (expected dir:PATH or synth:SCENE[:N])");
}

}  // namespace stereoranger

#pragma once

#include <memory>
#include <string>
#include <vector>

#include "stereoranger/image.hpp"

namespace stereoranger {

struct BoundingBox {
    double x_min = 0.0;
    double y_min = 0.0;
    double x_max = 0.0;
    double y_max = 0.0;

    double width() const { return x_max - x_min; }
    double height() const { return y_max - y_min; }
    double area() const { return width() * height(); }

    void validate() const;
};

/// Intersection-over-union of two boxes; 0 when disjoint.
double iou(const BoundingBox& a, const BoundingBox& b);

/// One detected object in one frame. `center` defaults to the bbox midpoint;
/// backends with a better estimate (the fiducial detector's centroid) may
/// override it.
struct Detection {
    std::string label;
    double confidence = 0.0;
    BoundingBox bbox;
    double center_x = 0.0;
    double center_y = 0.0;

    static Detection from_bbox(std::string label, double confidence, const BoundingBox& box);
};

/// Matched left/right detections of the same object. Valid pairs have equal
/// labels, positive center disparity and row offset within tolerance.
struct StereoDetectionPair {
    Detection left;
    Detection right;

    double disparity() const { return left.center_x - right.center_x; }
    double row_offset() const { return left.center_y - right.center_y; }
};

/// Detector backend: one in-flight inference per instance; implementations
/// must be deterministic for identical frames.
class DetectorBackend {
public:
    virtual ~DetectorBackend() = default;
    virtual std::string name() const = 0;
    virtual std::vector<Detection> run(const Image8& frame) = 0;
};

/// Runs the backend and returns detections sorted by descending confidence.
std::vector<Detection> detect(const Image8& frame, DetectorBackend& backend);

struct FiducialConfig {
    int threshold = 128;   // binarization level, inclusive
    int min_area = 16;     // connected components below this are dropped
};

/// Deterministic high-contrast target detector: binarize >= threshold,
/// 4-connected components, label "fiducial", center = component centroid,
/// confidence = fill ratio. Output sorted by x_min.
std::vector<Detection> detect_fiducial(const Image8& frame, const FiducialConfig& cfg);

/// Pairs detections across a rectified stereo frame. Candidates need equal
/// labels, positive disparity and |row offset| <= row_tol; greedy selection by
/// ascending |row offset|, ties broken by larger confidence sum then smaller
/// disparity. Each detection is used at most once.
std::vector<StereoDetectionPair> match_stereo(const std::vector<Detection>& left,
                                              const std::vector<Detection>& right,
                                              double row_tol);

/// Backend wrapper for detect_fiducial.
class FiducialBackend final : public DetectorBackend {
public:
    explicit FiducialBackend(const FiducialConfig& cfg) : cfg_(cfg) {}
    std::string name() const override { return "fiducial"; }
    std::vector<Detection> run(const Image8& frame) override { return detect_fiducial(frame, cfg_); }

private:
    FiducialConfig cfg_;
};

/// Configuration shared by neural-style backends: a model file, a sidecar
/// label file (one class name per line), a score threshold and an IoU
/// threshold for non-maximum suppression.
struct NeuralConfig {
    std::string model_path;
    std::string labels_path;
    double score_threshold = 0.5;
    double nms_iou = 0.45;
};

/// Deterministic stand-in for the neural detector. The "model" file scripts
/// raw candidate boxes (`class_id score x_min y_min x_max y_max` per line,
/// '#' comments); every frame yields the same candidates, which then pass
/// through the standard post-processing: score threshold, per-class greedy
/// NMS, label lookup. Throws BackendLoadFailure on bad files and
/// InferenceFailure on class ids outside the label list.
class ReplayBackend final : public DetectorBackend {
public:
    explicit ReplayBackend(const NeuralConfig& cfg);
    std::string name() const override { return "replay"; }
    std::vector<Detection> run(const Image8& frame) override;

private:
    struct Candidate {
        int class_id;
        double score;
        BoundingBox box;
    };
    std::vector<std::string> labels_;
    std::vector<Candidate> candidates_;
    double score_threshold_;
    double nms_iou_;
};

std::unique_ptr<DetectorBackend> make_fiducial_backend(const FiducialConfig& cfg);
std::unique_ptr<DetectorBackend> make_replay_backend(const NeuralConfig& cfg);

/// Line-oriented detection export:
/// `frame_idx camera label confidence x_min y_min x_max y_max`.
std::string format_detection_line(long frame_idx, char camera, const Detection& d);

}  // namespace stereoranger

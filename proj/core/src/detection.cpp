#include "stereoranger/detection.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <tuple>

#include "stereoranger/errors.hpp"

namespace stereoranger {

void BoundingBox::validate() const {
    if (!(x_min < x_max) || !(y_min < y_max))
        throw InvalidArgument("bounding box must have positive extent");
    if (!std::isfinite(x_min) || !std::isfinite(y_min) || !std::isfinite(x_max) || !std::isfinite(y_max))
        throw InvalidArgument("bounding box must be finite");
}

double iou(const BoundingBox& a, const BoundingBox& b) {
    const double ix = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
    const double iy = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
    if (ix <= 0.0 || iy <= 0.0)
        return 0.0;
    const double inter = ix * iy;
    return inter / (a.area() + b.area() - inter);
}

Detection Detection::from_bbox(std::string label, double confidence, const BoundingBox& box) {
    box.validate();
    Detection d;
    d.label = std::move(label);
    d.confidence = confidence;
    d.bbox = box;
    d.center_x = 0.5 * (box.x_min + box.x_max);
    d.center_y = 0.5 * (box.y_min + box.y_max);
    return d;
}

std::vector<Detection> detect(const Image8& frame, DetectorBackend& backend) {
    std::vector<Detection> out = backend.run(frame);
    std::stable_sort(out.begin(), out.end(),
                     [](const Detection& a, const Detection& b) { return a.confidence > b.confidence; });
    return out;
}

std::vector<Detection> detect_fiducial(const Image8& frame, const FiducialConfig& cfg) {
    if (cfg.threshold < 0 || cfg.threshold > 255)
        throw InvalidArgument("fiducial threshold outside intensity range");
    const int w = frame.width();
    const int h = frame.height();
    std::vector<int> comp(static_cast<std::size_t>(w) * h, -1);
    std::vector<Detection> out;

    std::vector<int> stack;
    int next_id = 0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t idx = static_cast<std::size_t>(y) * w + x;
            if (comp[idx] != -1 || frame.at(x, y) < cfg.threshold)
                continue;
            // flood fill one 4-connected component
            const int id = next_id++;
            comp[idx] = id;
            stack.assign(1, static_cast<int>(idx));
            long area = 0;
            long sum_x = 0, sum_y = 0;
            int min_x = x, max_x = x, min_y = y, max_y = y;
            while (!stack.empty()) {
                const int cur = stack.back();
                stack.pop_back();
                const int cx = cur % w;
                const int cy = cur / w;
                ++area;
                sum_x += cx;
                sum_y += cy;
                min_x = std::min(min_x, cx);
                max_x = std::max(max_x, cx);
                min_y = std::min(min_y, cy);
                max_y = std::max(max_y, cy);
                const int nx[4] = {cx - 1, cx + 1, cx, cx};
                const int ny[4] = {cy, cy, cy - 1, cy + 1};
                for (int k = 0; k < 4; ++k) {
                    if (nx[k] < 0 || nx[k] >= w || ny[k] < 0 || ny[k] >= h)
                        continue;
                    const std::size_t nidx = static_cast<std::size_t>(ny[k]) * w + nx[k];
                    if (comp[nidx] == -1 && frame.at(nx[k], ny[k]) >= cfg.threshold) {
                        comp[nidx] = id;
                        stack.push_back(static_cast<int>(nidx));
                    }
                }
            }
            if (area < cfg.min_area)
                continue;
            Detection d;
            d.label = "fiducial";
            d.bbox = {static_cast<double>(min_x), static_cast<double>(min_y),
                      static_cast<double>(max_x), static_cast<double>(max_y)};
            d.center_x = static_cast<double>(sum_x) / area;
            d.center_y = static_cast<double>(sum_y) / area;
            const double bbox_area = (max_x - min_x + 1.0) * (max_y - min_y + 1.0);
            d.confidence = static_cast<double>(area) / bbox_area;
            out.push_back(std::move(d));
        }
    }
    std::sort(out.begin(), out.end(),
              [](const Detection& a, const Detection& b) { return a.bbox.x_min < b.bbox.x_min; });
    return out;
}

std::vector<StereoDetectionPair> match_stereo(const std::vector<Detection>& left,
                                              const std::vector<Detection>& right,
                                              double row_tol) {
    struct Candidate {
        std::size_t li, ri;
        double abs_dy;
        double conf_sum;
        double abs_dx;
    };
    std::vector<Candidate> cands;
    for (std::size_t i = 0; i < left.size(); ++i) {
        for (std::size_t j = 0; j < right.size(); ++j) {
            if (left[i].label != right[j].label)
                continue;
            const double dx = left[i].center_x - right[j].center_x;
            if (!(dx > 0.0))
                continue;
            const double dy = left[i].center_y - right[j].center_y;
            if (std::abs(dy) > row_tol)
                continue;
            cands.push_back({i, j, std::abs(dy), left[i].confidence + right[j].confidence, dx});
        }
    }
    std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
        if (a.abs_dy != b.abs_dy)
            return a.abs_dy < b.abs_dy;
        if (a.conf_sum != b.conf_sum)
            return a.conf_sum > b.conf_sum;
        if (a.abs_dx != b.abs_dx)
            return a.abs_dx < b.abs_dx;
        return std::tie(a.li, a.ri) < std::tie(b.li, b.ri);  // deterministic order
    });
    std::vector<bool> used_l(left.size(), false), used_r(right.size(), false);
    std::vector<StereoDetectionPair> pairs;
    for (const Candidate& c : cands) {
        if (used_l[c.li] || used_r[c.ri])
            continue;
        used_l[c.li] = used_r[c.ri] = true;
        pairs.push_back({left[c.li], right[c.ri]});
    }
    return pairs;
}

ReplayBackend::ReplayBackend(const NeuralConfig& cfg)
    : score_threshold_(cfg.score_threshold), nms_iou_(cfg.nms_iou) {
    std::ifstream labels(cfg.labels_path);
    if (!labels)
        throw BackendLoadFailure("cannot open label file '" + cfg.labels_path + "'");
    std::string line;
    while (std::getline(labels, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' '))
            line.pop_back();
        if (!line.empty())
            labels_.push_back(line);
    }
    if (labels_.empty())
        throw BackendLoadFailure("label file '" + cfg.labels_path + "' has no classes");

    std::ifstream model(cfg.model_path);
    if (!model)
        throw BackendLoadFailure("cannot open model file '" + cfg.model_path + "'");
    long line_no = 0;
    while (std::getline(model, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.resize(hash);
        std::istringstream ss(line);
        Candidate c;
        if (!(ss >> c.class_id))
            continue;  // blank line
        if (!(ss >> c.score >> c.box.x_min >> c.box.y_min >> c.box.x_max >> c.box.y_max))
            throw BackendLoadFailure("model file '" + cfg.model_path + "': bad candidate at line " +
                                     std::to_string(line_no));
        if (c.score < 0.0 || c.score > 1.0)
            throw BackendLoadFailure("model file '" + cfg.model_path + "': score outside [0,1] at line " +
                                     std::to_string(line_no));
        c.box.validate();
        candidates_.push_back(c);
    }
}

std::vector<Detection> ReplayBackend::run(const Image8& frame) {
    // score filter, then per-class greedy NMS by descending score
    std::vector<const Candidate*> kept;
    std::vector<const Candidate*> sorted;
    for (const Candidate& c : candidates_)
        if (c.score >= score_threshold_)
            sorted.push_back(&c);
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const Candidate* a, const Candidate* b) { return a->score > b->score; });
    for (const Candidate* c : sorted) {
        bool suppressed = false;
        for (const Candidate* k : kept) {
            if (k->class_id == c->class_id && iou(k->box, c->box) > nms_iou_) {
                suppressed = true;
                break;
            }
        }
        if (!suppressed)
            kept.push_back(c);
    }
    std::vector<Detection> out;
    out.reserve(kept.size());
    for (const Candidate* c : kept) {
        if (c->class_id < 0 || c->class_id >= static_cast<int>(labels_.size()))
            throw InferenceFailure("class id " + std::to_string(c->class_id) + " outside label list");
        // clamp to the frame; candidates entirely outside are dropped
        BoundingBox box = c->box;
        box.x_min = std::max(box.x_min, 0.0);
        box.y_min = std::max(box.y_min, 0.0);
        box.x_max = std::min(box.x_max, frame.width() - 1.0);
        box.y_max = std::min(box.y_max, frame.height() - 1.0);
        if (!(box.x_min < box.x_max) || !(box.y_min < box.y_max))
            continue;
        out.push_back(Detection::from_bbox(labels_[c->class_id], c->score, box));
    }
    return out;
}

std::unique_ptr<DetectorBackend> make_fiducial_backend(const FiducialConfig& cfg) {
    return std::make_unique<FiducialBackend>(cfg);
}

std::unique_ptr<DetectorBackend> make_replay_backend(const NeuralConfig& cfg) {
    return std::make_unique<ReplayBackend>(cfg);
}

std::string format_detection_line(long frame_idx, char camera, const Detection& d) {
    std::ostringstream ss;
    ss << frame_idx << ' ' << camera << ' ' << d.label << ' ' << d.confidence << ' '
       << d.bbox.x_min << ' ' << d.bbox.y_min << ' ' << d.bbox.x_max << ' ' << d.bbox.y_max;
    return ss.str();
}

}  // namespace stereoranger

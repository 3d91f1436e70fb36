#include "stereoranger/synthsim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "stereoranger/errors.hpp"

namespace stereoranger {

void SyntheticTarget::validate() const {
    if (shape == Shape::Rectangle) {
        if (!(width > 0.0) || !(height > 0.0))
            throw InvalidArgument("rectangle extents must be positive");
    } else {
        if (!(radius > 0.0))
            throw InvalidArgument("disc radius must be positive");
    }
}

void SyntheticScene::validate() const {
    if (image_width < 32 || image_height < 32)
        throw InvalidArgument("scene image size must be at least 32x32");
    if (rig.width != image_width || rig.height != image_height)
        throw InvalidArgument("rig frame size must match scene image size");
    rig.validate();
    for (const auto& t : targets)
        t.validate();
}

namespace {

constexpr int kDiscSegments = 64;

std::vector<WorldPoint> boundary_points(const SyntheticTarget& t) {
    std::vector<WorldPoint> pts;
    if (t.shape == SyntheticTarget::Shape::Rectangle) {
        const double hw = 0.5 * t.width;
        const double hh = 0.5 * t.height;
        pts = {{t.center.x - hw, t.center.y - hh, t.center.z},
               {t.center.x + hw, t.center.y - hh, t.center.z},
               {t.center.x + hw, t.center.y + hh, t.center.z},
               {t.center.x - hw, t.center.y + hh, t.center.z}};
    } else {
        pts.reserve(kDiscSegments);
        for (int i = 0; i < kDiscSegments; ++i) {
            const double a = 2.0 * std::numbers::pi * i / kDiscSegments;
            pts.push_back({t.center.x + t.radius * std::cos(a),
                           t.center.y + t.radius * std::sin(a), t.center.z});
        }
    }
    return pts;
}

// Even-odd scanline fill at pixel centers; edges half-open in y and spans
// half-open in x (top-left rule), which keeps the rasterization deterministic
// and unbiased for fractional-aligned shapes.
void fill_polygon(Image8& img, const std::vector<ImagePoint>& poly, std::uint8_t intensity) {
    double min_y = poly[0].y, max_y = poly[0].y;
    for (const auto& p : poly) {
        min_y = std::min(min_y, p.y);
        max_y = std::max(max_y, p.y);
    }
    const int r0 = std::max(0, static_cast<int>(std::ceil(min_y)));
    const int r1 = std::min(img.height() - 1, static_cast<int>(std::floor(max_y)));
    std::vector<double> xs;
    for (int r = r0; r <= r1; ++r) {
        xs.clear();
        const double ry = static_cast<double>(r);
        for (std::size_t i = 0; i < poly.size(); ++i) {
            const ImagePoint& a = poly[i];
            const ImagePoint& b = poly[(i + 1) % poly.size()];
            if (a.y == b.y)
                continue;
            const ImagePoint& lo = (a.y < b.y) ? a : b;
            const ImagePoint& hi = (a.y < b.y) ? b : a;
            if (lo.y <= ry && ry < hi.y)
                xs.push_back(lo.x + (ry - lo.y) * (hi.x - lo.x) / (hi.y - lo.y));
        }
        std::sort(xs.begin(), xs.end());
        for (std::size_t i = 0; i + 1 < xs.size(); i += 2) {
            const int c0 = std::max(0, static_cast<int>(std::ceil(xs[i])));
            const int c1 = std::min(img.width() - 1, static_cast<int>(std::ceil(xs[i + 1])) - 1);
            for (int c = c0; c <= c1; ++c)
                img.at(c, r) = intensity;
        }
    }
}

}  // namespace

StereoRender render_stereo(const SyntheticScene& scene) {
    scene.validate();
    StereoRender out;
    out.left = Image8(scene.image_width, scene.image_height, scene.background);
    out.right = Image8(scene.image_width, scene.image_height, scene.background);

    const Pose left_pose;  // identity: scene frame == left camera frame
    const Pose& right_pose = scene.rig.stereo;

    // painter's order: farthest first by left-camera depth
    std::vector<std::size_t> order(scene.targets.size());
    for (std::size_t i = 0; i < order.size(); ++i)
        order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scene.targets[a].center.z > scene.targets[b].center.z;
    });

    out.truth.targets.resize(scene.targets.size());
    for (std::size_t i = 0; i < scene.targets.size(); ++i) {
        const SyntheticTarget& t = scene.targets[i];
        const double depth_left = t.center.z;
        const double depth_right = (right_pose.rotation * t.center.vec() + right_pose.translation).z();
        if (!(depth_left > 0.0) || !(depth_right > 0.0))
            throw TargetBehindCamera("target center must be in front of both cameras");
        TargetTruth& truth = out.truth.targets[i];
        truth.depth_cm = depth_left;
        try {
            truth.left_center = project(scene.rig.left, left_pose, t.center);
            truth.right_center = project(scene.rig.right, right_pose, t.center);
        } catch (const PointBehindCamera&) {
            throw TargetBehindCamera("target center must be in front of both cameras");
        }
    }

    for (std::size_t idx : order) {
        const SyntheticTarget& t = scene.targets[idx];
        const std::vector<WorldPoint> boundary = boundary_points(t);
        std::vector<ImagePoint> poly_l, poly_r;
        poly_l.reserve(boundary.size());
        poly_r.reserve(boundary.size());
        try {
            for (const WorldPoint& wp : boundary) {
                poly_l.push_back(project(scene.rig.left, left_pose, wp));
                poly_r.push_back(project(scene.rig.right, right_pose, wp));
            }
        } catch (const PointBehindCamera&) {
            throw TargetBehindCamera("target boundary must be in front of both cameras");
        }
        fill_polygon(out.left, poly_l, t.intensity);
        fill_polygon(out.right, poly_r, t.intensity);
    }
    return out;
}

SyntheticScene parse_scene(std::istream& in) {
    SyntheticScene scene;
    bool have_image = false;
    bool have_rig = false;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.resize(hash);
        std::istringstream ss(line);
        std::string kind;
        if (!(ss >> kind))
            continue;
        const auto fail = [&](const std::string& why) -> FormatError {
            return FormatError(kind, line_no, why);
        };
        if (kind == "image") {
            if (!(ss >> scene.image_width >> scene.image_height))
                throw fail("expected `image W H`");
            have_image = true;
        } else if (kind == "background") {
            int v;
            if (!(ss >> v) || v < 0 || v > 255)
                throw fail("expected `background 0..255`");
            scene.background = static_cast<std::uint8_t>(v);
        } else if (kind == "rig") {
            std::string form;
            double focal, baseline;
            if (!(ss >> form) || form != "ideal" || !(ss >> focal >> baseline))
                throw fail("expected `rig ideal F B`");
            if (!have_image)
                throw fail("`image` must precede `rig ideal`");
            scene.rig = make_ideal_rig(focal, baseline, scene.image_width, scene.image_height);
            have_rig = true;
        } else if (kind == "camera") {
            std::string side;
            CameraIntrinsics intr;
            if (!(ss >> side >> intr.fx >> intr.fy >> intr.cx >> intr.cy >> intr.dist[0] >>
                  intr.dist[1] >> intr.dist[2] >> intr.dist[3] >> intr.dist[4]))
                throw fail("expected `camera left|right fx fy cx cy k1 k2 p1 p2 k3`");
            if (side == "left")
                scene.rig.left = intr;
            else if (side == "right")
                scene.rig.right = intr;
            else
                throw fail("camera side must be left or right");
            scene.rig.width = scene.image_width;
            scene.rig.height = scene.image_height;
            have_rig = true;
        } else if (kind == "stereo") {
            Vec3 r, t;
            if (!(ss >> r.x() >> r.y() >> r.z() >> t.x() >> t.y() >> t.z()))
                throw fail("expected `stereo rx ry rz tx ty tz`");
            scene.rig.stereo.rotation = rotation_from_axis_angle(r);
            scene.rig.stereo.translation = t;
        } else if (kind == "rect") {
            SyntheticTarget t;
            t.shape = SyntheticTarget::Shape::Rectangle;
            int intensity;
            if (!(ss >> t.center.x >> t.center.y >> t.center.z >> t.width >> t.height >> intensity))
                throw fail("expected `rect cx cy cz width height intensity`");
            t.intensity = static_cast<std::uint8_t>(intensity);
            scene.targets.push_back(t);
        } else if (kind == "disc") {
            SyntheticTarget t;
            t.shape = SyntheticTarget::Shape::Disc;
            int intensity;
            if (!(ss >> t.center.x >> t.center.y >> t.center.z >> t.radius >> intensity))
                throw fail("expected `disc cx cy cz radius intensity`");
            t.intensity = static_cast<std::uint8_t>(intensity);
            scene.targets.push_back(t);
        } else {
            throw fail("unknown scene directive");
        }
    }
    if (!have_image)
        throw FormatError("image", line_no, "scene is missing the `image` header");
    if (!have_rig)
        throw FormatError("rig", line_no, "scene is missing a rig definition");
    scene.rig.width = scene.image_width;
    scene.rig.height = scene.image_height;
    return scene;
}

SyntheticScene load_scene(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw Error("cannot open scene file '" + path + "'");
    return parse_scene(in);
}

void save_truth(const GroundTruth& truth, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw Error("cannot open '" + path + "' for writing");
    out << "# idx depth_cm xl yl xr yr\n";
    out.precision(17);
    for (std::size_t i = 0; i < truth.targets.size(); ++i) {
        const TargetTruth& t = truth.targets[i];
        out << i << ' ' << t.depth_cm << ' ' << t.left_center.x << ' ' << t.left_center.y << ' '
            << t.right_center.x << ' ' << t.right_center.y << '\n';
    }
}

}  // namespace stereoranger

#include "stereoranger/calibration_io.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "stereoranger/errors.hpp"

namespace stereoranger {

StereoCalibration make_stereo_calibration(const CalibrationResult& result, int width, int height) {
    StereoRig rig;
    rig.left = result.left;
    rig.right = result.right;
    rig.stereo = result.stereo;
    rig.width = width;
    rig.height = height;
    StereoCalibration out;
    out.left = result.left;
    out.right = result.right;
    out.stereo = result.stereo;
    out.rms_reprojection = result.rms_reprojection;
    out.rectified = compute_rectification(rig);
    StereoRemapTables maps = build_remap_tables(out.rectified, result.left, result.right, width, height);
    out.map_left = std::move(maps.left_x_y);
    out.map_right = std::move(maps.right_x_y);
    return out;
}

namespace {

void write_doubles(std::ostream& out, const double* v, int n) {
    char buf[32];
    for (int i = 0; i < n; ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", v[i]);
        out << buf << (i + 1 == n ? "" : " ");
    }
    out << '\n';
}

void write_intrinsics(std::ostream& out, const char* name, const CameraIntrinsics& intr) {
    out << "node " << name << '\n';
    const double v[9] = {intr.fx, intr.fy, intr.cx, intr.cy,
                         intr.dist[0], intr.dist[1], intr.dist[2], intr.dist[3], intr.dist[4]};
    write_doubles(out, v, 9);
}

void write_pose(std::ostream& out, const char* name, const Pose& pose) {
    out << "node " << name << '\n';
    double v[12];
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c)
            v[r * 3 + c] = pose.rotation(r, c);
    for (int i = 0; i < 3; ++i)
        v[9 + i] = pose.translation(i);
    write_doubles(out, v, 12);
}

void write_map(std::ostream& out, const char* name, const RemapTable& table, bool x_map) {
    out << "node " << name << '\n' << table.height << ' ' << table.width << '\n';
    char buf[24];
    const std::vector<float>& m = x_map ? table.map_x : table.map_y;
    std::string line;
    for (int r = 0; r < table.height; ++r) {
        line.clear();
        for (int c = 0; c < table.width; ++c) {
            // %.9g round-trips any finite float32 exactly
            std::snprintf(buf, sizeof(buf), "%.9g", m[static_cast<std::size_t>(r) * table.width + c]);
            if (c)
                line += ' ';
            line += buf;
        }
        line += '\n';
        out << line;
    }
}

class NodeReader {
public:
    explicit NodeReader(const std::string& path) : in_(path), path_(path) {
        if (!in_)
            throw Error("cannot open calibration file '" + path + "'");
    }

    /// Positions the reader just past `node <name>`; nodes must appear in
    /// the order requested.
    void expect_node(const std::string& name) {
        std::string line;
        while (std::getline(in_, line)) {
            ++line_no_;
            if (line.rfind("node ", 0) == 0) {
                const std::string found = line.substr(5);
                if (found == name)
                    return;
                throw FormatError(name, line_no_, "found node '" + found + "' instead");
            }
        }
        throw FormatError(name, line_no_, "node missing from '" + path_ + "'");
    }

    std::vector<double> read_doubles(const std::string& node, int n) {
        std::string line;
        if (!std::getline(in_, line))
            throw FormatError(node, line_no_, "unexpected end of file");
        ++line_no_;
        std::istringstream ss(line);
        std::vector<double> v(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i)
            if (!(ss >> v[static_cast<std::size_t>(i)]))
                throw FormatError(node, line_no_, "expected " + std::to_string(n) + " values");
        return v;
    }

    RemapTable read_map(const std::string& node, std::vector<float> RemapTable::* member,
                        RemapTable&& table) {
        std::string line;
        if (!std::getline(in_, line))
            throw FormatError(node, line_no_, "missing `rows cols` header");
        ++line_no_;
        int rows = 0, cols = 0;
        if (std::sscanf(line.c_str(), "%d %d", &rows, &cols) != 2 || rows < 1 || cols < 1)
            throw FormatError(node, line_no_, "bad `rows cols` header");
        if (table.width == 0) {
            table.width = cols;
            table.height = rows;
        } else if (table.width != cols || table.height != rows) {
            throw FormatError(node, line_no_, "map dimensions disagree with earlier nodes");
        }
        std::vector<float>& m = table.*member;
        m.resize(static_cast<std::size_t>(rows) * cols);
        for (int r = 0; r < rows; ++r) {
            if (!std::getline(in_, line))
                throw FormatError(node, line_no_, "truncated map data");
            ++line_no_;
            const char* p = line.c_str();
            char* end = nullptr;
            for (int c = 0; c < cols; ++c) {
                const float v = std::strtof(p, &end);
                if (end == p)
                    throw FormatError(node, line_no_, "expected " + std::to_string(cols) +
                                                          " values per row");
                m[static_cast<std::size_t>(r) * cols + c] = v;
                p = end;
            }
        }
        return std::move(table);
    }

private:
    std::ifstream in_;
    std::string path_;
    long line_no_ = 0;
};

CameraIntrinsics intrinsics_from(const std::vector<double>& v) {
    CameraIntrinsics intr;
    intr.fx = v[0];
    intr.fy = v[1];
    intr.cx = v[2];
    intr.cy = v[3];
    for (int i = 0; i < 5; ++i)
        intr.dist[static_cast<std::size_t>(i)] = v[static_cast<std::size_t>(4 + i)];
    return intr;
}

Pose pose_from(const std::vector<double>& v) {
    Pose pose;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c)
            pose.rotation(r, c) = v[static_cast<std::size_t>(r * 3 + c)];
    for (int i = 0; i < 3; ++i)
        pose.translation(i) = v[static_cast<std::size_t>(9 + i)];
    return pose;
}

}  // namespace

void save_calibration(const std::string& path, const StereoCalibration& calib) {
    std::ofstream out(path);
    if (!out)
        throw Error("cannot open '" + path + "' for writing");
    out << "stereoranger_calibration 1\n";
    write_intrinsics(out, "intrinsics_left", calib.left);
    write_intrinsics(out, "intrinsics_right", calib.right);
    write_pose(out, "stereo_pose", calib.stereo);
    out << "node rms_reprojection\n";
    write_doubles(out, &calib.rms_reprojection, 1);

    out << "node rectified_rig\n";
    double rig[21];
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) {
            rig[r * 3 + c] = calib.rectified.rot_left(r, c);
            rig[9 + r * 3 + c] = calib.rectified.rot_right(r, c);
        }
    rig[18] = calib.rectified.new_intrinsics.fx;
    rig[19] = calib.rectified.new_intrinsics.cx;
    rig[20] = calib.rectified.new_intrinsics.cy;
    write_doubles(out, rig, 21);
    out << "node baseline_cm\n";
    write_doubles(out, &calib.rectified.baseline_cm, 1);

    write_map(out, "stereoMapL_x", calib.map_left, true);
    write_map(out, "stereoMapL_y", calib.map_left, false);
    write_map(out, "stereoMapR_x", calib.map_right, true);
    write_map(out, "stereoMapR_y", calib.map_right, false);
    if (!out)
        throw Error("write failed for '" + path + "'");
}

StereoCalibration load_calibration(const std::string& path) {
    NodeReader reader(path);
    StereoCalibration calib;

    reader.expect_node("intrinsics_left");
    calib.left = intrinsics_from(reader.read_doubles("intrinsics_left", 9));
    reader.expect_node("intrinsics_right");
    calib.right = intrinsics_from(reader.read_doubles("intrinsics_right", 9));
    reader.expect_node("stereo_pose");
    calib.stereo = pose_from(reader.read_doubles("stereo_pose", 12));
    reader.expect_node("rms_reprojection");
    calib.rms_reprojection = reader.read_doubles("rms_reprojection", 1)[0];

    reader.expect_node("rectified_rig");
    const std::vector<double> rig = reader.read_doubles("rectified_rig", 21);
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) {
            calib.rectified.rot_left(r, c) = rig[static_cast<std::size_t>(r * 3 + c)];
            calib.rectified.rot_right(r, c) = rig[static_cast<std::size_t>(9 + r * 3 + c)];
        }
    calib.rectified.new_intrinsics.fx = calib.rectified.new_intrinsics.fy = rig[18];
    calib.rectified.new_intrinsics.cx = rig[19];
    calib.rectified.new_intrinsics.cy = rig[20];
    reader.expect_node("baseline_cm");
    calib.rectified.baseline_cm = reader.read_doubles("baseline_cm", 1)[0];

    reader.expect_node("stereoMapL_x");
    calib.map_left = reader.read_map("stereoMapL_x", &RemapTable::map_x, RemapTable{});
    reader.expect_node("stereoMapL_y");
    calib.map_left = reader.read_map("stereoMapL_y", &RemapTable::map_y, std::move(calib.map_left));
    reader.expect_node("stereoMapR_x");
    calib.map_right = reader.read_map("stereoMapR_x", &RemapTable::map_x, RemapTable{});
    reader.expect_node("stereoMapR_y");
    calib.map_right = reader.read_map("stereoMapR_y", &RemapTable::map_y, std::move(calib.map_right));
    return calib;
}

}  // namespace stereoranger

// stereoranger command line: calibrate, rectify, run, synth, eval, bench.
// Exit codes: 0 success, 1 configuration error, 2 data error.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "stereoranger/calibration.hpp"
#include "stereoranger/calibration_io.hpp"
#include "stereoranger/errors.hpp"
#include "stereoranger/evaluate.hpp"
#include "stereoranger/pipeline.hpp"
#include "stereoranger/synthsim.hpp"

namespace fs = std::filesystem;
using namespace stereoranger;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitData = 2;

struct CalibrateArgs {
    std::string config_path;
    std::string corners_path;
    std::string out_path;
};

int cmd_calibrate(const CalibrateArgs& args) {
    const ConfigFile file = ConfigFile::load(args.config_path);
    BoardSpec board;
    board.inner_rows = file.get_int("board.inner_rows", board.inner_rows);
    board.inner_cols = file.get_int("board.inner_cols", board.inner_cols);
    board.square_size_cm = file.get_double("board.square_size_cm", board.square_size_cm);
    const int width = file.get_int("io.width", 640);
    const int height = file.get_int("io.height", 480);
    board.validate();

    const auto observations = load_corner_file(args.corners_path, board);
    const CalibrationResult result = calibrate_stereo(board, observations, width, height);
    const StereoCalibration calib = make_stereo_calibration(result, width, height);
    save_calibration(args.out_path, calib);

    std::cout << "views: " << result.view_poses_left.size() << "\n"
              << "rms reprojection: " << result.rms_reprojection << " px\n"
              << "baseline: " << result.baseline() << " cm\n"
              << "left fx fy cx cy: " << result.left.fx << ' ' << result.left.fy << ' '
              << result.left.cx << ' ' << result.left.cy << "\n"
              << "right fx fy cx cy: " << result.right.fx << ' ' << result.right.fy << ' '
              << result.right.cx << ' ' << result.right.cy << "\n"
              << "calibration written to " << args.out_path << "\n";
    return kExitOk;
}

struct RectifyArgs {
    std::string calib_path;
    std::string in_dir;
    std::string out_dir;
};

int cmd_rectify(const RectifyArgs& args) {
    const StereoCalibration calib = load_calibration(args.calib_path);
    fs::create_directories(args.out_dir);
    DirectoryFrameSource source(args.in_dir);
    long count = 0;
    while (auto frame = source.next()) {
        const Image8 left = remap(frame->left, calib.map_left);
        const Image8 right = remap(frame->right, calib.map_right);
        save_pgm(left, args.out_dir + "/" + DirectoryFrameSource::left_name(frame->frame_idx));
        save_pgm(right, args.out_dir + "/" + DirectoryFrameSource::right_name(frame->frame_idx));
        ++count;
    }
    if (count == 0)
        throw Error("no frame pairs found in '" + args.in_dir + "'");
    std::cout << "rectified " << count << " frame pairs into " << args.out_dir << "\n";
    return kExitOk;
}

struct RunArgs {
    std::string config_path;
    std::string out_path;        // FrameResult stream; empty = stdout
    std::string detections_path; // optional detection export
    std::string signals_path;    // optional signal stream export
};

int cmd_run(const RunArgs& args) {
    const ConfigFile file = ConfigFile::load(args.config_path);
    const PipelineConfig cfg = PipelineConfig::from_config(file);
    if (cfg.source_spec.empty())
        throw ConfigError("config is missing io.source");
    auto source = make_frame_source(cfg.source_spec, 1000.0 / cfg.target_fps);

    std::ofstream out_file, det_file, sig_file;
    std::ostream* out = &std::cout;
    if (!args.out_path.empty()) {
        out_file.open(args.out_path);
        if (!out_file)
            throw Error("cannot open '" + args.out_path + "' for writing");
        out = &out_file;
    }
    if (!args.detections_path.empty()) {
        det_file.open(args.detections_path);
        if (!det_file)
            throw Error("cannot open '" + args.detections_path + "' for writing");
    }
    if (!args.signals_path.empty()) {
        sig_file.open(args.signals_path);
        if (!sig_file)
            throw Error("cannot open '" + args.signals_path + "' for writing");
    }

    Pipeline pipeline(cfg);
    long frames = 0;
    pipeline.run(*source, [&](const FrameResult& result) {
        ++frames;
        for (const std::string& line : format_frame_result_lines(result))
            *out << line << '\n';
        if (!result.error.empty())
            std::cerr << "frame " << result.frame_idx << ": " << result.error << '\n';
        if (det_file) {
            for (const Detection& d : result.detections_left)
                det_file << format_detection_line(result.frame_idx, 'L', d) << '\n';
            for (const Detection& d : result.detections_right)
                det_file << format_detection_line(result.frame_idx, 'R', d) << '\n';
        }
        if (sig_file)
            sig_file << format_signal_line(result.frame_idx, result.signal, result.nearest_depth_cm)
                     << '\n';
    });
    std::cerr << "processed " << frames << " frames\n";
    return kExitOk;
}

struct SynthArgs {
    std::string scene_path;
    std::string out_dir;
    long frames = 1;
};

int cmd_synth(const SynthArgs& args) {
    const SyntheticScene scene = load_scene(args.scene_path);
    const StereoRender render = render_stereo(scene);
    fs::create_directories(args.out_dir);
    for (long i = 0; i < args.frames; ++i) {
        save_pgm(render.left, args.out_dir + "/" + DirectoryFrameSource::left_name(i));
        save_pgm(render.right, args.out_dir + "/" + DirectoryFrameSource::right_name(i));
    }
    save_truth(render.truth, args.out_dir + "/truth.txt");
    std::cout << "rendered " << args.frames << " frame pairs (" << scene.targets.size()
              << " targets) into " << args.out_dir << "\n";
    return kExitOk;
}

struct EvalArgs {
    std::string table_path;
};

int cmd_eval(const EvalArgs& args) {
    const auto rows = load_error_rows(args.table_path);
    const ErrorReport report = evaluate_error_table(rows);
    std::cout << format_error_report(report);
    return kExitOk;
}

struct BenchArgs {
    std::string config_path;
    long frames = 100;
};

int cmd_bench(const BenchArgs& args) {
    const ConfigFile file = ConfigFile::load(args.config_path);
    const PipelineConfig cfg = PipelineConfig::from_config(file);
    if (cfg.source_spec.empty())
        throw ConfigError("config is missing io.source");
    auto source = make_frame_source(cfg.source_spec, 1000.0 / cfg.target_fps);
    const LatencyReport report = bench_latency(cfg, *source, args.frames);
    std::cout << format_latency_report(report);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"stereo-vision ranging toolkit"};
    app.require_subcommand(1);

    CalibrateArgs calibrate_args;
    auto* calibrate = app.add_subcommand("calibrate", "corner files -> calibration file");
    calibrate->add_option("--config", calibrate_args.config_path, "config file with [board] and [io]")
        ->required();
    calibrate->add_option("--corners", calibrate_args.corners_path, "corner-list file")->required();
    calibrate->add_option("--out", calibrate_args.out_path, "output calibration file")->required();

    RectifyArgs rectify_args;
    auto* rectify = app.add_subcommand("rectify", "frames + calibration -> rectified frames");
    rectify->add_option("--calib", rectify_args.calib_path, "calibration file")->required();
    rectify->add_option("--in", rectify_args.in_dir, "input frame directory")->required();
    rectify->add_option("--out", rectify_args.out_dir, "output directory")->required();

    RunArgs run_args;
    auto* run = app.add_subcommand("run", "full pipeline -> frame result stream");
    run->add_option("--config", run_args.config_path, "pipeline config file")->required();
    run->add_option("--out", run_args.out_path, "result stream file (default stdout)");
    run->add_option("--detections", run_args.detections_path, "detection export file");
    run->add_option("--signals", run_args.signals_path, "signal stream file");

    SynthArgs synth_args;
    auto* synth = app.add_subcommand("synth", "scene file -> rendered pairs + truth");
    synth->add_option("--scene", synth_args.scene_path, "scene description file")->required();
    synth->add_option("--out", synth_args.out_dir, "output directory")->required();
    synth->add_option("--frames", synth_args.frames, "number of identical pairs to write")
        ->check(CLI::PositiveNumber);

    EvalArgs eval_args;
    auto* eval = app.add_subcommand("eval", "actual/measured table -> error report");
    eval->add_option("--table", eval_args.table_path, "rows of `actual measured`")->required();

    BenchArgs bench_args;
    auto* bench = app.add_subcommand("bench", "latency report over n frames");
    bench->add_option("--config", bench_args.config_path, "pipeline config file")->required();
    bench->add_option("--frames", bench_args.frames, "frame count (>= 10)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (calibrate->parsed())
            return cmd_calibrate(calibrate_args);
        if (rectify->parsed())
            return cmd_rectify(rectify_args);
        if (run->parsed())
            return cmd_run(run_args);
        if (synth->parsed())
            return cmd_synth(synth_args);
        if (eval->parsed())
            return cmd_eval(eval_args);
        if (bench->parsed())
            return cmd_bench(bench_args);
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const CalibrationMissing& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const InvalidFov& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    }
    return kExitConfig;
}

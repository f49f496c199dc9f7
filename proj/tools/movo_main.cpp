#include "movo/config.hpp"
#include "movo/eval.hpp"
#include "movo/pipeline.hpp"
#include "movo/svg_plot.hpp"
#include "movo/synth.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>

namespace {

using movo::AlignMode;
using nlohmann::json;

AlignMode parse_align(const std::string& s) {
    if (s == "none") return AlignMode::None;
    if (s == "6dof") return AlignMode::Rigid6DoF;
    if (s == "7dof") return AlignMode::Similarity7DoF;
    throw movo::ParseError("unknown alignment mode: " + s);
}

struct RunArgs {
    std::string dataset;
    std::string seq;
    std::string depth_root;
    std::string out_dir = ".";
    std::string config_file;
    std::string manifest_file;
    double depth_scale = 1.0;
    std::uint64_t seed = 0;
    bool seed_set = false;
    bool depth_scale_set = false;
};

int do_run(RunArgs a) {
    namespace fs = std::filesystem;
    movo::ConfigMap cmap;
    if (!a.manifest_file.empty()) {
        std::ifstream in(a.manifest_file);
        if (!in) throw movo::IoError("cannot open manifest: " + a.manifest_file);
        json m = json::parse(in);
        a.dataset = m.at("dataset").get<std::string>();
        a.seq = m.at("sequence").get<std::string>();
        a.depth_root = m.value("depth_root", std::string{});
        for (const auto& [k, v] : m.at("config").items()) cmap[k] = v.get<std::string>();
    } else {
        if (!a.config_file.empty()) cmap = movo::load_config_file(a.config_file);
        if (a.seed_set) cmap["pipeline.seed"] = std::to_string(a.seed);
        if (a.depth_scale_set) cmap["pipeline.depth_scale"] = std::to_string(a.depth_scale);
    }
    const movo::PipelineConfig cfg = movo::config_from_map(cmap);

    std::optional<fs::path> depth_root;
    if (!a.depth_root.empty()) {
        if (fs::is_directory(a.depth_root)) {
            depth_root = fs::path(a.depth_root);
        } else {
            std::cerr << "warning: depth root not found, running unscaled: " << a.depth_root
                      << "\n";
        }
    }
    const movo::SequenceSource src = movo::open_sequence(a.dataset, a.seq, depth_root);

    const auto t0 = std::chrono::steady_clock::now();
    auto [traj, decisions] = movo::process_sequence(src, cfg);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    fs::create_directories(a.out_dir);
    const fs::path poses_path = fs::path(a.out_dir) / (a.seq + "_poses.txt");
    const fs::path dec_path = fs::path(a.out_dir) / (a.seq + "_decisions.jsonl");
    const fs::path man_path = fs::path(a.out_dir) / (a.seq + "_manifest.json");
    movo::write_kitti_poses(traj, poses_path);
    movo::write_decision_log(decisions, dec_path);

    json manifest;
    manifest["dataset"] = a.dataset;
    manifest["sequence"] = a.seq;
    manifest["depth_root"] = a.depth_root;
    manifest["seed"] = cfg.seed;
    manifest["config"] = movo::config_to_map(cfg);
    manifest["outputs"] = {{"poses", poses_path.string()}, {"decisions", dec_path.string()}};
    manifest["duration_seconds"] = secs;
    std::ofstream man(man_path);
    if (!man) throw movo::IoError("cannot write manifest: " + man_path.string());
    man << manifest.dump(2) << "\n";

    std::cout << "wrote " << poses_path.string() << " (" << traj.size() << " poses, "
              << secs << " s)\n";
    return 0;
}

int do_eval(const std::string& est_file, const std::string& gt_file, const std::string& align,
            const std::string& out_json) {
    const movo::Trajectory est = movo::read_kitti_poses(est_file);
    const movo::Trajectory gt = movo::read_kitti_poses(gt_file);
    const movo::MetricsReport rep = movo::evaluate(est, gt, parse_align(align));

    std::printf("%-12s %12s\n", "metric", "value");
    std::printf("%-12s %12.6f\n", "t_err_pct", rep.t_err);
    std::printf("%-12s %12.6f\n", "r_err_d100", rep.r_err);
    std::printf("%-12s %12.6f\n", "ate_m", rep.ate);
    std::printf("%-12s %12.6f\n", "rpe_t_m", rep.rpe_t);
    std::printf("%-12s %12.6f\n", "rpe_r_deg", rep.rpe_r);

    if (!out_json.empty()) {
        json j{{"t_err_percent", rep.t_err},
               {"r_err_deg_per_100m", rep.r_err},
               {"ate_m", rep.ate},
               {"rpe_t_m", rep.rpe_t},
               {"rpe_r_deg", rep.rpe_r},
               {"align", align}};
        std::ofstream out(out_json);
        if (!out) throw movo::IoError("cannot write report: " + out_json);
        out << j.dump(2) << "\n";
    }
    return 0;
}

int do_synth(const std::string& mode_str, int points, int frames, std::uint64_t seed,
             const std::string& out_root, const std::string& depth_root,
             const std::string& seq, double speed, double speed_variation) {
    movo::SceneMode mode;
    if (mode_str == "general") mode = movo::SceneMode::GeneralDepth;
    else if (mode_str == "planar") mode = movo::SceneMode::Planar;
    else if (mode_str == "rotation") mode = movo::SceneMode::PureRotation;
    else throw movo::ParseError("unknown scene mode: " + mode_str);

    movo::SceneOptions opts;
    opts.speed = speed;
    opts.speed_variation = speed_variation;
    const movo::SyntheticScene scene = movo::generate_scene(mode, points, frames, seed, opts);
    movo::export_scene(scene, out_root, seq, depth_root.empty() ? out_root + "/depth" : depth_root);
    std::cout << "exported " << frames << " frames to " << out_root << " (seq " << seq << ")\n";
    return 0;
}

int do_plot(const std::vector<std::string>& pose_files, const std::string& gt_file,
            const std::string& out_file) {
    std::vector<movo::PlotSeries> series;
    int idx = 0;
    for (const std::string& f : pose_files) {
        series.push_back({"est" + std::to_string(idx++), movo::read_kitti_poses(f), false});
    }
    if (!gt_file.empty()) {
        series.push_back({"ground truth", movo::read_kitti_poses(gt_file), true});
    }
    const std::string svg = movo::render_trajectories_svg(series);
    std::ofstream out(out_file, std::ios::binary);
    if (!out) throw movo::IoError("cannot write SVG: " + out_file);
    out << svg;
    std::cout << "wrote " << out_file << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"monocular visual odometry toolkit"};
    app.require_subcommand(1);

    RunArgs ra;
    auto* run = app.add_subcommand("run", "run the VO pipeline on a KITTI-layout sequence");
    run->add_option("--dataset", ra.dataset, "dataset root");
    run->add_option("--seq", ra.seq, "sequence id, e.g. 00");
    run->add_option("--depth", ra.depth_root, "depth-map root (PFM files)");
    run->add_option("--depth-scale", ra.depth_scale, "multiplier for loaded depths")
        ->each([&](const std::string&) { ra.depth_scale_set = true; });
    run->add_option("--out", ra.out_dir, "output directory");
    run->add_option("--seed", ra.seed, "master RNG seed")
        ->each([&](const std::string&) { ra.seed_set = true; });
    run->add_option("--config", ra.config_file, "config file (key = value lines)");
    run->add_option("--from-manifest", ra.manifest_file, "re-run from a previous manifest");

    std::string est_file, gt_file, align = "none", out_json;
    auto* ev = app.add_subcommand("eval", "evaluate a trajectory against ground truth");
    ev->add_option("--est", est_file, "estimated pose file")->required();
    ev->add_option("--gt", gt_file, "ground-truth pose file")->required();
    ev->add_option("--align", align, "alignment: none, 6dof, 7dof");
    ev->add_option("--out", out_json, "also write the report as JSON");

    std::string mode = "general", synth_out = "synth_data", synth_depth, synth_seq = "00";
    int points = 400, frames = 10;
    std::uint64_t synth_seed = 0;
    double speed = 1.0, speed_variation = 0.0;
    auto* sy = app.add_subcommand("synth", "export a synthetic KITTI-layout dataset");
    sy->add_option("--mode", mode, "general, planar, or rotation");
    sy->add_option("--points", points, "number of scene points");
    sy->add_option("--frames", frames, "number of frames");
    sy->add_option("--seed", synth_seed, "scene RNG seed");
    sy->add_option("--out", synth_out, "dataset root to write");
    sy->add_option("--depth-out", synth_depth, "depth root to write (default <out>/depth)");
    sy->add_option("--seq", synth_seq, "sequence id to write");
    sy->add_option("--speed", speed, "meters per frame");
    sy->add_option("--speed-variation", speed_variation, "sinusoidal speed amplitude fraction");

    std::vector<std::string> pose_files;
    std::string plot_gt, plot_out = "trajectory.svg";
    auto* pl = app.add_subcommand("plot", "emit a top-down SVG trajectory plot");
    pl->add_option("poses", pose_files, "pose files to plot")->required();
    pl->add_option("--gt", plot_gt, "ground-truth pose file (drawn dashed)");
    pl->add_option("--out", plot_out, "output SVG path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (run->parsed()) return do_run(ra);
        if (ev->parsed()) return do_eval(est_file, gt_file, align, out_json);
        if (sy->parsed()) {
            return do_synth(mode, points, frames, synth_seed, synth_out, synth_depth, synth_seq,
                            speed, speed_variation);
        }
        if (pl->parsed()) return do_plot(pose_files, plot_gt, plot_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

#include "blindspot/cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "blindspot/pipeline.hpp"
#include "blindspot/synth.hpp"

namespace blindspot {

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open file for writing: " + path.string());
    out << text;
}

struct CommonOpts {
    std::string config_path;

    PipelineConfig load() const {
        return config_path.empty() ? PipelineConfig{} : load_config(config_path);
    }
};

int cmd_flow(const std::string& a_path, const std::string& b_path,
             const std::string& out_path, const SolverParams& params) {
    Frame a = load_pgm_file(a_path);
    Frame b = load_pgm_file(b_path);
    FlowField flow = solve_horn_schunck(a, b, params);
    Derivatives d = estimate_derivatives(a, b);

    double energy = flow_energy(flow, d, params.alpha);
    double zero_energy = flow_energy(FlowField(flow.width, flow.height), d, params.alpha);
    double mean_mag = 0.0;
    for (size_t i = 0; i < flow.u.size(); ++i) mean_mag += std::hypot(flow.u[i], flow.v[i]);
    mean_mag /= static_cast<double>(flow.u.size());

    std::cout << "energy=" << energy << " zero_energy=" << zero_energy
              << " mean_magnitude=" << mean_mag << "\n";
    if (!out_path.empty()) save_flow_file(out_path, flow);
    return 0;
}

int cmd_detect(const std::string& seq_dir, const std::string& depth_dir,
               const std::string& out_path, const std::string& report_path,
               PipelineConfig cfg) {
    FrameSequence seq = load_sequence(seq_dir);
    std::vector<DepthFrame> depth;
    if (!depth_dir.empty()) depth = load_depth_sequence(depth_dir);

    RunReport report;
    auto records = run_detection(seq, depth.empty() ? nullptr : &depth, cfg, &report);

    std::string jsonl = records_to_jsonl(records, cfg.canonical);
    if (out_path.empty())
        std::cout << jsonl;
    else
        write_text(out_path, jsonl);
    if (!report_path.empty())
        write_text(report_path, report_to_json(report, cfg.canonical).dump(2) + "\n");

    std::cout << "processed=" << report.frames_processed
              << " boxes=" << report.boxes_emitted << " red=" << report.alerts_red
              << " yellow=" << report.alerts_yellow << " green=" << report.alerts_green
              << "\n";
    return 0;
}

int cmd_stereo(const std::string& left_path, const std::string& right_path,
               const std::string& depth_path, const std::string& out_path,
               const PipelineConfig& cfg) {
    DepthFrame depth;
    if (!depth_path.empty()) {
        depth = load_depth_pgm_file(depth_path);
    } else {
        Frame left = load_pgm_file(left_path);
        Frame right = load_pgm_file(right_path);
        depth = compute_disparity(left, right, cfg.stereo);
    }

    DepthFrame cleaned = remove_background(depth, cfg.stereo.far_cutoff);
    if (cfg.stereo_smooth_sigma > 0.0)
        cleaned = smooth_depth(cleaned, cfg.stereo_smooth_sigma);
    AlertResult result = classify_alert(cleaned, cfg.bands, cfg.stereo);

    nlohmann::ordered_json j;
    j["alert"] = alert_name(result.level);
    j["band_counts"] = result.band_counts;
    std::string text = j.dump() + "\n";
    if (out_path.empty())
        std::cout << text;
    else
        write_text(out_path, text);
    std::cout << "alert=" << alert_name(result.level) << "\n";
    return 0;
}

int cmd_ttc(const std::string& seq_dir, long frame, const std::string& out_path,
            const PipelineConfig& cfg) {
    FrameSequence seq = load_sequence(seq_dir);
    if (frame < 0 || frame + 1 >= static_cast<long>(seq.frames.size()))
        throw Error("ttc: frame index out of range");

    FlowField flow = solve_horn_schunck(seq.frames[frame], seq.frames[frame + 1], cfg.flow);
    FocusOfExpansion foe = estimate_foe(flow, cfg.ttc.magnitude_floor);
    TTCProfile profile = column_ttc(flow, foe, cfg.ttc.column_width);
    double heading = heading_angle(profile, cfg.ttc.max_steer);

    std::string csv = ttc_to_csv(profile);
    if (out_path.empty())
        std::cout << csv;
    else
        write_text(out_path, csv);

    double min_ttc = *std::min_element(profile.ttc.begin(), profile.ttc.end());
    std::cout << "foe=(" << foe.x << "," << foe.y << ") min_ttc=" << min_ttc
              << " heading=" << heading << "\n";
    return 0;
}

int cmd_synth(const std::string& preset_name, const std::string& spec_path,
              const std::string& out_dir, const std::string& truth_path,
              const std::string& dump_spec_path, bool with_depth, int frames_override,
              long seed_override) {
    SceneSpec spec;
    if (!preset_name.empty())
        spec = preset_scenario(preset_name);
    else
        spec = load_scene_spec(spec_path);
    if (frames_override > 0) spec.n_frames = frames_override;
    if (seed_override >= 0) spec.seed = static_cast<std::uint64_t>(seed_override);

    auto [seq, truth] = render_sequence(spec);
    std::filesystem::create_directories(out_dir);
    save_sequence(out_dir, seq.frames);
    write_text(std::filesystem::path(out_dir) /
                   (truth_path.empty() ? "truth.jsonl" : truth_path),
               truth_to_jsonl(truth));
    if (with_depth)
        save_depth_sequence(std::filesystem::path(out_dir) / "depth",
                            render_depth_sequence(spec));
    if (!dump_spec_path.empty()) save_scene_spec(dump_spec_path, spec);

    std::cout << "rendered " << seq.frames.size() << " frames to " << out_dir << "\n";
    return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
    CLI::App app{"Blind-spot motion detection toolkit"};
    app.require_subcommand(1);

    CommonOpts common;

    // flow
    auto* flow_cmd = app.add_subcommand("flow", "Dense optical flow between two frames");
    std::string flow_a, flow_b, flow_out;
    SolverParams solver;
    flow_cmd->add_option("frame1", flow_a, "first PGM frame")->required();
    flow_cmd->add_option("frame2", flow_b, "second PGM frame")->required();
    flow_cmd->add_option("--out", flow_out, "binary flow dump path");
    flow_cmd->add_option("--alpha", solver.alpha, "smoothness weight");
    flow_cmd->add_option("--iters", solver.max_iters, "max iterations");
    flow_cmd->add_option("--epsilon", solver.epsilon, "convergence tolerance");

    // detect
    auto* detect_cmd = app.add_subcommand("detect", "Run the detection pipeline on a sequence");
    std::string det_dir, det_depth_dir, det_out, det_report, det_overlay_dir, det_shape_mode;
    int det_skip = 0;
    bool det_canonical = false, det_pure = false, det_mirror = false;
    detect_cmd->add_option("sequence", det_dir, "directory of frame_NNNNNN.pgm")->required();
    detect_cmd->add_option("--depth-dir", det_depth_dir, "aligned 16-bit depth sequence");
    detect_cmd->add_option("--out", det_out, "JSON-lines records path");
    detect_cmd->add_option("--report", det_report, "run report JSON path");
    detect_cmd->add_option("--overlay-dir", det_overlay_dir, "write PPM overlays here");
    detect_cmd->add_flag("--pure-overlay", det_pure, "annotations on black");
    detect_cmd->add_option("--frame-skip", det_skip, "process every Nth frame");
    detect_cmd->add_option("--shape-mode", det_shape_mode, "off|fallback|always");
    detect_cmd->add_flag("--canonical", det_canonical, "omit timing from records");
    detect_cmd->add_flag("--mirror", det_mirror, "opposite-side blind spot");
    detect_cmd->add_option("--config", common.config_path, "config file");

    // stereo
    auto* stereo_cmd = app.add_subcommand("stereo", "Depth alert from a stereo pair or depth map");
    std::string st_left, st_right, st_depth, st_out;
    stereo_cmd->add_option("--left", st_left, "left PGM frame");
    stereo_cmd->add_option("--right", st_right, "right PGM frame");
    stereo_cmd->add_option("--depth", st_depth, "precomputed 16-bit depth PGM");
    stereo_cmd->add_option("--out", st_out, "record JSON path");
    stereo_cmd->add_option("--config", common.config_path, "config file");

    // ttc
    auto* ttc_cmd = app.add_subcommand("ttc", "Time-to-collision profile for a frame pair");
    std::string ttc_dir, ttc_out;
    long ttc_frame = 0;
    ttc_cmd->add_option("sequence", ttc_dir, "directory of frame_NNNNNN.pgm")->required();
    ttc_cmd->add_option("--frame", ttc_frame, "frame index of the pair (default 0)");
    ttc_cmd->add_option("--out", ttc_out, "profile CSV path");
    ttc_cmd->add_option("--config", common.config_path, "config file");

    // synth
    auto* synth_cmd = app.add_subcommand("synth", "Render a synthetic scenario");
    std::string sy_preset, sy_spec, sy_out, sy_truth, sy_dump;
    bool sy_depth = false, sy_list = false;
    int sy_frames = 0;
    long sy_seed = -1;
    synth_cmd->add_option("--preset", sy_preset, "preset scenario name");
    synth_cmd->add_option("--spec", sy_spec, "scene spec file");
    synth_cmd->add_option("--out", sy_out, "output directory");
    synth_cmd->add_option("--truth", sy_truth, "truth file name (inside --out)");
    synth_cmd->add_option("--dump-spec", sy_dump, "write the resolved scene spec here");
    synth_cmd->add_flag("--depth", sy_depth, "also render the depth sequence");
    synth_cmd->add_option("--frames", sy_frames, "override frame count");
    synth_cmd->add_option("--seed", sy_seed, "override scene seed");
    synth_cmd->add_flag("--list", sy_list, "list preset names");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (flow_cmd->parsed()) return cmd_flow(flow_a, flow_b, flow_out, solver);

        if (detect_cmd->parsed()) {
            PipelineConfig cfg = common.load();
            if (det_skip > 0) cfg.frame_skip = det_skip;
            if (!det_shape_mode.empty()) {
                if (det_shape_mode == "off") cfg.shape_mode = ShapeMode::Off;
                else if (det_shape_mode == "fallback") cfg.shape_mode = ShapeMode::FallbackOnly;
                else if (det_shape_mode == "always") cfg.shape_mode = ShapeMode::Always;
                else {
                    std::cerr << "unknown shape mode: " << det_shape_mode << "\n";
                    return 1;
                }
            }
            cfg.canonical = cfg.canonical || det_canonical;
            cfg.mirror = cfg.mirror || det_mirror;
            if (!det_overlay_dir.empty()) {
                cfg.emit_overlays = true;
                cfg.overlay_dir = det_overlay_dir;
                cfg.pure_overlays = det_pure;
            }
            return cmd_detect(det_dir, det_depth_dir, det_out, det_report, cfg);
        }

        if (stereo_cmd->parsed()) {
            if (st_depth.empty() && (st_left.empty() || st_right.empty())) {
                std::cerr << "stereo: need --depth or both --left and --right\n";
                return 1;
            }
            return cmd_stereo(st_left, st_right, st_depth, st_out, common.load());
        }

        if (ttc_cmd->parsed()) return cmd_ttc(ttc_dir, ttc_frame, ttc_out, common.load());

        if (synth_cmd->parsed()) {
            if (sy_list) {
                for (const auto& [name, spec] : preset_scenarios())
                    std::cout << name << "\n";
                return 0;
            }
            if (sy_preset.empty() == sy_spec.empty()) {
                std::cerr << "synth: need exactly one of --preset or --spec\n";
                return 1;
            }
            if (sy_out.empty()) {
                std::cerr << "synth: --out is required\n";
                return 1;
            }
            return cmd_synth(sy_preset, sy_spec, sy_out, sy_truth, sy_dump, sy_depth,
                             sy_frames, sy_seed);
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}

}  // namespace blindspot

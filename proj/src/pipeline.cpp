#include "blindspot/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

namespace blindspot {

AlertLevel fuse_alert(const DetectionRecord& rec) {
    if (rec.stereo_ran) return rec.stereo.level;
    if (rec.box || rec.circles.size() >= 2) return AlertLevel::Red;
    return AlertLevel::Green;
}

std::vector<DetectionRecord> run_detection(const FrameSequence& seq,
                                           const std::vector<DepthFrame>* depth,
                                           const PipelineConfig& cfg,
                                           RunReport* report) {
    if (seq.frames.size() < 2)
        throw Error("run_detection: sequence needs at least 2 frames");
    if (depth && depth->size() != seq.frames.size())
        throw Error("run_detection: depth sequence not aligned frame-for-frame");
    if (cfg.frame_skip < 1)
        throw Error("run_detection: frame_skip must be >= 1");
    if (!cfg.flow_enabled && cfg.shape_mode == ShapeMode::Off && !cfg.stereo_enabled)
        throw Error("run_detection: no path enabled");

    ClassifyParams classify_p = cfg.classify;
    classify_p.mirror = cfg.mirror;
    TrackParams track_p = cfg.track;
    track_p.mirror = cfg.mirror;

    const int w = seq.frames.front().width;
    const int h = seq.frames.front().height;
    const RegionMask mask = default_region_mask(w, h, cfg.hough.corner_fraction);
    const long n = static_cast<long>(seq.frames.size());

    TrackState state;
    std::vector<DetectionRecord> records;

    auto run_start = std::chrono::steady_clock::now();
    for (long idx = 0; idx < n; idx += cfg.frame_skip) {
        auto frame_start = std::chrono::steady_clock::now();
        DetectionRecord rec;
        rec.frame_index = idx;

        bool has_next = idx + 1 < n;
        FlowField flow;
        if (cfg.flow_enabled && has_next) {
            flow = solve_horn_schunck(seq.frames[idx], seq.frames[idx + 1], cfg.flow);
            rec.flow_ran = true;
            rec.samples = classify_all(sample_vectors(flow, classify_p.grid_stride),
                                       classify_p);
            TrackOutcome outcome = track_frame(state, rec.samples, idx, w, h, track_p);
            rec.box = outcome.box;
            rec.reject_gate = outcome.reject_gate;
            rec.ratio = outcome.ratio;
            rec.object_count = outcome.object_count;
            rec.background_count = outcome.background_count;
        }

        bool shape_wanted =
            cfg.shape_mode == ShapeMode::Always ||
            (cfg.shape_mode == ShapeMode::FallbackOnly && !rec.box);
        if (shape_wanted) {
            rec.shape_ran = true;
            rec.circles = hough_circles(detect_edges(seq.frames[idx], cfg.hough),
                                        cfg.hough, mask);
        }

        if (cfg.stereo_enabled && depth) {
            rec.stereo_ran = true;
            DepthFrame d = remove_background((*depth)[idx], cfg.stereo.far_cutoff);
            if (cfg.stereo_smooth_sigma > 0.0)
                d = smooth_depth(d, cfg.stereo_smooth_sigma);
            rec.stereo = classify_alert(d, cfg.bands, cfg.stereo);
        }

        if (cfg.ttc_enabled && rec.flow_ran) {
            try {
                FocusOfExpansion foe = estimate_foe(flow, cfg.ttc.magnitude_floor);
                TTCProfile profile = column_ttc(flow, foe, cfg.ttc.column_width);
                rec.ttc_ran = true;
                rec.ttc_status = "ok";
                rec.min_ttc = *std::min_element(profile.ttc.begin(), profile.ttc.end());
                rec.heading = heading_angle(profile, cfg.ttc.max_steer);
            } catch (const TooFewVectorsError&) {
                rec.ttc_status = "too_few_vectors";
            } catch (const DegenerateFieldError&) {
                rec.ttc_status = "degenerate_field";
            }
        }

        rec.final_alert = fuse_alert(rec);
        rec.elapsed_ms = std::chrono::duration<double, std::milli>(
                             std::chrono::steady_clock::now() - frame_start)
                             .count();

        if (cfg.emit_overlays && !cfg.overlay_dir.empty()) {
            RgbImage img = emit_overlay(seq.frames[idx], rec, cfg, cfg.pure_overlays);
            char name[48];
            std::snprintf(name, sizeof(name), "overlay_%06ld.ppm", idx);
            std::filesystem::create_directories(cfg.overlay_dir);
            save_ppm_file(std::filesystem::path(cfg.overlay_dir) / name, img);
        }

        records.push_back(std::move(rec));
    }

    if (report) {
        report->frames_total = n;
        report->frames_processed = static_cast<long>(records.size());
        report->frames_skipped = n - report->frames_processed;
        for (const auto& r : records) {
            if (r.box) ++report->boxes_emitted;
            switch (r.final_alert) {
                case AlertLevel::Red: ++report->alerts_red; break;
                case AlertLevel::Yellow: ++report->alerts_yellow; break;
                case AlertLevel::Green: ++report->alerts_green; break;
            }
        }
        report->wall_seconds = std::chrono::duration<double>(
                                   std::chrono::steady_clock::now() - run_start)
                                   .count();
        report->throughput_fps =
            report->wall_seconds > 0.0 ? n / report->wall_seconds : 0.0;
    }
    return records;
}

nlohmann::ordered_json record_to_json(const DetectionRecord& rec, bool canonical) {
    nlohmann::ordered_json j;
    j["frame"] = rec.frame_index;
    j["flow_ran"] = rec.flow_ran;
    if (rec.flow_ran) {
        if (rec.box) {
            j["box"] = {{"cx", rec.box->cx},
                        {"cy", rec.box->cy},
                        {"half_w", rec.box->half_w},
                        {"half_h", rec.box->half_h}};
        } else {
            j["box"] = nullptr;
            j["reject_gate"] = rec.reject_gate;
        }
        j["object_ratio"] = std::isinf(rec.ratio) ? nlohmann::ordered_json(nullptr)
                                                  : nlohmann::ordered_json(rec.ratio);
        j["object_count"] = rec.object_count;
        j["background_count"] = rec.background_count;
    }
    j["shape_ran"] = rec.shape_ran;
    if (rec.shape_ran) {
        j["circles"] = nlohmann::ordered_json::array();
        for (const auto& c : rec.circles)
            j["circles"].push_back(
                {{"cx", c.cx}, {"cy", c.cy}, {"r", c.r}, {"votes", c.votes}});
    }
    j["stereo_ran"] = rec.stereo_ran;
    if (rec.stereo_ran) {
        j["stereo_alert"] = alert_name(rec.stereo.level);
        j["band_counts"] = rec.stereo.band_counts;
    }
    j["ttc_ran"] = rec.ttc_ran;
    if (rec.ttc_ran) {
        j["min_ttc"] = std::isfinite(rec.min_ttc)
                           ? nlohmann::ordered_json(rec.min_ttc)
                           : nlohmann::ordered_json(nullptr);
        j["heading"] = rec.heading;
    } else if (!rec.ttc_status.empty()) {
        j["ttc_status"] = rec.ttc_status;
    }
    j["alert"] = alert_name(rec.final_alert);
    if (!canonical) j["elapsed_ms"] = rec.elapsed_ms;
    return j;
}

std::string records_to_jsonl(const std::vector<DetectionRecord>& recs, bool canonical) {
    std::ostringstream out;
    for (const auto& r : recs) out << record_to_json(r, canonical).dump() << "\n";
    return out.str();
}

nlohmann::ordered_json report_to_json(const RunReport& report, bool canonical) {
    nlohmann::ordered_json j;
    j["frames_total"] = report.frames_total;
    j["frames_processed"] = report.frames_processed;
    j["frames_skipped"] = report.frames_skipped;
    j["boxes_emitted"] = report.boxes_emitted;
    j["alerts"] = {{"red", report.alerts_red},
                   {"yellow", report.alerts_yellow},
                   {"green", report.alerts_green}};
    if (!canonical) {
        j["wall_seconds"] = report.wall_seconds;
        j["throughput_fps"] = report.throughput_fps;
    }
    return j;
}

namespace {

struct Rgb {
    std::uint8_t r, g, b;
};

constexpr Rgb kObjectColor{40, 220, 40};
constexpr Rgb kBackgroundColor{230, 50, 50};
constexpr Rgb kBoxColor{70, 130, 255};
constexpr Rgb kCircleColor{60, 220, 220};

void put_px(RgbImage& img, int x, int y, Rgb c) {
    if (x < 0 || x >= img.width || y < 0 || y >= img.height) return;
    size_t i = (static_cast<size_t>(y) * img.width + x) * 3;
    img.rgb[i] = c.r;
    img.rgb[i + 1] = c.g;
    img.rgb[i + 2] = c.b;
}

void draw_line(RgbImage& img, double x0, double y0, double x1, double y1, Rgb c) {
    int steps = static_cast<int>(std::ceil(std::max(std::fabs(x1 - x0), std::fabs(y1 - y0)))) + 1;
    for (int i = 0; i <= steps; ++i) {
        double t = static_cast<double>(i) / steps;
        put_px(img, static_cast<int>(std::lround(x0 + (x1 - x0) * t)),
               static_cast<int>(std::lround(y0 + (y1 - y0) * t)), c);
    }
}

void draw_rect(RgbImage& img, double x0, double y0, double x1, double y1, Rgb c) {
    draw_line(img, x0, y0, x1, y0, c);
    draw_line(img, x0, y1, x1, y1, c);
    draw_line(img, x0, y0, x0, y1, c);
    draw_line(img, x1, y0, x1, y1, c);
}

void draw_circle(RgbImage& img, int cx, int cy, int r, Rgb c) {
    int segments = std::max(16, 6 * r);
    for (int i = 0; i < segments; ++i) {
        double a = 2.0 * kPi * i / segments;
        put_px(img, cx + static_cast<int>(std::lround(r * std::cos(a))),
               cy + static_cast<int>(std::lround(r * std::sin(a))), c);
    }
}

}  // namespace

RgbImage emit_overlay(const Frame& frame, const DetectionRecord& rec,
                      const PipelineConfig& cfg, bool pure) {
    RgbImage img(frame.width, frame.height);
    if (!pure) {
        for (size_t i = 0; i < frame.intensities.size(); ++i) {
            auto g = static_cast<std::uint8_t>(std::lround(frame.intensities[i] * 255.0));
            img.rgb[i * 3] = g;
            img.rgb[i * 3 + 1] = g;
            img.rgb[i * 3 + 2] = g;
        }
    }

    const double arrow_scale = 8.0;
    for (const auto& cs : rec.samples) {
        if (cs.cls == VectorClass::Stationary) continue;
        Rgb c = cs.cls == VectorClass::Object ? kObjectColor : kBackgroundColor;
        draw_line(img, cs.sample.x, cs.sample.y, cs.sample.x + cs.sample.u * arrow_scale,
                  cs.sample.y + cs.sample.v * arrow_scale, c);
    }

    if (rec.box)
        draw_rect(img, rec.box->cx - rec.box->half_w, rec.box->cy - rec.box->half_h,
                  rec.box->cx + rec.box->half_w, rec.box->cy + rec.box->half_h, kBoxColor);

    for (const auto& c : rec.circles) draw_circle(img, c.cx, c.cy, c.r, kCircleColor);

    // Green means nothing to report; only alerting levels get a badge.
    if (rec.final_alert != AlertLevel::Green) {
        Rgb badge = rec.final_alert == AlertLevel::Red ? Rgb{255, 0, 0} : Rgb{255, 210, 0};
        for (int y = 2; y < 14; ++y)
            for (int x = 2; x < 14; ++x) put_px(img, x, y, badge);
    }

    (void)cfg;
    return img;
}

std::vector<std::uint8_t> save_ppm(const RgbImage& img) {
    std::string header = "P6\n" + std::to_string(img.width) + " " +
                         std::to_string(img.height) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.insert(out.end(), img.rgb.begin(), img.rgb.end());
    return out;
}

void save_ppm_file(const std::filesystem::path& path, const RgbImage& img) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open file for writing: " + path.string());
    auto bytes = save_ppm(img);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
}

namespace {

ShapeMode shape_mode_from(const std::string& s) {
    if (s == "off") return ShapeMode::Off;
    if (s == "fallback" || s == "fallback_only") return ShapeMode::FallbackOnly;
    if (s == "always") return ShapeMode::Always;
    throw Error("config: unknown shape mode: " + s);
}

}  // namespace

void apply_config_text(PipelineConfig& cfg, const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::string section = "pipeline";
    int line_no = 0;

    auto fail = [&](const std::string& msg) {
        throw Error("config line " + std::to_string(line_no) + ": " + msg);
    };

    while (std::getline(in, line)) {
        ++line_no;
        size_t start = line.find_first_not_of(" \t\r");
        if (start == std::string::npos) continue;
        size_t end = line.find_last_not_of(" \t\r");
        std::string s = line.substr(start, end - start + 1);
        if (s.empty() || s[0] == '#') continue;

        if (s.front() == '[' && s.back() == ']') {
            section = s.substr(1, s.size() - 2);
            continue;
        }
        size_t eq = s.find('=');
        if (eq == std::string::npos) fail("expected key = value");
        std::string key = s.substr(0, s.find_last_not_of(" \t", eq - 1) + 1);
        std::string val = s.substr(s.find_first_not_of(" \t", eq + 1));

        auto num = [&]() {
            try {
                return std::stod(val);
            } catch (...) {
                fail("bad number: " + val);
                return 0.0;
            }
        };
        auto boolean = [&]() {
            if (val == "true" || val == "1") return true;
            if (val == "false" || val == "0") return false;
            fail("bad boolean: " + val);
            return false;
        };

        if (section == "pipeline") {
            if (key == "frame_skip") cfg.frame_skip = static_cast<int>(num());
            else if (key == "flow_enabled") cfg.flow_enabled = boolean();
            else if (key == "shape_mode") cfg.shape_mode = shape_mode_from(val);
            else if (key == "stereo_enabled") cfg.stereo_enabled = boolean();
            else if (key == "ttc_enabled") cfg.ttc_enabled = boolean();
            else if (key == "mirror") cfg.mirror = boolean();
            else if (key == "stereo_smooth_sigma") cfg.stereo_smooth_sigma = num();
            else if (key == "canonical") cfg.canonical = boolean();
            else fail("unknown key " + key);
        } else if (section == "flow") {
            if (key == "alpha") cfg.flow.alpha = num();
            else if (key == "max_iters") cfg.flow.max_iters = static_cast<int>(num());
            else if (key == "epsilon") cfg.flow.epsilon = num();
            else fail("unknown key " + key);
        } else if (section == "classify") {
            if (key == "magnitude_threshold") cfg.classify.magnitude_threshold = num();
            else if (key == "object_heading") cfg.classify.object_heading = num();
            else if (key == "angle_window") cfg.classify.angle_window = num();
            else if (key == "grid_stride") cfg.classify.grid_stride = static_cast<int>(num());
            else if (key == "include_stationary_in_ratio")
                cfg.classify.include_stationary_in_ratio = boolean();
            else fail("unknown key " + key);
        } else if (section == "track") {
            if (key == "ratio_gate") cfg.track.ratio_gate = num();
            else if (key == "containment_fraction") cfg.track.containment_fraction = num();
            else if (key == "base_size") cfg.track.base_size = num();
            else if (key == "size_gain") cfg.track.size_gain = num();
            else if (key == "ratio_cap") cfg.track.ratio_cap = num();
            else if (key == "max_step") cfg.track.max_step = num();
            else if (key == "step_window") cfg.track.step_window = static_cast<int>(num());
            else if (key == "left_region_fraction") cfg.track.left_region_fraction = num();
            else if (key == "min_credible_size") cfg.track.min_credible_size = num();
            else if (key == "mid_lo") cfg.track.mid_lo = num();
            else if (key == "mid_hi") cfg.track.mid_hi = num();
            else if (key == "surge_factor") cfg.track.surge_factor = num();
            else if (key == "surge_enabled") cfg.track.surge_enabled = boolean();
            else fail("unknown key " + key);
        } else if (section == "hough") {
            if (key == "r_min") cfg.hough.r_min = static_cast<int>(num());
            else if (key == "r_max") cfg.hough.r_max = static_cast<int>(num());
            else if (key == "vote_threshold") cfg.hough.vote_threshold = static_cast<int>(num());
            else if (key == "vote_fraction") cfg.hough.vote_fraction = num();
            else if (key == "nms_radius") cfg.hough.nms_radius = static_cast<int>(num());
            else if (key == "edge_low") cfg.hough.edge_low = num();
            else if (key == "edge_high") cfg.hough.edge_high = num();
            else if (key == "corner_fraction") cfg.hough.corner_fraction = num();
            else fail("unknown key " + key);
        } else if (section == "stereo") {
            if (key == "max_disparity") cfg.stereo.max_disparity = static_cast<int>(num());
            else if (key == "block_size") cfg.stereo.block_size = static_cast<int>(num());
            else if (key == "far_cutoff") cfg.stereo.far_cutoff = num();
            else if (key == "min_blob_area") cfg.stereo.min_blob_area = static_cast<int>(num());
            else if (key == "connectivity") cfg.stereo.connectivity = static_cast<int>(num());
            else if (key == "flatness_tol") cfg.stereo.flatness_tol = num();
            else fail("unknown key " + key);
        } else if (section == "bands") {
            if (key == "t1") cfg.bands.t1 = num();
            else if (key == "t2") cfg.bands.t2 = num();
            else if (key == "t3") cfg.bands.t3 = num();
            else fail("unknown key " + key);
        } else if (section == "ttc") {
            if (key == "magnitude_floor") cfg.ttc.magnitude_floor = num();
            else if (key == "column_width") cfg.ttc.column_width = static_cast<int>(num());
            else if (key == "max_steer") cfg.ttc.max_steer = num();
            else fail("unknown key " + key);
        } else {
            fail("unknown section [" + section + "]");
        }
    }
}

PipelineConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config: " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    PipelineConfig cfg;
    apply_config_text(cfg, buf.str());
    return cfg;
}

}  // namespace blindspot

#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "blindspot/box_tracker.hpp"
#include "blindspot/classify.hpp"
#include "blindspot/flow.hpp"
#include "blindspot/image.hpp"
#include "blindspot/shape.hpp"
#include "blindspot/stereo.hpp"
#include "blindspot/ttc.hpp"

namespace blindspot {

enum class ShapeMode { Off, FallbackOnly, Always };

struct PipelineConfig {
    SolverParams flow;
    ClassifyParams classify;
    TrackParams track;
    HoughParams hough;
    StereoParams stereo;
    LaneBands bands;
    TtcParams ttc;

    int frame_skip = 5;
    bool flow_enabled = true;
    ShapeMode shape_mode = ShapeMode::FallbackOnly;
    bool stereo_enabled = true;
    bool ttc_enabled = true;
    bool mirror = false;
    double stereo_smooth_sigma = 0.0;  // 0 disables depth smoothing

    bool emit_overlays = false;
    bool pure_overlays = false;  // annotations on black, no frame underneath
    std::string overlay_dir;

    bool canonical = false;  // omit timing from serialized records
};

/// Per-frame verdict across all enabled paths.
struct DetectionRecord {
    long frame_index = 0;

    bool flow_ran = false;
    std::optional<Box> box;
    std::string reject_gate;
    double ratio = 0.0;
    long object_count = 0;
    long background_count = 0;

    bool shape_ran = false;
    std::vector<CircleHit> circles;

    bool stereo_ran = false;
    AlertResult stereo;

    bool ttc_ran = false;
    double min_ttc = std::numeric_limits<double>::infinity();
    double heading = 0.0;
    std::string ttc_status;  // "ok", "too_few_vectors", "degenerate_field"

    AlertLevel final_alert = AlertLevel::Green;
    double elapsed_ms = 0.0;

    // Overlay support; never serialized.
    std::vector<ClassifiedSample> samples;
};

struct RunReport {
    long frames_total = 0;
    long frames_processed = 0;
    long frames_skipped = 0;
    long boxes_emitted = 0;
    long alerts_red = 0;
    long alerts_yellow = 0;
    long alerts_green = 0;
    double wall_seconds = 0.0;
    double throughput_fps = 0.0;  // video frames covered per wall second
};

/// The fusion rule: stereo wins when it ran (it alone encodes distance);
/// otherwise a box or two circles means Red, else Green.
AlertLevel fuse_alert(const DetectionRecord& rec);

/// Process frames at indices 0, frame_skip, 2*frame_skip, ... running the
/// enabled paths and fusing their verdicts. A depth sequence, when given,
/// must align frame-for-frame with the intensity sequence.
std::vector<DetectionRecord> run_detection(const FrameSequence& seq,
                                           const std::vector<DepthFrame>* depth,
                                           const PipelineConfig& cfg,
                                           RunReport* report = nullptr);

nlohmann::ordered_json record_to_json(const DetectionRecord& rec, bool canonical);
std::string records_to_jsonl(const std::vector<DetectionRecord>& recs, bool canonical);
nlohmann::ordered_json report_to_json(const RunReport& report, bool canonical);

struct RgbImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> rgb;

    RgbImage() = default;
    RgbImage(int w, int h) : width(w), height(h), rgb(static_cast<size_t>(w) * h * 3, 0) {}
};

/// Annotate a frame with flow arrows (object/background colors), the box,
/// circle hits, and an alert badge. Pure mode draws on black.
RgbImage emit_overlay(const Frame& frame, const DetectionRecord& rec,
                      const PipelineConfig& cfg, bool pure);

std::vector<std::uint8_t> save_ppm(const RgbImage& img);
void save_ppm_file(const std::filesystem::path& path, const RgbImage& img);

/// Apply a plain-text section/key-value config file on top of the defaults.
PipelineConfig load_config(const std::filesystem::path& path);
void apply_config_text(PipelineConfig& cfg, const std::string& text);

}  // namespace blindspot

#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "blindspot/common.hpp"
#include "blindspot/image.hpp"

namespace blindspot {

struct BackgroundSpec {
    double noise_scale = 24.0;  // px per value-noise lattice cell
    int shape_count = 40;       // soft scattered shapes panning with the background
    double contrast = 0.18;     // noise amplitude around base_level
    double base_level = 0.55;
};

enum class ObjectShape { PlainRect, RectWithWheels };

/// Scripted sprite. Trajectories are linear in tau = frame - entry_frame:
/// center = (x0 + vx*tau, y0 + vy*tau), size = (w0 + grow_w*tau, ...).
struct ObjectSpec {
    ObjectShape shape = ObjectShape::PlainRect;
    int entry_frame = 0;
    double x0 = 0.0, y0 = 0.0;
    double vx = 0.0, vy = 0.0;
    double w0 = 40.0, h0 = 30.0;
    double grow_w = 0.0, grow_h = 0.0;
    double depth0 = 0.5, depth_rate = 0.0;  // distance proxy over time
    double wheel_radius = 10.0;
    double level = 0.25;  // base intensity of the body texture
};

/// Static occluder drawn over every object.
struct WallSpec {
    double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;
    double level = 0.68;
    double depth_proxy = 0.85;
};

struct SceneSpec {
    int width = 320;
    int height = 240;
    int n_frames = 60;
    std::uint64_t seed = 1;
    double camera_pan = 0.5;  // px/frame; background content drifts by -camera_pan
    double frame_period = 1.0 / 30.0;
    BackgroundSpec background;
    std::vector<ObjectSpec> objects;
    std::vector<WallSpec> walls;
};

struct WheelTruth {
    double cx = 0.0, cy = 0.0, r = 0.0;
};

struct ObjectTruth {
    int id = 0;
    double bx0 = 0.0, by0 = 0.0, bx1 = 0.0, by1 = 0.0;  // bbox clipped to frame
    double cx = 0.0, cy = 0.0;                          // scripted centroid
    double depth_proxy = 0.0;
    std::vector<WheelTruth> wheels;
    double ttc_frames = std::numeric_limits<double>::infinity();  // size/growth
    long visible_px = 0;
};

struct FrameTruth {
    long frame = 0;
    std::vector<ObjectTruth> objects;
};

struct GroundTruth {
    std::vector<FrameTruth> frames;
};

/// Deterministic render of a single frame (seed-driven, no global state).
Frame render_frame(const SceneSpec& spec, int t);

/// Render all frames plus per-frame truth for every visible object.
std::pair<FrameSequence, GroundTruth> render_sequence(const SceneSpec& spec);

/// Depth-proxy companion: background at 1.0, objects and walls at their
/// scripted proxies, same occlusion order as the intensity render.
std::vector<DepthFrame> render_depth_sequence(const SceneSpec& spec);

/// Named scenario catalog covering the tracker, shape, stereo, and TTC paths.
std::vector<std::pair<std::string, SceneSpec>> preset_scenarios();

/// Look up a preset by name; throws on unknown names.
SceneSpec preset_scenario(const std::string& name);

/// Plain-text section/key-value serialization of a SceneSpec.
std::string scene_spec_to_text(const SceneSpec& spec);
SceneSpec scene_spec_from_text(const std::string& text);
SceneSpec load_scene_spec(const std::filesystem::path& path);
void save_scene_spec(const std::filesystem::path& path, const SceneSpec& spec);

/// JSON-lines ground truth, one frame per line.
std::string truth_to_jsonl(const GroundTruth& truth);

}  // namespace blindspot

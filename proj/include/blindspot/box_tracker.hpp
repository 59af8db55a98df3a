#pragma once

#include <deque>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "blindspot/classify.hpp"
#include "blindspot/common.hpp"

namespace blindspot {

/// Axis-aligned detection box: center plus half extents.
struct Box {
    double cx = 0.0;
    double cy = 0.0;
    double half_w = 0.0;
    double half_h = 0.0;

    // Membership uses closed intervals.
    bool contains(double x, double y) const {
        return std::fabs(x - cx) <= half_w && std::fabs(y - cy) <= half_h;
    }
    double side() const { return 2.0 * half_w; }
};

struct TrackParams {
    double ratio_gate = 0.1;              // minimum object/background ratio
    double containment_fraction = 0.5;    // accept when >= this fraction is inside
    std::vector<double> stddev_schedule{3.0, 2.0, 1.0};
    double base_size = 40.0;              // box side at ratio 0, px
    double size_gain = 200.0;             // px of side per unit ratio
    double ratio_cap = 1.0;
    double max_step = 40.0;               // px of center travel per elapsed frame
    int step_window = 5;                  // movement gate applies within this many frames
    double left_region_fraction = 1.0 / 3.0;
    double min_credible_size = 24.0;      // px side
    double mid_lo = 0.3;                  // central region, as frame-width fractions
    double mid_hi = 0.7;
    double surge_factor = 3.0;            // wall-reveal exception multiplier
    bool surge_enabled = true;
    bool mirror = false;                  // size/position rule applies to the far side
    bool ratio_counts_stationary = false;
};

/// Inter-frame memory for the gates.
struct TrackState {
    std::optional<Box> last_box;
    long last_box_frame = -1;
    long last_processed_frame = -1;
    long last_object_count = 0;
    std::deque<std::pair<long, Box>> history;  // (frame index, accepted box)

    static constexpr size_t kHistoryCap = 64;
};

enum class GateOutcome { Accept, Reject, Defer };

struct RefineResult {
    Vec2 center;
    std::vector<FlowVectorSample> inliers;
};

/// track_frame verdict: either a box or the name of the rejecting gate.
struct TrackOutcome {
    std::optional<Box> box;
    std::string reject_gate;  // empty when a box was emitted
    double ratio = 0.0;
    long object_count = 0;
    long background_count = 0;
};

/// Arithmetic mean of the sample coordinates.
Vec2 initial_center(const std::vector<FlowVectorSample>& object_samples);

/// For each k in the schedule, drop samples farther than k times the radial
/// std dev (RMS distance about the current center) and recompute the center.
/// Stops early when fewer than two samples would remain.
RefineResult stddev_refine(const std::vector<FlowVectorSample>& object_samples,
                           Vec2 center, const std::vector<double>& schedule);

/// Square box law: side = base + gain * min(ratio, cap). A saturated
/// (infinite) ratio maps to the cap.
std::pair<double, double> box_size(double ratio, const TrackParams& p);

bool containment_check(const Box& box, const std::vector<FlowVectorSample>& object_samples,
                       double containment_fraction);

/// Center displacement budget against the most recent box; Defer when no box
/// was accepted within the step window.
GateOutcome movement_gate(const TrackState& state, const Box& candidate,
                          long frame_idx, const TrackParams& p);

/// Small boxes in the entry-side third of the frame are noise.
bool size_position_gate(const Box& candidate, double frame_width, const TrackParams& p);

/// First boxes must form at the frame edges unless the object count surged
/// (wall reveal).
bool midfield_gate(const TrackState& state, const Box& candidate, long object_count,
                   double frame_width, const TrackParams& p);

Box clip_box(const Box& b, double frame_width, double frame_height);

/// Full per-frame pipeline: ratio gate, centering, refinement, sizing,
/// containment, movement or midfield gate, size/position gate. Updates state
/// with the object count on every non-empty frame and with the box on accept.
TrackOutcome track_frame(TrackState& state, const std::vector<ClassifiedSample>& samples,
                         long frame_idx, double frame_width, double frame_height,
                         const TrackParams& p);

}  // namespace blindspot

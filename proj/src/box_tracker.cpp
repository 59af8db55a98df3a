#include "blindspot/box_tracker.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace blindspot {

Vec2 initial_center(const std::vector<FlowVectorSample>& object_samples) {
    if (object_samples.empty())
        throw Error("initial_center: no object samples");
    Vec2 c;
    for (const auto& s : object_samples) {
        c.x += s.x;
        c.y += s.y;
    }
    c.x /= static_cast<double>(object_samples.size());
    c.y /= static_cast<double>(object_samples.size());
    return c;
}

RefineResult stddev_refine(const std::vector<FlowVectorSample>& object_samples,
                           Vec2 center, const std::vector<double>& schedule) {
    if (object_samples.empty())
        throw Error("stddev_refine: no object samples");

    RefineResult r{center, object_samples};
    for (double k : schedule) {
        if (r.inliers.size() < 2) break;

        double sq_sum = 0.0;
        for (const auto& s : r.inliers) {
            double dx = s.x - r.center.x;
            double dy = s.y - r.center.y;
            sq_sum += dx * dx + dy * dy;
        }
        double radial_std = std::sqrt(sq_sum / static_cast<double>(r.inliers.size()));
        double cutoff = k * radial_std;

        std::vector<FlowVectorSample> kept;
        kept.reserve(r.inliers.size());
        for (const auto& s : r.inliers)
            if (std::hypot(s.x - r.center.x, s.y - r.center.y) <= cutoff)
                kept.push_back(s);

        if (kept.size() < 2) break;  // keep the last defensible state
        r.inliers = std::move(kept);
        r.center = initial_center(r.inliers);
    }
    return r;
}

std::pair<double, double> box_size(double ratio, const TrackParams& p) {
    double r = std::isinf(ratio) ? p.ratio_cap : std::min(ratio, p.ratio_cap);
    double side = p.base_size + p.size_gain * r;
    return {side / 2.0, side / 2.0};
}

bool containment_check(const Box& box, const std::vector<FlowVectorSample>& object_samples,
                       double containment_fraction) {
    if (object_samples.empty()) return false;
    long inside = 0;
    for (const auto& s : object_samples)
        if (box.contains(s.x, s.y)) ++inside;
    double fraction = static_cast<double>(inside) /
                      static_cast<double>(object_samples.size());
    return fraction >= containment_fraction;
}

GateOutcome movement_gate(const TrackState& state, const Box& candidate,
                          long frame_idx, const TrackParams& p) {
    if (!state.last_box || frame_idx - state.last_box_frame > p.step_window)
        return GateOutcome::Defer;
    long elapsed = std::max<long>(frame_idx - state.last_box_frame, 1);
    double dist = std::hypot(candidate.cx - state.last_box->cx,
                             candidate.cy - state.last_box->cy);
    return dist <= p.max_step * static_cast<double>(elapsed) ? GateOutcome::Accept
                                                             : GateOutcome::Reject;
}

bool size_position_gate(const Box& candidate, double frame_width, const TrackParams& p) {
    if (candidate.side() >= p.min_credible_size) return true;
    double boundary = p.left_region_fraction * frame_width;
    bool in_entry_region = p.mirror ? candidate.cx > frame_width - boundary
                                    : candidate.cx < boundary;
    return !in_entry_region;
}

bool midfield_gate(const TrackState& state, const Box& candidate, long object_count,
                   double frame_width, const TrackParams& p) {
    double cx = candidate.cx;
    if (cx < p.mid_lo * frame_width || cx > p.mid_hi * frame_width) return true;
    if (!p.surge_enabled) return false;
    return static_cast<double>(object_count) >=
           p.surge_factor * static_cast<double>(state.last_object_count);
}

Box clip_box(const Box& b, double frame_width, double frame_height) {
    double x0 = std::max(b.cx - b.half_w, 0.0);
    double x1 = std::min(b.cx + b.half_w, frame_width - 1.0);
    double y0 = std::max(b.cy - b.half_h, 0.0);
    double y1 = std::min(b.cy + b.half_h, frame_height - 1.0);
    if (x1 <= x0 || y1 <= y0) return b;  // fully outside; leave untouched
    return Box{(x0 + x1) / 2.0, (y0 + y1) / 2.0, (x1 - x0) / 2.0, (y1 - y0) / 2.0};
}

namespace {

void record_acceptance(TrackState& state, const Box& box, long frame_idx) {
    state.last_box = box;
    state.last_box_frame = frame_idx;
    state.history.emplace_back(frame_idx, box);
    while (state.history.size() > TrackState::kHistoryCap) state.history.pop_front();
}

TrackOutcome rejected(const char* gate, double ratio, long objects, long background) {
    TrackOutcome out;
    out.reject_gate = gate;
    out.ratio = ratio;
    out.object_count = objects;
    out.background_count = background;
    return out;
}

}  // namespace

TrackOutcome track_frame(TrackState& state, const std::vector<ClassifiedSample>& samples,
                         long frame_idx, double frame_width, double frame_height,
                         const TrackParams& p) {
    state.last_processed_frame = frame_idx;
    if (samples.empty()) return rejected("no_samples", 0.0, 0, 0);

    std::vector<FlowVectorSample> object_samples;
    long background = 0;
    for (const auto& cs : samples) {
        if (cs.cls == VectorClass::Object)
            object_samples.push_back(cs.sample);
        else if (cs.cls == VectorClass::Background)
            ++background;
    }
    long objects = static_cast<long>(object_samples.size());
    double ratio = object_ratio(samples, p.ratio_counts_stationary);

    // The gates read state from the previous frame; the count is recorded
    // only once they have run.
    TrackOutcome out = [&]() -> TrackOutcome {
        if (!(std::isinf(ratio) || ratio >= p.ratio_gate))
            return rejected("ratio_gate", ratio, objects, background);

        Vec2 center = initial_center(object_samples);
        RefineResult refined = stddev_refine(object_samples, center, p.stddev_schedule);

        auto [half_w, half_h] = box_size(ratio, p);
        Box candidate{refined.center.x, refined.center.y, half_w, half_h};

        // The refined inliers are the vectors the tracker trusts; the 50%
        // rule is evaluated against them.
        if (!containment_check(candidate, refined.inliers, p.containment_fraction))
            return rejected("containment_check", ratio, objects, background);

        GateOutcome movement = movement_gate(state, candidate, frame_idx, p);
        if (movement == GateOutcome::Reject)
            return rejected("movement_gate", ratio, objects, background);
        if (movement == GateOutcome::Defer &&
            !midfield_gate(state, candidate, objects, frame_width, p))
            return rejected("midfield_gate", ratio, objects, background);

        if (!size_position_gate(candidate, frame_width, p))
            return rejected("size_position_gate", ratio, objects, background);

        TrackOutcome accepted;
        accepted.box = clip_box(candidate, frame_width, frame_height);
        accepted.ratio = ratio;
        accepted.object_count = objects;
        accepted.background_count = background;
        return accepted;
    }();

    state.last_object_count = objects;
    if (out.box) record_acceptance(state, *out.box, frame_idx);
    return out;
}

}  // namespace blindspot

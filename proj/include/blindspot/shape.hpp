#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "blindspot/common.hpp"
#include "blindspot/image.hpp"

namespace blindspot {

struct EdgeMap {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> edges;

    EdgeMap() = default;
    EdgeMap(int w, int h) : width(w), height(h), edges(static_cast<size_t>(w) * h, 0) {}

    std::uint8_t& at(int x, int y) { return edges[static_cast<size_t>(y) * width + x]; }
    std::uint8_t at(int x, int y) const { return edges[static_cast<size_t>(y) * width + x]; }
};

struct CircleHit {
    int cx = 0;
    int cy = 0;
    int r = 0;
    int votes = 0;
};

struct HoughParams {
    int r_min = 6;
    int r_max = 24;
    int vote_threshold = 0;      // 0: per-radius auto threshold ceil(vote_fraction * 2*pi*r)
    double vote_fraction = 0.6;
    int nms_radius = 8;
    // Thresholds on unnormalized 3x3 Sobel magnitude (a full-contrast step reads ~4).
    double edge_low = 0.4;
    double edge_high = 1.0;
    double corner_fraction = 0.2;

    int threshold_for(int r) const;
};

/// Frame regions where detections are allowed.
struct RegionMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> allowed;

    RegionMask() = default;
    RegionMask(int w, int h, std::uint8_t fill = 1)
        : width(w), height(h), allowed(static_cast<size_t>(w) * h, fill) {}

    std::uint8_t at(int x, int y) const { return allowed[static_cast<size_t>(y) * width + x]; }
    std::uint8_t& at(int x, int y) { return allowed[static_cast<size_t>(y) * width + x]; }
};

/// One accumulator plane per integer radius in [r_min, r_max].
struct HoughAccumulator {
    int width = 0;
    int height = 0;
    int r_min = 0;
    int r_max = 0;
    std::vector<Grid<int>> planes;

    int votes_at(int cx, int cy, int r) const { return planes[r - r_min].at(cx, cy); }
};

/// Sobel gradients, non-max suppression along the gradient direction (ties
/// kept), then hysteresis with (edge_low, edge_high).
EdgeMap detect_edges(const Frame& frame, const HoughParams& p);

/// accumulator(c, r) counts edge pixels whose distance from c is within the
/// 0.5 px quantization band of r.
HoughAccumulator hough_accumulate(const EdgeMap& edges, const HoughParams& p);

/// Peaks of the accumulator above threshold inside the mask, with greedy
/// non-max suppression within nms_radius in center space across adjacent
/// radii. Sorted by votes descending, ties by (cy, cx, r) ascending.
std::vector<CircleHit> hough_circles(const EdgeMap& edges, const HoughParams& p,
                                     const RegionMask& mask);

/// Everything allowed except the four corner squares of side
/// corner_fraction * min(width, height).
RegionMask default_region_mask(int width, int height, double corner_fraction);

/// Two or more circles means an object is present.
bool static_object_alert(const std::vector<CircleHit>& hits);

/// CSV: cx,cy,r,votes
std::string circles_to_csv(const std::vector<CircleHit>& hits);

}  // namespace blindspot

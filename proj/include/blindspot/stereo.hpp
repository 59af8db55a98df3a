#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "blindspot/common.hpp"
#include "blindspot/image.hpp"

namespace blindspot {

/// Distance-proxy thresholds mapping band occupancy to the alert levels.
/// Band 1 (nearest lane): value < t1. Bands 2-3: [t1, t3). Beyond: >= t3.
struct LaneBands {
    double t1 = 0.35;
    double t2 = 0.55;
    double t3 = 0.75;
};

enum class AlertLevel { Red, Yellow, Green };

const char* alert_name(AlertLevel level);

struct StereoParams {
    int max_disparity = 16;
    int block_size = 9;        // odd
    double far_cutoff = 0.8;   // proxy values at or beyond become background
    int min_blob_area = 50;    // px^2
    int connectivity = 4;      // 4 or 8
    double flatness_tol = 1.0; // SAD spread below this marks a block textureless
};

struct BinaryMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> values;

    BinaryMask() = default;
    BinaryMask(int w, int h) : width(w), height(h), values(static_cast<size_t>(w) * h, 0) {}

    std::uint8_t& at(int x, int y) { return values[static_cast<size_t>(y) * width + x]; }
    std::uint8_t at(int x, int y) const { return values[static_cast<size_t>(y) * width + x]; }
};

struct AlertResult {
    AlertLevel level = AlertLevel::Green;
    // Blob counts per band: [0, t1), [t1, t2), [t2, t3).
    std::array<int, 3> band_counts{0, 0, 0};
};

/// Block-matching disparity for a rectified pair: pixel (x, y) in the left
/// image is matched against (x - d, y) in the right image over d in
/// [0, max_disparity]. Distance proxy = 1 - d / max_disparity; textureless
/// blocks (SAD spread below flatness_tol) are marked farthest.
DepthFrame compute_disparity(const Frame& left, const Frame& right, const StereoParams& p);

/// Values at or beyond the cutoff become the background sentinel 1.0.
DepthFrame remove_background(const DepthFrame& depth, double far_cutoff);

/// Mask of pixels with lo <= value < hi.
BinaryMask isolate_band(const DepthFrame& depth, double lo, double hi);

/// Connected components with area >= min_blob_area under the configured
/// connectivity.
int count_objects(const BinaryMask& mask, const StereoParams& p);

/// Red when the nearest band is occupied, Yellow when only [t1, t3) is,
/// Green otherwise.
AlertResult classify_alert(const DepthFrame& depth, const LaneBands& bands,
                           const StereoParams& p);

/// Separable Gaussian blur (kernel radius ceil(3 sigma), replicated edges);
/// background sentinel pixels are excluded via normalized convolution.
DepthFrame smooth_depth(const DepthFrame& depth, double sigma);

}  // namespace blindspot

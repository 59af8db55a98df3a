#include "blindspot/stereo.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace blindspot {

const char* alert_name(AlertLevel level) {
    switch (level) {
        case AlertLevel::Red: return "red";
        case AlertLevel::Yellow: return "yellow";
        case AlertLevel::Green: return "green";
    }
    return "green";
}

DepthFrame compute_disparity(const Frame& left, const Frame& right, const StereoParams& p) {
    if (left.width != right.width || left.height != right.height)
        throw DimensionError("compute_disparity: dimension mismatch");
    if (p.block_size < 3 || p.block_size % 2 == 0)
        throw Error("compute_disparity: block_size must be odd and >= 3");

    const int w = left.width;
    const int h = left.height;
    const int half = p.block_size / 2;

    auto sample = [w, h](const Frame& f, int x, int y) {
        return f.at(std::clamp(x, 0, w - 1), std::clamp(y, 0, h - 1));
    };

    DepthFrame out(w, h, 1.0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double best = std::numeric_limits<double>::infinity();
            double worst = 0.0;
            int best_d = 0;
            for (int d = 0; d <= p.max_disparity; ++d) {
                double sad = 0.0;
                for (int by = -half; by <= half; ++by)
                    for (int bx = -half; bx <= half; ++bx)
                        sad += std::fabs(sample(left, x + bx, y + by) -
                                         sample(right, x - d + bx, y + by));
                if (sad < best) {
                    best = sad;
                    best_d = d;
                }
                worst = std::max(worst, sad);
            }
            bool textureless = (worst - best) < p.flatness_tol;
            out.at(x, y) = textureless
                               ? 1.0
                               : 1.0 - static_cast<double>(best_d) / p.max_disparity;
        }
    }
    return out;
}

DepthFrame remove_background(const DepthFrame& depth, double far_cutoff) {
    DepthFrame out = depth;
    for (double& v : out.values)
        if (v >= far_cutoff) v = 1.0;
    return out;
}

BinaryMask isolate_band(const DepthFrame& depth, double lo, double hi) {
    if (lo >= hi) throw Error("isolate_band: lo must be below hi");
    BinaryMask mask(depth.width, depth.height);
    for (size_t i = 0; i < depth.values.size(); ++i)
        mask.values[i] = (depth.values[i] >= lo && depth.values[i] < hi) ? 1 : 0;
    return mask;
}

int count_objects(const BinaryMask& mask, const StereoParams& p) {
    const int w = mask.width;
    const int h = mask.height;
    std::vector<std::uint8_t> seen(mask.values.size(), 0);

    static const int dx4[] = {1, -1, 0, 0};
    static const int dy4[] = {0, 0, 1, -1};
    static const int dx8[] = {1, -1, 0, 0, 1, 1, -1, -1};
    static const int dy8[] = {0, 0, 1, -1, 1, -1, 1, -1};
    const int* dx = p.connectivity == 8 ? dx8 : dx4;
    const int* dy = p.connectivity == 8 ? dy8 : dy4;
    const int n_dirs = p.connectivity == 8 ? 8 : 4;

    int count = 0;
    std::deque<std::pair<int, int>> queue;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            size_t i = static_cast<size_t>(y) * w + x;
            if (!mask.values[i] || seen[i]) continue;
            long area = 0;
            seen[i] = 1;
            queue.emplace_back(x, y);
            while (!queue.empty()) {
                auto [cx, cy] = queue.front();
                queue.pop_front();
                ++area;
                for (int k = 0; k < n_dirs; ++k) {
                    int nx = cx + dx[k], ny = cy + dy[k];
                    if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
                    size_t ni = static_cast<size_t>(ny) * w + nx;
                    if (mask.values[ni] && !seen[ni]) {
                        seen[ni] = 1;
                        queue.emplace_back(nx, ny);
                    }
                }
            }
            if (area >= p.min_blob_area) ++count;
        }
    }
    return count;
}

AlertResult classify_alert(const DepthFrame& depth, const LaneBands& bands,
                           const StereoParams& p) {
    AlertResult result;
    result.band_counts[0] = count_objects(isolate_band(depth, 0.0, bands.t1), p);
    result.band_counts[1] = count_objects(isolate_band(depth, bands.t1, bands.t2), p);
    result.band_counts[2] = count_objects(isolate_band(depth, bands.t2, bands.t3), p);

    if (result.band_counts[0] >= 1) {
        result.level = AlertLevel::Red;
    } else {
        // A blob straddling t2 counts once in the merged two-to-three-lane band.
        int merged = count_objects(isolate_band(depth, bands.t1, bands.t3), p);
        result.level = merged >= 1 ? AlertLevel::Yellow : AlertLevel::Green;
    }
    return result;
}

DepthFrame smooth_depth(const DepthFrame& depth, double sigma) {
    if (sigma <= 0.0) throw Error("smooth_depth: sigma must be positive");

    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> kernel(2 * radius + 1);
    double norm = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        kernel[i + radius] = std::exp(-0.5 * (i / sigma) * (i / sigma));
        norm += kernel[i + radius];
    }
    for (double& k : kernel) k /= norm;

    const int w = depth.width;
    const int h = depth.height;

    // Normalized convolution: blur value*weight and weight separately, with
    // the sentinel excluded from the weights.
    Grid<double> num(w, h), den(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double v = depth.at(x, y);
            double m = v < 1.0 ? 1.0 : 0.0;
            num.at(x, y) = v * m;
            den.at(x, y) = m;
        }

    auto blur = [&](Grid<double>& g) {
        Grid<double> tmp(w, h);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                double acc = 0.0;
                for (int i = -radius; i <= radius; ++i)
                    acc += kernel[i + radius] * g.at(std::clamp(x + i, 0, w - 1), y);
                tmp.at(x, y) = acc;
            }
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                double acc = 0.0;
                for (int i = -radius; i <= radius; ++i)
                    acc += kernel[i + radius] * tmp.at(x, std::clamp(y + i, 0, h - 1));
                g.at(x, y) = acc;
            }
    };
    blur(num);
    blur(den);

    DepthFrame out(w, h, 1.0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            out.at(x, y) = den.at(x, y) > 1e-9 ? num.at(x, y) / den.at(x, y) : 1.0;
    return out;
}

}  // namespace blindspot

#include "blindspot/shape.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>

namespace blindspot {

int HoughParams::threshold_for(int r) const {
    if (vote_threshold > 0) return vote_threshold;
    return static_cast<int>(std::ceil(vote_fraction * 2.0 * kPi * r));
}

EdgeMap detect_edges(const Frame& frame, const HoughParams& p) {
    const int w = frame.width;
    const int h = frame.height;
    Grid<double> gx(w, h), gy(w, h), mag(w, h);

    auto px = [&](int x, int y) {
        x = std::clamp(x, 0, w - 1);
        y = std::clamp(y, 0, h - 1);
        return frame.at(x, y);
    };

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double sx = px(x + 1, y - 1) - px(x - 1, y - 1) +
                        2.0 * (px(x + 1, y) - px(x - 1, y)) +
                        px(x + 1, y + 1) - px(x - 1, y + 1);
            double sy = px(x - 1, y + 1) - px(x - 1, y - 1) +
                        2.0 * (px(x, y + 1) - px(x, y - 1)) +
                        px(x + 1, y + 1) - px(x + 1, y - 1);
            gx.at(x, y) = sx;
            gy.at(x, y) = sy;
            mag.at(x, y) = std::hypot(sx, sy);
        }
    }

    // Non-max suppression along the interpolated gradient direction. Ties are
    // kept so clean step edges survive on both sides of the step.
    auto mag_at = [&](double xx, double yy) {
        xx = std::clamp(xx, 0.0, w - 1.0);
        yy = std::clamp(yy, 0.0, h - 1.0);
        int x0 = static_cast<int>(xx), y0 = static_cast<int>(yy);
        int x1 = std::min(x0 + 1, w - 1), y1 = std::min(y0 + 1, h - 1);
        double fx = xx - x0, fy = yy - y0;
        double top = mag.at(x0, y0) + (mag.at(x1, y0) - mag.at(x0, y0)) * fx;
        double bot = mag.at(x0, y1) + (mag.at(x1, y1) - mag.at(x0, y1)) * fx;
        return top + (bot - top) * fy;
    };

    Grid<std::uint8_t> strong(w, h, 0), weak(w, h, 0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double m = mag.at(x, y);
            if (m < p.edge_low) continue;
            double dx = gx.at(x, y) / m;
            double dy = gy.at(x, y) / m;
            if (m >= mag_at(x + dx, y + dy) && m >= mag_at(x - dx, y - dy)) {
                weak.at(x, y) = 1;
                if (m >= p.edge_high) strong.at(x, y) = 1;
            }
        }
    }

    // Hysteresis: weak pixels survive only when connected to a strong one.
    EdgeMap out(w, h);
    std::deque<std::pair<int, int>> queue;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (strong.at(x, y)) {
                out.at(x, y) = 1;
                queue.emplace_back(x, y);
            }
    while (!queue.empty()) {
        auto [x, y] = queue.front();
        queue.pop_front();
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
                int nx = x + dx, ny = y + dy;
                if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
                if (weak.at(nx, ny) && !out.at(nx, ny)) {
                    out.at(nx, ny) = 1;
                    queue.emplace_back(nx, ny);
                }
            }
    }
    return out;
}

namespace {

// Offsets (dx, dy) with |dist - r| <= 0.5. With integer coordinates this is
// the exact band r^2 - r + 1 <= dx^2 + dy^2 <= r^2 + r.
std::vector<std::pair<int, int>> annulus_offsets(int r) {
    std::vector<std::pair<int, int>> offsets;
    long lo = static_cast<long>(r) * r - r + 1;
    long hi = static_cast<long>(r) * r + r;
    for (int dy = -r - 1; dy <= r + 1; ++dy)
        for (int dx = -r - 1; dx <= r + 1; ++dx) {
            long d2 = static_cast<long>(dx) * dx + static_cast<long>(dy) * dy;
            if (d2 >= lo && d2 <= hi) offsets.emplace_back(dx, dy);
        }
    return offsets;
}

}  // namespace

HoughAccumulator hough_accumulate(const EdgeMap& edges, const HoughParams& p) {
    if (p.r_min < 1 || p.r_min > p.r_max)
        throw Error("hough_accumulate: invalid radius range");

    HoughAccumulator acc;
    acc.width = edges.width;
    acc.height = edges.height;
    acc.r_min = p.r_min;
    acc.r_max = p.r_max;
    acc.planes.reserve(p.r_max - p.r_min + 1);
    for (int r = p.r_min; r <= p.r_max; ++r)
        acc.planes.emplace_back(edges.width, edges.height, 0);

    for (int r = p.r_min; r <= p.r_max; ++r) {
        auto offsets = annulus_offsets(r);
        Grid<int>& plane = acc.planes[r - p.r_min];
        for (int y = 0; y < edges.height; ++y)
            for (int x = 0; x < edges.width; ++x) {
                if (!edges.at(x, y)) continue;
                for (auto [dx, dy] : offsets) {
                    int cx = x + dx, cy = y + dy;
                    if (plane.in_bounds(cx, cy)) ++plane.at(cx, cy);
                }
            }
    }
    return acc;
}

std::vector<CircleHit> hough_circles(const EdgeMap& edges, const HoughParams& p,
                                     const RegionMask& mask) {
    if (mask.width != edges.width || mask.height != edges.height)
        throw DimensionError("hough_circles: mask dimension mismatch");

    HoughAccumulator acc = hough_accumulate(edges, p);

    std::vector<CircleHit> candidates;
    for (int r = p.r_min; r <= p.r_max; ++r) {
        const Grid<int>& plane = acc.planes[r - p.r_min];
        int threshold = p.threshold_for(r);
        for (int cy = 0; cy < edges.height; ++cy)
            for (int cx = 0; cx < edges.width; ++cx) {
                int votes = plane.at(cx, cy);
                if (votes < threshold || !mask.at(cx, cy)) continue;
                candidates.push_back({cx, cy, r, votes});
            }
    }

    auto order = [](const CircleHit& a, const CircleHit& b) {
        if (a.votes != b.votes) return a.votes > b.votes;
        if (a.cy != b.cy) return a.cy < b.cy;
        if (a.cx != b.cx) return a.cx < b.cx;
        return a.r < b.r;
    };
    std::sort(candidates.begin(), candidates.end(), order);

    // Greedy suppression: an accepted hit claims its center neighborhood on
    // its own and adjacent radius planes.
    std::vector<CircleHit> hits;
    const long nms2 = static_cast<long>(p.nms_radius) * p.nms_radius;
    for (const auto& c : candidates) {
        bool suppressed = false;
        for (const auto& h : hits) {
            if (std::abs(h.r - c.r) > 1) continue;
            long dx = h.cx - c.cx, dy = h.cy - c.cy;
            if (dx * dx + dy * dy <= nms2) {
                suppressed = true;
                break;
            }
        }
        if (!suppressed) hits.push_back(c);
    }
    return hits;
}

RegionMask default_region_mask(int width, int height, double corner_fraction) {
    if (corner_fraction < 0.0 || corner_fraction >= 0.5)
        throw Error("default_region_mask: corner_fraction out of [0, 0.5)");

    RegionMask mask(width, height, 1);
    int side = static_cast<int>(corner_fraction * std::min(width, height));
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            bool corner_x = x < side || x >= width - side;
            bool corner_y = y < side || y >= height - side;
            if (corner_x && corner_y) mask.at(x, y) = 0;
        }
    return mask;
}

bool static_object_alert(const std::vector<CircleHit>& hits) {
    return hits.size() >= 2;
}

std::string circles_to_csv(const std::vector<CircleHit>& hits) {
    std::ostringstream out;
    out << "cx,cy,r,votes\n";
    for (const auto& h : hits)
        out << h.cx << "," << h.cy << "," << h.r << "," << h.votes << "\n";
    return out.str();
}

}  // namespace blindspot

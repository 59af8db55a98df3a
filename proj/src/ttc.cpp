#include "blindspot/ttc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace blindspot {

FocusOfExpansion estimate_foe(const FlowField& flow, double magnitude_floor) {
    // Each sample constrains the FOE to the line through (x, y) along (u, v).
    // With the unit normal n = (-v, u)/|uv|, minimize sum (n.q - n.p)^2 over q.
    double a11 = 0.0, a12 = 0.0, a22 = 0.0;  // A = sum n n^T
    double b1 = 0.0, b2 = 0.0;               // b = sum n (n.p)
    double c = 0.0;                          // sum (n.p)^2
    long count = 0;

    for (int y = 0; y < flow.height; ++y) {
        for (int x = 0; x < flow.width; ++x) {
            double u = flow.u_at(x, y);
            double v = flow.v_at(x, y);
            double mag = std::hypot(u, v);
            if (mag <= magnitude_floor) continue;
            double nx = -v / mag;
            double ny = u / mag;
            double np = nx * x + ny * y;
            a11 += nx * nx;
            a12 += nx * ny;
            a22 += ny * ny;
            b1 += nx * np;
            b2 += ny * np;
            c += np * np;
            ++count;
        }
    }
    if (count < 8)
        throw TooFewVectorsError("estimate_foe: fewer than 8 samples above the floor");

    // Eigenvalues of the symmetric 2x2 system; near-parallel fields are rank-1.
    double tr = a11 + a22;
    double det = a11 * a22 - a12 * a12;
    double disc = std::sqrt(std::max(tr * tr - 4.0 * det, 0.0));
    double lam_max = (tr + disc) / 2.0;
    double lam_min = (tr - disc) / 2.0;
    if (lam_max <= 0.0 || lam_min / lam_max < 1e-4)
        throw DegenerateFieldError("estimate_foe: near-parallel field");

    FocusOfExpansion foe;
    foe.x = (a22 * b1 - a12 * b2) / det;
    foe.y = (a11 * b2 - a12 * b1) / det;
    foe.residual = std::max(
        a11 * foe.x * foe.x + 2.0 * a12 * foe.x * foe.y + a22 * foe.y * foe.y -
            2.0 * (b1 * foe.x + b2 * foe.y) + c,
        0.0);
    return foe;
}

TTCProfile column_ttc(const FlowField& flow, const FocusOfExpansion& foe, int column_width) {
    if (column_width < 1) throw Error("column_ttc: column_width must be >= 1");

    int n_cols = (flow.width + column_width - 1) / column_width;
    std::vector<std::vector<double>> per_column(n_cols);

    for (int y = 0; y < flow.height; ++y) {
        for (int x = 0; x < flow.width; ++x) {
            double rx = x - foe.x;
            double ry = y - foe.y;
            double rho = std::hypot(rx, ry);
            if (rho <= 0.0) continue;
            // Radial expansion rate: projection of (u, v) onto the outward direction.
            double rho_dot = (flow.u_at(x, y) * rx + flow.v_at(x, y) * ry) / rho;
            if (rho_dot <= 0.0) continue;
            per_column[x / column_width].push_back(rho / rho_dot);
        }
    }

    TTCProfile profile;
    profile.column_width = column_width;
    profile.ttc.resize(n_cols);
    for (int cidx = 0; cidx < n_cols; ++cidx) {
        auto& vals = per_column[cidx];
        if (vals.empty()) {
            profile.ttc[cidx] = std::numeric_limits<double>::infinity();
            continue;
        }
        size_t mid = vals.size() / 2;
        std::nth_element(vals.begin(), vals.begin() + mid, vals.end());
        double median = vals[mid];
        if (vals.size() % 2 == 0) {
            double lower = *std::max_element(vals.begin(), vals.begin() + mid);
            median = (median + lower) / 2.0;
        }
        profile.ttc[cidx] = median;
    }
    return profile;
}

double heading_angle(const TTCProfile& profile, double max_steer) {
    if (profile.ttc.empty()) throw Error("heading_angle: empty profile");

    const int n = static_cast<int>(profile.ttc.size());
    const double c_mid = (n - 1) / 2.0;
    if (n == 1) return 0.0;

    bool all_inf = std::all_of(profile.ttc.begin(), profile.ttc.end(),
                               [](double t) { return std::isinf(t); });
    if (all_inf) return 0.0;

    int best = 0;
    for (int i = 1; i < n; ++i) {
        double ti = profile.ttc[i];
        double tb = profile.ttc[best];
        if (ti > tb) {
            best = i;
        } else if (ti == tb) {
            double di = std::fabs(i - c_mid);
            double db = std::fabs(best - c_mid);
            if (di < db) best = i;  // equal distance keeps the leftmost (earlier) column
        }
    }
    return max_steer * (static_cast<double>(best) - c_mid) / c_mid;
}

std::string ttc_to_csv(const TTCProfile& profile) {
    std::ostringstream out;
    out << "column_index,ttc_frames\n";
    for (size_t i = 0; i < profile.ttc.size(); ++i) {
        out << i << ",";
        if (std::isinf(profile.ttc[i]))
            out << "inf";
        else
            out << profile.ttc[i];
        out << "\n";
    }
    return out.str();
}

}  // namespace blindspot

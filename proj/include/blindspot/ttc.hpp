#pragma once

#include <string>
#include <vector>

#include "blindspot/common.hpp"
#include "blindspot/flow.hpp"

namespace blindspot {

/// Point the flow vectors radiate from; may lie outside the frame.
struct FocusOfExpansion {
    double x = 0.0;
    double y = 0.0;
    double residual = 0.0;  // summed squared perpendicular distance at the solution
};

/// Per-column time to collision, in frames. +inf marks columns with no
/// expanding samples.
struct TTCProfile {
    int column_width = 0;
    std::vector<double> ttc;
};

struct TtcParams {
    double magnitude_floor = 0.25;  // flow samples below this are ignored
    int column_width = 16;          // px per profile column
    double max_steer = 0.35;        // rad
};

struct TooFewVectorsError : Error {
    using Error::Error;
};

/// Near-parallel field: translation-dominant motion, TTC not meaningful.
struct DegenerateFieldError : Error {
    using Error::Error;
};

/// Least-squares point minimizing the summed squared perpendicular distance
/// to each sample's back-projected motion line.
FocusOfExpansion estimate_foe(const FlowField& flow, double magnitude_floor);

/// Per column: median over the column's samples of rho / rho_dot for samples
/// moving away from the FOE (rho_dot > 0).
TTCProfile column_ttc(const FlowField& flow, const FocusOfExpansion& foe, int column_width);

/// Steer toward the column with the longest TTC:
/// angle = max_steer * (c* - c_mid) / c_mid. Ties resolve to the column
/// closest to center, then the leftmost; an all-infinite profile gives 0.
double heading_angle(const TTCProfile& profile, double max_steer);

/// CSV: column_index,ttc_frames ("inf" for the sentinel)
std::string ttc_to_csv(const TTCProfile& profile);

}  // namespace blindspot

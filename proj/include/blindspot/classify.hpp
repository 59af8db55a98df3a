#pragma once

#include <string>
#include <vector>

#include "blindspot/common.hpp"
#include "blindspot/flow.hpp"

namespace blindspot {

enum class VectorClass { Object, Background, Stationary };

/// One subsampled flow vector with its polar decomposition.
/// angle is in (-pi, pi], 0 pointing rightward along +x.
struct FlowVectorSample {
    double x = 0.0;
    double y = 0.0;
    double u = 0.0;
    double v = 0.0;
    double magnitude = 0.0;
    double angle = 0.0;

    static FlowVectorSample make(double x, double y, double u, double v);
};

struct ClassifiedSample {
    FlowVectorSample sample;
    VectorClass cls = VectorClass::Stationary;
};

struct ClassifyParams {
    double magnitude_threshold = 0.25;  // px/frame; below this a vector is Stationary
    double object_heading = 0.0;        // direction objects approach from (0 = rightward)
    double angle_window = kPi / 4.0;    // total width of the object cone
    int grid_stride = 8;
    bool mirror = false;                // opposite-side blind spot: reflect the heading
    bool include_stationary_in_ratio = false;

    double effective_heading() const {
        return mirror ? wrap_angle(kPi - object_heading) : object_heading;
    }
};

/// Angular census of the classified vectors; bar height is vector count.
struct RoseHistogram {
    int n_bins = 0;
    std::vector<long> object_counts;
    std::vector<long> background_counts;
};

/// One sample per grid site (i*stride, j*stride), row-major.
std::vector<FlowVectorSample> sample_vectors(const FlowField& flow, int stride);

/// Stationary below the magnitude threshold, Object within the angular
/// window about the heading, Background otherwise.
VectorClass classify(const FlowVectorSample& sample, const ClassifyParams& p);

std::vector<ClassifiedSample> classify_all(const std::vector<FlowVectorSample>& samples,
                                           const ClassifyParams& p);

/// Bin non-Stationary samples by angle into n_bins equal bins partitioning (-pi, pi].
RoseHistogram rose_histogram(const std::vector<ClassifiedSample>& samples, int n_bins);

/// Object/background count ratio. Returns +inf when there are object vectors
/// but no background vectors (saturated: passes any threshold); 0 when both
/// counts are zero.
double object_ratio(const std::vector<ClassifiedSample>& samples,
                    bool include_stationary_in_denominator = false);

/// CSV: bin_start_rad,object_count,background_count
std::string rose_to_csv(const RoseHistogram& h);

}  // namespace blindspot

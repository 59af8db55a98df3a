#include "blindspot/classify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace blindspot {

FlowVectorSample FlowVectorSample::make(double x, double y, double u, double v) {
    FlowVectorSample s;
    s.x = x;
    s.y = y;
    s.u = u;
    s.v = v;
    s.magnitude = std::hypot(u, v);
    s.angle = wrap_angle(std::atan2(v, u));
    return s;
}

std::vector<FlowVectorSample> sample_vectors(const FlowField& flow, int stride) {
    if (stride < 1 || stride > std::min(flow.width, flow.height))
        throw Error("sample_vectors: stride out of range");

    std::vector<FlowVectorSample> samples;
    for (int y = 0; y < flow.height; y += stride)
        for (int x = 0; x < flow.width; x += stride)
            samples.push_back(FlowVectorSample::make(x, y, flow.u_at(x, y), flow.v_at(x, y)));
    return samples;
}

VectorClass classify(const FlowVectorSample& sample, const ClassifyParams& p) {
    if (sample.magnitude < p.magnitude_threshold) return VectorClass::Stationary;
    if (angular_distance(sample.angle, p.effective_heading()) <= p.angle_window / 2.0)
        return VectorClass::Object;
    return VectorClass::Background;
}

std::vector<ClassifiedSample> classify_all(const std::vector<FlowVectorSample>& samples,
                                           const ClassifyParams& p) {
    std::vector<ClassifiedSample> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back({s, classify(s, p)});
    return out;
}

RoseHistogram rose_histogram(const std::vector<ClassifiedSample>& samples, int n_bins) {
    if (n_bins < 4) throw Error("rose_histogram: need at least 4 bins");

    RoseHistogram h;
    h.n_bins = n_bins;
    h.object_counts.assign(n_bins, 0);
    h.background_counts.assign(n_bins, 0);

    // Bin k covers (-pi + k*w, -pi + (k+1)*w]; ceil keeps the partition left-open.
    const double bin_width = 2.0 * kPi / n_bins;
    for (const auto& cs : samples) {
        if (cs.cls == VectorClass::Stationary) continue;
        double t = cs.sample.angle + kPi;  // in (0, 2*pi]
        int k = static_cast<int>(std::ceil(t / bin_width)) - 1;
        k = std::clamp(k, 0, n_bins - 1);
        if (cs.cls == VectorClass::Object)
            ++h.object_counts[k];
        else
            ++h.background_counts[k];
    }
    return h;
}

double object_ratio(const std::vector<ClassifiedSample>& samples,
                    bool include_stationary_in_denominator) {
    long objects = 0;
    long denominator = 0;
    for (const auto& cs : samples) {
        switch (cs.cls) {
            case VectorClass::Object: ++objects; break;
            case VectorClass::Background: ++denominator; break;
            case VectorClass::Stationary:
                if (include_stationary_in_denominator) ++denominator;
                break;
        }
    }
    if (denominator == 0)
        return objects > 0 ? std::numeric_limits<double>::infinity() : 0.0;
    return static_cast<double>(objects) / static_cast<double>(denominator);
}

std::string rose_to_csv(const RoseHistogram& h) {
    std::ostringstream out;
    out << "bin_start_rad,object_count,background_count\n";
    const double bin_width = 2.0 * kPi / h.n_bins;
    for (int k = 0; k < h.n_bins; ++k)
        out << (-kPi + k * bin_width) << "," << h.object_counts[k] << ","
            << h.background_counts[k] << "\n";
    return out.str();
}

}  // namespace blindspot

#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "blindspot/common.hpp"
#include "blindspot/image.hpp"

namespace blindspot {

/// Dense per-pixel displacement field, in pixels per frame.
struct FlowField {
    int width = 0;
    int height = 0;
    std::vector<double> u;
    std::vector<double> v;

    FlowField() = default;
    FlowField(int w, int h)
        : width(w), height(h),
          u(static_cast<size_t>(w) * h, 0.0),
          v(static_cast<size_t>(w) * h, 0.0) {}

    double& u_at(int x, int y) { return u[static_cast<size_t>(y) * width + x]; }
    double u_at(int x, int y) const { return u[static_cast<size_t>(y) * width + x]; }
    double& v_at(int x, int y) { return v[static_cast<size_t>(y) * width + x]; }
    double v_at(int x, int y) const { return v[static_cast<size_t>(y) * width + x]; }
};

/// Intensity derivatives: ix, iy in intensity/pixel, it in intensity/frame.
struct Derivatives {
    int width = 0;
    int height = 0;
    std::vector<double> ix;
    std::vector<double> iy;
    std::vector<double> it;
};

struct SolverParams {
    double alpha = 1.0;    // smoothness weight
    int max_iters = 100;
    double epsilon = 1e-4; // stop when mean per-pixel update magnitude drops below
};

/// Derivatives from the 2x2x2 cube of forward differences averaged over
/// both frames; boundary rows/columns replicate edge values.
Derivatives estimate_derivatives(const Frame& f1, const Frame& f2);

/// Iterative minimization of the flow energy
///   E = sum (ix*u + iy*v + it)^2 + alpha^2 (|grad u|^2 + |grad v|^2)
/// from zero initialization. Updates are synchronous: every pixel reads the
/// previous iterate, so the result is deterministic for any traversal order.
FlowField solve_horn_schunck(const Frame& f1, const Frame& f2, const SolverParams& params);

/// Discrete energy of a flow field under the given derivatives; gradients of
/// u and v use forward differences with replicated edges.
double flow_energy(const FlowField& flow, const Derivatives& d, double alpha);

/// Debug dump: u32le width, u32le height, then u and v as f32le row-major grids.
std::vector<std::uint8_t> flow_to_bytes(const FlowField& flow);
FlowField flow_from_bytes(const std::vector<std::uint8_t>& bytes);
void save_flow_file(const std::filesystem::path& path, const FlowField& flow);
FlowField load_flow_file(const std::filesystem::path& path);

}  // namespace blindspot

#include "blindspot/flow.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

namespace blindspot {

namespace {

void require_same_size(int w1, int h1, int w2, int h2, const char* what) {
    if (w1 != w2 || h1 != h2)
        throw DimensionError(std::string(what) + ": dimension mismatch");
}

}  // namespace

Derivatives estimate_derivatives(const Frame& f1, const Frame& f2) {
    require_same_size(f1.width, f1.height, f2.width, f2.height, "estimate_derivatives");

    const int w = f1.width;
    const int h = f1.height;
    Derivatives d;
    d.width = w;
    d.height = h;
    size_t n = static_cast<size_t>(w) * h;
    d.ix.assign(n, 0.0);
    d.iy.assign(n, 0.0);
    d.it.assign(n, 0.0);

    for (int y = 0; y < h; ++y) {
        int yp = std::min(y + 1, h - 1);
        for (int x = 0; x < w; ++x) {
            int xp = std::min(x + 1, w - 1);
            size_t i = static_cast<size_t>(y) * w + x;
            d.ix[i] = 0.25 * (f1.at(xp, y) - f1.at(x, y) + f1.at(xp, yp) - f1.at(x, yp) +
                              f2.at(xp, y) - f2.at(x, y) + f2.at(xp, yp) - f2.at(x, yp));
            d.iy[i] = 0.25 * (f1.at(x, yp) - f1.at(x, y) + f1.at(xp, yp) - f1.at(xp, y) +
                              f2.at(x, yp) - f2.at(x, y) + f2.at(xp, yp) - f2.at(xp, y));
            d.it[i] = 0.25 * (f2.at(x, y) - f1.at(x, y) + f2.at(xp, y) - f1.at(xp, y) +
                              f2.at(x, yp) - f1.at(x, yp) + f2.at(xp, yp) - f1.at(xp, yp));
        }
    }
    return d;
}

FlowField solve_horn_schunck(const Frame& f1, const Frame& f2, const SolverParams& params) {
    require_same_size(f1.width, f1.height, f2.width, f2.height, "solve_horn_schunck");
    if (f1.width < 2 || f1.height < 2)
        throw DimensionError("solve_horn_schunck: frames must be at least 2x2");

    const int w = f1.width;
    const int h = f1.height;
    const size_t n = static_cast<size_t>(w) * h;
    const double alpha2 = params.alpha * params.alpha;

    Derivatives d = estimate_derivatives(f1, f2);
    std::vector<double> denom(n);
    for (size_t i = 0; i < n; ++i)
        denom[i] = alpha2 + d.ix[i] * d.ix[i] + d.iy[i] * d.iy[i];

    FlowField cur(w, h);
    FlowField next(w, h);

    // Horn-Schunck local average: 1/6 axial, 1/12 diagonal, replicated edges.
    auto neighborhood_avg = [&](const std::vector<double>& g, int x, int y) {
        int xm = std::max(x - 1, 0), xp = std::min(x + 1, w - 1);
        int ym = std::max(y - 1, 0), yp = std::min(y + 1, h - 1);
        auto v = [&](int xx, int yy) { return g[static_cast<size_t>(yy) * w + xx]; };
        return (v(xm, y) + v(xp, y) + v(x, ym) + v(x, yp)) / 6.0 +
               (v(xm, ym) + v(xp, ym) + v(xm, yp) + v(xp, yp)) / 12.0;
    };

    for (int iter = 0; iter < params.max_iters; ++iter) {
        double update_sum = 0.0;
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                size_t i = static_cast<size_t>(y) * w + x;
                double ubar = neighborhood_avg(cur.u, x, y);
                double vbar = neighborhood_avg(cur.v, x, y);
                double t = (d.ix[i] * ubar + d.iy[i] * vbar + d.it[i]) / denom[i];
                double un = ubar - d.ix[i] * t;
                double vn = vbar - d.iy[i] * t;
                update_sum += std::hypot(un - cur.u[i], vn - cur.v[i]);
                next.u[i] = un;
                next.v[i] = vn;
            }
        }
        std::swap(cur.u, next.u);
        std::swap(cur.v, next.v);
        if (update_sum / static_cast<double>(n) < params.epsilon) break;
    }

    for (size_t i = 0; i < n; ++i)
        if (!std::isfinite(cur.u[i]) || !std::isfinite(cur.v[i]))
            throw Error("solve_horn_schunck: non-finite flow value");
    return cur;
}

double flow_energy(const FlowField& flow, const Derivatives& d, double alpha) {
    require_same_size(flow.width, flow.height, d.width, d.height, "flow_energy");

    const int w = flow.width;
    const int h = flow.height;
    const double alpha2 = alpha * alpha;
    double energy = 0.0;
    for (int y = 0; y < h; ++y) {
        int yp = std::min(y + 1, h - 1);
        for (int x = 0; x < w; ++x) {
            int xp = std::min(x + 1, w - 1);
            size_t i = static_cast<size_t>(y) * w + x;
            double data = d.ix[i] * flow.u[i] + d.iy[i] * flow.v[i] + d.it[i];
            double ux = flow.u_at(xp, y) - flow.u[i];
            double uy = flow.u_at(x, yp) - flow.u[i];
            double vx = flow.v_at(xp, y) - flow.v[i];
            double vy = flow.v_at(x, yp) - flow.v[i];
            energy += data * data + alpha2 * (ux * ux + uy * uy + vx * vx + vy * vy);
        }
    }
    return energy;
}

namespace {

void put_u32le(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(v & 0xff);
    out.push_back((v >> 8) & 0xff);
    out.push_back((v >> 16) & 0xff);
    out.push_back((v >> 24) & 0xff);
}

std::uint32_t get_u32le(const std::vector<std::uint8_t>& in, size_t pos) {
    return static_cast<std::uint32_t>(in[pos]) |
           (static_cast<std::uint32_t>(in[pos + 1]) << 8) |
           (static_cast<std::uint32_t>(in[pos + 2]) << 16) |
           (static_cast<std::uint32_t>(in[pos + 3]) << 24);
}

void put_f32le(std::vector<std::uint8_t>& out, float f) {
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    put_u32le(out, bits);
}

float get_f32le(const std::vector<std::uint8_t>& in, size_t pos) {
    std::uint32_t bits = get_u32le(in, pos);
    float f;
    std::memcpy(&f, &bits, 4);
    return f;
}

}  // namespace

std::vector<std::uint8_t> flow_to_bytes(const FlowField& flow) {
    std::vector<std::uint8_t> out;
    out.reserve(8 + flow.u.size() * 8);
    put_u32le(out, static_cast<std::uint32_t>(flow.width));
    put_u32le(out, static_cast<std::uint32_t>(flow.height));
    for (double x : flow.u) put_f32le(out, static_cast<float>(x));
    for (double x : flow.v) put_f32le(out, static_cast<float>(x));
    return out;
}

FlowField flow_from_bytes(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 8) throw Error("flow dump: truncated header");
    int w = static_cast<int>(get_u32le(bytes, 0));
    int h = static_cast<int>(get_u32le(bytes, 4));
    size_t n = static_cast<size_t>(w) * h;
    if (bytes.size() != 8 + n * 8) throw Error("flow dump: size mismatch");
    FlowField flow(w, h);
    for (size_t i = 0; i < n; ++i) flow.u[i] = get_f32le(bytes, 8 + i * 4);
    for (size_t i = 0; i < n; ++i) flow.v[i] = get_f32le(bytes, 8 + (n + i) * 4);
    return flow;
}

void save_flow_file(const std::filesystem::path& path, const FlowField& flow) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open file for writing: " + path.string());
    auto bytes = flow_to_bytes(flow);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
}

FlowField load_flow_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open file: " + path.string());
    std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in),
                                    std::istreambuf_iterator<char>()};
    return flow_from_bytes(bytes);
}

}  // namespace blindspot

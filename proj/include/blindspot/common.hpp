#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace blindspot {

constexpr double kPi = 3.14159265358979323846;

/// Base type for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Operands whose grid dimensions do not match.
struct DimensionError : Error {
    using Error::Error;
};

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

/// Wrap an angle into (-pi, pi].
inline double wrap_angle(double a) {
    double r = std::fmod(a + kPi, 2.0 * kPi);
    if (r <= 0.0) r += 2.0 * kPi;
    return r - kPi;
}

/// Absolute angular distance between two directions, in [0, pi].
inline double angular_distance(double a, double b) {
    return std::fabs(wrap_angle(a - b));
}

/// Dense row-major grid used for scratch buffers and masks.
template <typename T>
struct Grid {
    int width = 0;
    int height = 0;
    std::vector<T> data;

    Grid() = default;
    Grid(int w, int h, T fill = T{})
        : width(w), height(h), data(static_cast<size_t>(w) * h, fill) {}

    T& at(int x, int y) { return data[static_cast<size_t>(y) * width + x]; }
    const T& at(int x, int y) const { return data[static_cast<size_t>(y) * width + x]; }

    bool in_bounds(int x, int y) const {
        return x >= 0 && x < width && y >= 0 && y < height;
    }
};

/// SplitMix64 step; the workhorse behind all deterministic procedural noise.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Hash integer lattice coordinates and a seed to a double in [0, 1).
inline double hash_to_unit(std::uint64_t seed, std::int64_t ix, std::int64_t iy) {
    std::uint64_t h = splitmix64(seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(ix)));
    h = splitmix64(h ^ (0xc2b2ae3d27d4eb4fULL * static_cast<std::uint64_t>(iy)));
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

}  // namespace blindspot

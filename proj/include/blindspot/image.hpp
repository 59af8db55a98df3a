#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "blindspot/common.hpp"

namespace blindspot {

/// Grayscale frame with intensities normalized to [0, 1].
struct Frame {
    int width = 0;
    int height = 0;
    std::vector<double> intensities;

    Frame() = default;
    Frame(int w, int h, double fill = 0.0)
        : width(w), height(h), intensities(static_cast<size_t>(w) * h, fill) {}

    double& at(int x, int y) { return intensities[static_cast<size_t>(y) * width + x]; }
    double at(int x, int y) const { return intensities[static_cast<size_t>(y) * width + x]; }
};

/// Distance-proxy frame. Values in [0, 1]; larger means farther from the lens.
struct DepthFrame {
    int width = 0;
    int height = 0;
    std::vector<double> values;

    DepthFrame() = default;
    DepthFrame(int w, int h, double fill = 1.0)
        : width(w), height(h), values(static_cast<size_t>(w) * h, fill) {}

    double& at(int x, int y) { return values[static_cast<size_t>(y) * width + x]; }
    double at(int x, int y) const { return values[static_cast<size_t>(y) * width + x]; }
};

/// Ordered frame list with a shared frame period in seconds.
struct FrameSequence {
    std::vector<Frame> frames;
    double frame_period = 1.0 / 30.0;
};

enum class PgmErrorKind {
    BadMagic,
    BadHeader,
    BadDimensions,
    BadMaxval,
    Truncated,
    ValueOutOfRange,
};

struct PgmError : Error {
    PgmErrorKind kind;
    PgmError(PgmErrorKind k, const std::string& msg) : Error(msg), kind(k) {}
};

struct SequenceError : Error {
    using Error::Error;
};

/// Parse a binary PGM (P5). Intensities are divided by the header maxval;
/// raw samples above maxval are a parse error, never clamped.
Frame load_pgm(const std::vector<std::uint8_t>& bytes);

/// Encode as binary P5 with maxval 255. Deterministic, bit-exact.
std::vector<std::uint8_t> save_pgm(const Frame& frame);

/// 16-bit P5 variants for depth-proxy frames (maxval 65535, big-endian samples).
DepthFrame load_depth_pgm(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> save_depth_pgm(const DepthFrame& depth);

Frame load_pgm_file(const std::filesystem::path& path);
void save_pgm_file(const std::filesystem::path& path, const Frame& frame);
DepthFrame load_depth_pgm_file(const std::filesystem::path& path);
void save_depth_pgm_file(const std::filesystem::path& path, const DepthFrame& depth);

/// Load a directory of frame_NNNNNN.pgm files (zero-padded, consecutive,
/// at least two, uniform dimensions).
FrameSequence load_sequence(const std::filesystem::path& dir,
                            double frame_period = 1.0 / 30.0);

/// Write frames as frame_000001.pgm, frame_000002.pgm, ...
void save_sequence(const std::filesystem::path& dir, const std::vector<Frame>& frames);

std::vector<DepthFrame> load_depth_sequence(const std::filesystem::path& dir);
void save_depth_sequence(const std::filesystem::path& dir,
                         const std::vector<DepthFrame>& depths);

}  // namespace blindspot

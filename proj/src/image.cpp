#include "blindspot/image.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <regex>

namespace blindspot {

namespace {

struct ByteCursor {
    const std::vector<std::uint8_t>& bytes;
    size_t pos = 0;

    bool eof() const { return pos >= bytes.size(); }
    int peek() const { return eof() ? -1 : bytes[pos]; }
    int get() { return eof() ? -1 : bytes[pos++]; }
};

// Skip whitespace and '#' comments between header tokens.
void skip_header_space(ByteCursor& c) {
    while (!c.eof()) {
        int ch = c.peek();
        if (std::isspace(ch)) {
            c.get();
        } else if (ch == '#') {
            while (!c.eof() && c.get() != '\n') {
            }
        } else {
            break;
        }
    }
}

long parse_header_int(ByteCursor& c, const char* what) {
    skip_header_space(c);
    if (c.eof() || !std::isdigit(c.peek()))
        throw PgmError(PgmErrorKind::BadHeader,
                       std::string("pgm: expected integer for ") + what);
    long value = 0;
    while (!c.eof() && std::isdigit(c.peek())) {
        value = value * 10 + (c.get() - '0');
        if (value > 1'000'000'000)
            throw PgmError(PgmErrorKind::BadHeader,
                           std::string("pgm: oversized value for ") + what);
    }
    return value;
}

struct RawPgm {
    int width = 0;
    int height = 0;
    int maxval = 0;
    std::vector<int> samples;
};

RawPgm parse_p5(const std::vector<std::uint8_t>& bytes) {
    ByteCursor c{bytes};
    if (c.get() != 'P' || c.get() != '5')
        throw PgmError(PgmErrorKind::BadMagic, "pgm: stream does not start with P5");

    RawPgm p;
    long w = parse_header_int(c, "width");
    long h = parse_header_int(c, "height");
    if (w <= 1 || h <= 1)
        throw PgmError(PgmErrorKind::BadDimensions,
                       "pgm: dimensions must both be at least 2");
    long maxval = parse_header_int(c, "maxval");
    if (maxval < 1 || maxval > 65535)
        throw PgmError(PgmErrorKind::BadMaxval, "pgm: maxval out of [1, 65535]");

    // Exactly one whitespace byte separates the header from the payload.
    if (c.eof() || !std::isspace(c.peek()))
        throw PgmError(PgmErrorKind::BadHeader, "pgm: missing payload separator");
    c.get();

    p.width = static_cast<int>(w);
    p.height = static_cast<int>(h);
    p.maxval = static_cast<int>(maxval);

    size_t count = static_cast<size_t>(w) * static_cast<size_t>(h);
    int bytes_per = maxval > 255 ? 2 : 1;
    if (bytes.size() - c.pos < count * bytes_per)
        throw PgmError(PgmErrorKind::Truncated, "pgm: truncated pixel payload");

    p.samples.resize(count);
    for (size_t i = 0; i < count; ++i) {
        int v;
        if (bytes_per == 2) {
            int hi = c.get();
            int lo = c.get();
            v = (hi << 8) | lo;
        } else {
            v = c.get();
        }
        if (v > p.maxval)
            throw PgmError(PgmErrorKind::ValueOutOfRange,
                           "pgm: sample value exceeds maxval");
        p.samples[i] = v;
    }
    return p;
}

void append_header(std::vector<std::uint8_t>& out, int w, int h, int maxval) {
    std::string header = "P5\n" + std::to_string(w) + " " + std::to_string(h) +
                         "\n" + std::to_string(maxval) + "\n";
    out.insert(out.end(), header.begin(), header.end());
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open file: " + path.string());
    return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in),
                                     std::istreambuf_iterator<char>());
}

void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open file for writing: " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("write failed: " + path.string());
}

// Collect frame_NNNNNN.pgm files sorted by index, enforcing consecutive numbering.
std::vector<std::filesystem::path> numbered_frames(const std::filesystem::path& dir) {
    static const std::regex pattern(R"(frame_(\d{6})\.pgm)");
    if (!std::filesystem::is_directory(dir))
        throw SequenceError("sequence: not a directory: " + dir.string());

    std::map<long, std::filesystem::path> by_index;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        std::smatch m;
        std::string name = entry.path().filename().string();
        if (std::regex_match(name, m, pattern))
            by_index[std::stol(m[1].str())] = entry.path();
    }
    if (by_index.size() < 2)
        throw SequenceError("sequence: need at least 2 frames in " + dir.string());

    std::vector<std::filesystem::path> paths;
    long expect = by_index.begin()->first;
    for (const auto& [idx, path] : by_index) {
        if (idx != expect)
            throw SequenceError("sequence: gap in numbering at index " +
                                std::to_string(expect));
        ++expect;
        paths.push_back(path);
    }
    return paths;
}

}  // namespace

Frame load_pgm(const std::vector<std::uint8_t>& bytes) {
    RawPgm p = parse_p5(bytes);
    Frame f(p.width, p.height);
    double scale = 1.0 / p.maxval;
    for (size_t i = 0; i < p.samples.size(); ++i)
        f.intensities[i] = p.samples[i] * scale;
    return f;
}

std::vector<std::uint8_t> save_pgm(const Frame& frame) {
    std::vector<std::uint8_t> out;
    out.reserve(frame.intensities.size() + 32);
    append_header(out, frame.width, frame.height, 255);
    for (double v : frame.intensities)
        out.push_back(static_cast<std::uint8_t>(std::lround(v * 255.0)));
    return out;
}

DepthFrame load_depth_pgm(const std::vector<std::uint8_t>& bytes) {
    RawPgm p = parse_p5(bytes);
    DepthFrame d(p.width, p.height);
    double scale = 1.0 / p.maxval;
    for (size_t i = 0; i < p.samples.size(); ++i)
        d.values[i] = p.samples[i] * scale;
    return d;
}

std::vector<std::uint8_t> save_depth_pgm(const DepthFrame& depth) {
    std::vector<std::uint8_t> out;
    out.reserve(depth.values.size() * 2 + 32);
    append_header(out, depth.width, depth.height, 65535);
    for (double v : depth.values) {
        long raw = std::lround(v * 65535.0);
        out.push_back(static_cast<std::uint8_t>((raw >> 8) & 0xff));
        out.push_back(static_cast<std::uint8_t>(raw & 0xff));
    }
    return out;
}

Frame load_pgm_file(const std::filesystem::path& path) {
    return load_pgm(read_file(path));
}

void save_pgm_file(const std::filesystem::path& path, const Frame& frame) {
    write_file(path, save_pgm(frame));
}

DepthFrame load_depth_pgm_file(const std::filesystem::path& path) {
    return load_depth_pgm(read_file(path));
}

void save_depth_pgm_file(const std::filesystem::path& path, const DepthFrame& depth) {
    write_file(path, save_depth_pgm(depth));
}

FrameSequence load_sequence(const std::filesystem::path& dir, double frame_period) {
    FrameSequence seq;
    seq.frame_period = frame_period;
    for (const auto& path : numbered_frames(dir)) {
        Frame f = load_pgm_file(path);
        if (!seq.frames.empty() &&
            (f.width != seq.frames.front().width || f.height != seq.frames.front().height))
            throw SequenceError("sequence: dimension mismatch at " + path.string());
        seq.frames.push_back(std::move(f));
    }
    return seq;
}

void save_sequence(const std::filesystem::path& dir, const std::vector<Frame>& frames) {
    std::filesystem::create_directories(dir);
    char name[32];
    for (size_t i = 0; i < frames.size(); ++i) {
        std::snprintf(name, sizeof(name), "frame_%06zu.pgm", i + 1);
        save_pgm_file(dir / name, frames[i]);
    }
}

std::vector<DepthFrame> load_depth_sequence(const std::filesystem::path& dir) {
    std::vector<DepthFrame> depths;
    for (const auto& path : numbered_frames(dir))
        depths.push_back(load_depth_pgm_file(path));
    return depths;
}

void save_depth_sequence(const std::filesystem::path& dir,
                         const std::vector<DepthFrame>& depths) {
    std::filesystem::create_directories(dir);
    char name[32];
    for (size_t i = 0; i < depths.size(); ++i) {
        std::snprintf(name, sizeof(name), "frame_%06zu.pgm", i + 1);
        save_depth_pgm_file(dir / name, depths[i]);
    }
}

}  // namespace blindspot

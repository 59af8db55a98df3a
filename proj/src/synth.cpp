#include "blindspot/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace blindspot {

namespace {

constexpr double kWorldPeriod = 4096.0;  // background shapes tile with this period

double smoothstep(double t) { return t * t * (3.0 - 2.0 * t); }

// Smooth value noise over an integer lattice of the given cell size.
double value_noise(double wx, double wy, std::uint64_t seed, double scale) {
    double gx = wx / scale;
    double gy = wy / scale;
    double fx = std::floor(gx);
    double fy = std::floor(gy);
    std::int64_t ix = static_cast<std::int64_t>(fx);
    std::int64_t iy = static_cast<std::int64_t>(fy);
    double tx = smoothstep(gx - fx);
    double ty = smoothstep(gy - fy);
    double v00 = hash_to_unit(seed, ix, iy);
    double v10 = hash_to_unit(seed, ix + 1, iy);
    double v01 = hash_to_unit(seed, ix, iy + 1);
    double v11 = hash_to_unit(seed, ix + 1, iy + 1);
    double a = v00 + (v10 - v00) * tx;
    double b = v01 + (v11 - v01) * tx;
    return a + (b - a) * ty;
}

struct SoftShape {
    double cx, cy, ax, ay, delta;
};

std::vector<SoftShape> background_shapes(const SceneSpec& spec) {
    std::vector<SoftShape> shapes;
    shapes.reserve(spec.background.shape_count);
    for (int k = 0; k < spec.background.shape_count; ++k) {
        std::uint64_t s = splitmix64(spec.seed ^ (0x5851f42d4c957f2dULL + k));
        SoftShape sh;
        sh.cx = hash_to_unit(s, 1, k) * kWorldPeriod;
        sh.cy = hash_to_unit(s, 2, k) * spec.height;
        sh.ax = 8.0 + hash_to_unit(s, 3, k) * 32.0;
        // Never circular, so the Hough path cannot mistake a shape for a wheel.
        sh.ay = sh.ax * (1.4 + hash_to_unit(s, 4, k) * 0.8);
        double mag = 0.08 + hash_to_unit(s, 5, k) * 0.10;
        sh.delta = hash_to_unit(s, 6, k) < 0.5 ? -mag : mag;
        shapes.push_back(sh);
    }
    return shapes;
}

double background_at(const SceneSpec& spec, const std::vector<SoftShape>& shapes,
                     int x, int y, int t) {
    double wx = x + spec.camera_pan * t;  // content drifts left for positive pan
    double wy = y;
    double n = value_noise(wx, wy, spec.seed, spec.background.noise_scale);
    double v = spec.background.base_level + spec.background.contrast * (2.0 * n - 1.0);
    for (const auto& sh : shapes) {
        double dx = std::remainder(wx - sh.cx, kWorldPeriod);
        double dy = wy - sh.cy;
        double q = (dx / sh.ax) * (dx / sh.ax) + (dy / sh.ay) * (dy / sh.ay);
        if (q < 1.0) v += sh.delta * smoothstep(1.0 - q);
    }
    return std::clamp(v, 0.0, 1.0);
}

struct ObjectGeometry {
    bool active = false;
    double cx = 0.0, cy = 0.0;  // scripted center
    double w = 0.0, h = 0.0;
    double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;
    double depth = 0.0;
    bool has_wheels = false;
    double skirt_top = 0.0;  // light band the wheels sit on
    double wheel_r = 0.0;
    double wheel_lx = 0.0, wheel_rx = 0.0, wheel_y = 0.0;
};

ObjectGeometry object_geometry(const ObjectSpec& o, int t) {
    ObjectGeometry g;
    if (t < o.entry_frame) return g;
    double tau = t - o.entry_frame;
    g.cx = o.x0 + o.vx * tau;
    g.cy = o.y0 + o.vy * tau;
    g.w = o.w0 + o.grow_w * tau;
    g.h = o.h0 + o.grow_h * tau;
    if (g.w < 2.0 || g.h < 2.0) return g;
    g.x0 = g.cx - g.w / 2.0;
    g.x1 = g.cx + g.w / 2.0;
    g.y0 = g.cy - g.h / 2.0;
    g.y1 = g.cy + g.h / 2.0;
    g.depth = std::clamp(o.depth0 + o.depth_rate * tau, 0.0, 1.0);
    g.active = true;

    if (o.shape == ObjectShape::RectWithWheels) {
        double band = 2.0 * o.wheel_radius + 8.0;
        if (band <= 0.6 * g.h) {
            g.has_wheels = true;
            g.skirt_top = g.y1 - band;
            g.wheel_r = o.wheel_radius;
            g.wheel_lx = g.cx - 0.28 * g.w;
            g.wheel_rx = g.cx + 0.28 * g.w;
            g.wheel_y = g.y1 - o.wheel_radius - 4.0;
        }
    }
    return g;
}

double object_pixel(const ObjectSpec& o, const ObjectGeometry& g, std::uint64_t seed,
                    int id, int x, int y) {
    if (g.has_wheels) {
        double dl = std::hypot(x - g.wheel_lx, y - g.wheel_y);
        double dr = std::hypot(x - g.wheel_rx, y - g.wheel_y);
        if (dl <= g.wheel_r || dr <= g.wheel_r) return 0.05;  // tire disk
        if (y >= g.skirt_top) return 0.78;                    // light skirt band
    }
    // Texture in material coordinates so it expands with the sprite.
    double mx = (x - g.cx) * (o.w0 / g.w);
    double my = (y - g.cy) * (o.h0 / g.h);
    double n = value_noise(mx, my, splitmix64(seed ^ (0xa24baed4963ee407ULL + id)), 5.0);
    return std::clamp(o.level + 0.12 * (2.0 * n - 1.0), 0.0, 1.0);
}

double wall_pixel(const WallSpec& w, std::uint64_t seed, int id, int x, int y) {
    double n = value_noise(x, y, splitmix64(seed ^ (0x9fb21c651e98df25ULL + id)), 10.0);
    return std::clamp(w.level + 0.08 * (2.0 * n - 1.0), 0.0, 1.0);
}

// owner: -1 background, object index, or n_objects + wall index.
void render_frame_impl(const SceneSpec& spec, int t, Frame& out, Grid<int>* owner) {
    auto shapes = background_shapes(spec);
    std::vector<ObjectGeometry> geos;
    geos.reserve(spec.objects.size());
    for (const auto& o : spec.objects) geos.push_back(object_geometry(o, t));

    for (int y = 0; y < spec.height; ++y) {
        for (int x = 0; x < spec.width; ++x) {
            double v = background_at(spec, shapes, x, y, t);
            int who = -1;
            for (size_t k = 0; k < geos.size(); ++k) {
                const auto& g = geos[k];
                if (!g.active || x < g.x0 || x > g.x1 || y < g.y0 || y > g.y1) continue;
                v = object_pixel(spec.objects[k], g, spec.seed, static_cast<int>(k), x, y);
                who = static_cast<int>(k);
            }
            for (size_t k = 0; k < spec.walls.size(); ++k) {
                const auto& w = spec.walls[k];
                if (x < w.x0 || x > w.x1 || y < w.y0 || y > w.y1) continue;
                v = wall_pixel(w, spec.seed, static_cast<int>(k), x, y);
                who = static_cast<int>(geos.size() + k);
            }
            out.at(x, y) = v;
            if (owner) owner->at(x, y) = who;
        }
    }
}

void check_renderable(const SceneSpec& spec) {
    for (size_t k = 0; k < spec.objects.size(); ++k) {
        bool ever_visible = false;
        for (int t = spec.objects[k].entry_frame; t < spec.n_frames && !ever_visible; ++t) {
            ObjectGeometry g = object_geometry(spec.objects[k], t);
            if (!g.active) continue;
            ever_visible = g.x1 >= 0 && g.x0 < spec.width && g.y1 >= 0 && g.y0 < spec.height;
        }
        if (!ever_visible)
            throw Error("render: object " + std::to_string(k) +
                        " never enters the frame");
    }
}

}  // namespace

Frame render_frame(const SceneSpec& spec, int t) {
    Frame out(spec.width, spec.height);
    render_frame_impl(spec, t, out, nullptr);
    return out;
}

std::pair<FrameSequence, GroundTruth> render_sequence(const SceneSpec& spec) {
    check_renderable(spec);

    FrameSequence seq;
    seq.frame_period = spec.frame_period;
    GroundTruth truth;

    for (int t = 0; t < spec.n_frames; ++t) {
        Frame frame(spec.width, spec.height);
        Grid<int> owner(spec.width, spec.height, -1);
        render_frame_impl(spec, t, frame, &owner);

        std::vector<long> visible(spec.objects.size(), 0);
        for (int who : owner.data)
            if (who >= 0 && who < static_cast<int>(spec.objects.size())) ++visible[who];

        FrameTruth ft;
        ft.frame = t;
        for (size_t k = 0; k < spec.objects.size(); ++k) {
            if (visible[k] == 0) continue;
            ObjectGeometry g = object_geometry(spec.objects[k], t);
            ObjectTruth ot;
            ot.id = static_cast<int>(k);
            ot.bx0 = std::max(g.x0, 0.0);
            ot.by0 = std::max(g.y0, 0.0);
            ot.bx1 = std::min(g.x1, spec.width - 1.0);
            ot.by1 = std::min(g.y1, spec.height - 1.0);
            ot.cx = g.cx;
            ot.cy = g.cy;
            ot.depth_proxy = g.depth;
            ot.visible_px = visible[k];
            if (g.has_wheels) {
                ot.wheels.push_back({g.wheel_lx, g.wheel_y, g.wheel_r});
                ot.wheels.push_back({g.wheel_rx, g.wheel_y, g.wheel_r});
            }
            if (spec.objects[k].grow_w > 0.0)
                ot.ttc_frames = g.w / spec.objects[k].grow_w;
            ft.objects.push_back(std::move(ot));
        }
        truth.frames.push_back(std::move(ft));
        seq.frames.push_back(std::move(frame));
    }
    return {std::move(seq), std::move(truth)};
}

std::vector<DepthFrame> render_depth_sequence(const SceneSpec& spec) {
    check_renderable(spec);

    std::vector<DepthFrame> out;
    out.reserve(spec.n_frames);
    for (int t = 0; t < spec.n_frames; ++t) {
        DepthFrame d(spec.width, spec.height, 1.0);
        std::vector<ObjectGeometry> geos;
        for (const auto& o : spec.objects) geos.push_back(object_geometry(o, t));
        for (int y = 0; y < spec.height; ++y)
            for (int x = 0; x < spec.width; ++x) {
                double v = 1.0;
                for (const auto& g : geos) {
                    if (!g.active || x < g.x0 || x > g.x1 || y < g.y0 || y > g.y1) continue;
                    v = g.depth;
                }
                for (const auto& w : spec.walls) {
                    if (x < w.x0 || x > w.x1 || y < w.y0 || y > w.y1) continue;
                    v = std::clamp(w.depth_proxy, 0.0, 1.0);
                }
                d.at(x, y) = v;
            }
        out.push_back(std::move(d));
    }
    return out;
}

std::vector<std::pair<std::string, SceneSpec>> preset_scenarios() {
    std::vector<std::pair<std::string, SceneSpec>> catalog;

    {
        // Object approaching from the rear: grows from 5% to ~40% of frame width.
        SceneSpec s;
        s.seed = 11;
        s.camera_pan = 0.5;
        ObjectSpec o;
        o.shape = ObjectShape::PlainRect;
        o.x0 = 70; o.y0 = 130;
        o.vx = 2.3; o.vy = 0.0;
        o.w0 = 16; o.h0 = 13;
        o.grow_w = 112.0 / 60.0;  // 16 -> 128 px over 60 frames
        o.grow_h = 80.0 / 60.0;
        o.depth0 = 0.72; o.depth_rate = -0.0085;
        o.level = 0.22;
        s.objects.push_back(o);
        catalog.emplace_back("approach", s);
    }
    {
        SceneSpec s;
        s.seed = 12;
        s.camera_pan = 0.6;
        ObjectSpec o;
        o.shape = ObjectShape::RectWithWheels;
        o.x0 = -50; o.y0 = 150;
        o.vx = 7.0;
        o.w0 = 90; o.h0 = 70;
        o.wheel_radius = 10;
        o.depth0 = 0.3;
        o.level = 0.28;
        s.objects.push_back(o);
        catalog.emplace_back("overtake", s);
    }
    {
        // Zero relative velocity: the object holds still while the world pans.
        SceneSpec s;
        s.seed = 13;
        s.camera_pan = 0.8;
        ObjectSpec o;
        o.shape = ObjectShape::RectWithWheels;
        o.x0 = 200; o.y0 = 150;
        o.w0 = 120; o.h0 = 90;
        o.wheel_radius = 11;
        o.depth0 = 0.3;
        o.level = 0.25;
        s.objects.push_back(o);
        catalog.emplace_back("zero_relative_hold", s);
    }
    {
        // Car pops out from behind a wall mid-frame at frame 30.
        SceneSpec s;
        s.seed = 14;
        s.camera_pan = 0.5;
        WallSpec w;
        w.x0 = 30; w.y0 = 40; w.x1 = 150; w.y1 = 220;
        s.walls.push_back(w);
        ObjectSpec o;
        o.shape = ObjectShape::PlainRect;
        o.entry_frame = 30;
        o.x0 = 200; o.y0 = 130;
        o.vx = 2.0;
        o.w0 = 100; o.h0 = 100;
        o.depth0 = 0.4;
        o.level = 0.22;
        s.objects.push_back(o);
        catalog.emplace_back("wall_reveal", s);
    }
    {
        // Three cars in three lanes at distinct depth bands.
        SceneSpec s;
        s.seed = 15;
        s.camera_pan = 0.5;
        auto car = [](double x, double depth, double vx) {
            ObjectSpec o;
            o.shape = ObjectShape::RectWithWheels;
            o.x0 = x; o.y0 = 120;
            o.vx = vx;
            o.w0 = 70; o.h0 = 55;
            o.wheel_radius = 9;
            o.depth0 = depth;
            o.level = 0.27;
            return o;
        };
        s.objects.push_back(car(80, 0.20, 1.0));
        s.objects.push_back(car(180, 0.45, 1.0));
        s.objects.push_back(car(270, 0.65, 0.5));
        catalog.emplace_back("multi_lane", s);
    }
    {
        // Frontal deceleration: the car drifts with the background, so its
        // vectors blend in and only the wheels give it away.
        SceneSpec s;
        s.seed = 16;
        s.camera_pan = 0.8;
        ObjectSpec o;
        o.shape = ObjectShape::RectWithWheels;
        o.x0 = 160; o.y0 = 150;
        o.vx = -0.6;
        o.w0 = 110; o.h0 = 85;
        o.wheel_radius = 10;
        o.depth0 = 0.3;
        o.level = 0.25;
        s.objects.push_back(o);
        catalog.emplace_back("frontal_decel", s);
    }
    {
        // Night: headlight blobs on a nearly black road, lamp posts as
        // static bright walls.
        SceneSpec s;
        s.seed = 17;
        s.camera_pan = 0.4;
        s.background.base_level = 0.05;
        s.background.contrast = 0.04;
        s.background.noise_scale = 16.0;
        s.background.shape_count = 0;
        auto lamp = [](double x) {
            WallSpec w;
            w.x0 = x; w.y0 = 28; w.x1 = x + 8; w.y1 = 88;
            w.level = 0.85;
            return w;
        };
        s.walls.push_back(lamp(60));
        s.walls.push_back(lamp(160));
        s.walls.push_back(lamp(260));
        auto headlight = [](double x) {
            ObjectSpec o;
            o.shape = ObjectShape::PlainRect;
            o.x0 = x; o.y0 = 170;
            o.vx = 2.2;
            o.w0 = 14; o.h0 = 10;
            o.grow_w = 0.15; o.grow_h = 0.1;
            o.depth0 = 0.35;
            o.level = 0.95;
            return o;
        };
        s.objects.push_back(headlight(40));
        s.objects.push_back(headlight(75));
        catalog.emplace_back("night_low_texture", s);
    }
    {
        SceneSpec s;
        s.seed = 18;
        s.camera_pan = 0.7;
        catalog.emplace_back("empty_road", s);
    }
    return catalog;
}

SceneSpec preset_scenario(const std::string& name) {
    for (auto& [n, spec] : preset_scenarios())
        if (n == name) return spec;
    throw Error("unknown preset: " + name);
}

namespace {

const char* shape_name(ObjectShape s) {
    return s == ObjectShape::RectWithWheels ? "rect_with_wheels" : "plain_rect";
}

ObjectShape shape_from_name(const std::string& s) {
    if (s == "rect_with_wheels") return ObjectShape::RectWithWheels;
    if (s == "plain_rect") return ObjectShape::PlainRect;
    throw Error("scene spec: unknown shape: " + s);
}

}  // namespace

std::string scene_spec_to_text(const SceneSpec& spec) {
    std::ostringstream out;
    out << "[scene]\n";
    out << "width = " << spec.width << "\n";
    out << "height = " << spec.height << "\n";
    out << "frames = " << spec.n_frames << "\n";
    out << "seed = " << spec.seed << "\n";
    out << "camera_pan = " << spec.camera_pan << "\n";
    out << "frame_period = " << spec.frame_period << "\n";
    out << "\n[background]\n";
    out << "noise_scale = " << spec.background.noise_scale << "\n";
    out << "shape_count = " << spec.background.shape_count << "\n";
    out << "contrast = " << spec.background.contrast << "\n";
    out << "base_level = " << spec.background.base_level << "\n";
    for (const auto& o : spec.objects) {
        out << "\n[object]\n";
        out << "shape = " << shape_name(o.shape) << "\n";
        out << "entry_frame = " << o.entry_frame << "\n";
        out << "x = " << o.x0 << "\n";
        out << "y = " << o.y0 << "\n";
        out << "vx = " << o.vx << "\n";
        out << "vy = " << o.vy << "\n";
        out << "w = " << o.w0 << "\n";
        out << "h = " << o.h0 << "\n";
        out << "grow_w = " << o.grow_w << "\n";
        out << "grow_h = " << o.grow_h << "\n";
        out << "depth = " << o.depth0 << "\n";
        out << "depth_rate = " << o.depth_rate << "\n";
        out << "wheel_radius = " << o.wheel_radius << "\n";
        out << "level = " << o.level << "\n";
    }
    for (const auto& w : spec.walls) {
        out << "\n[wall]\n";
        out << "x0 = " << w.x0 << "\n";
        out << "y0 = " << w.y0 << "\n";
        out << "x1 = " << w.x1 << "\n";
        out << "y1 = " << w.y1 << "\n";
        out << "level = " << w.level << "\n";
        out << "depth = " << w.depth_proxy << "\n";
    }
    return out.str();
}

SceneSpec scene_spec_from_text(const std::string& text) {
    SceneSpec spec;
    spec.objects.clear();
    spec.walls.clear();

    std::istringstream in(text);
    std::string line;
    std::string section;
    int line_no = 0;

    auto fail = [&](const std::string& msg) {
        throw Error("scene spec line " + std::to_string(line_no) + ": " + msg);
    };

    while (std::getline(in, line)) {
        ++line_no;
        size_t start = line.find_first_not_of(" \t\r");
        if (start == std::string::npos) continue;
        size_t end = line.find_last_not_of(" \t\r");
        std::string s = line.substr(start, end - start + 1);
        if (s.empty() || s[0] == '#') continue;

        if (s.front() == '[' && s.back() == ']') {
            section = s.substr(1, s.size() - 2);
            if (section == "object") spec.objects.emplace_back();
            else if (section == "wall") spec.walls.emplace_back();
            else if (section != "scene" && section != "background")
                fail("unknown section [" + section + "]");
            continue;
        }

        size_t eq = s.find('=');
        if (eq == std::string::npos) fail("expected key = value");
        std::string key = s.substr(0, s.find_last_not_of(" \t", eq - 1) + 1);
        std::string val = s.substr(s.find_first_not_of(" \t", eq + 1));

        auto num = [&]() {
            try {
                return std::stod(val);
            } catch (...) {
                fail("bad number: " + val);
                return 0.0;
            }
        };

        if (section == "scene") {
            if (key == "width") spec.width = static_cast<int>(num());
            else if (key == "height") spec.height = static_cast<int>(num());
            else if (key == "frames") spec.n_frames = static_cast<int>(num());
            else if (key == "seed") spec.seed = static_cast<std::uint64_t>(num());
            else if (key == "camera_pan") spec.camera_pan = num();
            else if (key == "frame_period") spec.frame_period = num();
            else fail("unknown key " + key);
        } else if (section == "background") {
            if (key == "noise_scale") spec.background.noise_scale = num();
            else if (key == "shape_count") spec.background.shape_count = static_cast<int>(num());
            else if (key == "contrast") spec.background.contrast = num();
            else if (key == "base_level") spec.background.base_level = num();
            else fail("unknown key " + key);
        } else if (section == "object") {
            ObjectSpec& o = spec.objects.back();
            if (key == "shape") o.shape = shape_from_name(val);
            else if (key == "entry_frame") o.entry_frame = static_cast<int>(num());
            else if (key == "x") o.x0 = num();
            else if (key == "y") o.y0 = num();
            else if (key == "vx") o.vx = num();
            else if (key == "vy") o.vy = num();
            else if (key == "w") o.w0 = num();
            else if (key == "h") o.h0 = num();
            else if (key == "grow_w") o.grow_w = num();
            else if (key == "grow_h") o.grow_h = num();
            else if (key == "depth") o.depth0 = num();
            else if (key == "depth_rate") o.depth_rate = num();
            else if (key == "wheel_radius") o.wheel_radius = num();
            else if (key == "level") o.level = num();
            else fail("unknown key " + key);
        } else if (section == "wall") {
            WallSpec& w = spec.walls.back();
            if (key == "x0") w.x0 = num();
            else if (key == "y0") w.y0 = num();
            else if (key == "x1") w.x1 = num();
            else if (key == "y1") w.y1 = num();
            else if (key == "level") w.level = num();
            else if (key == "depth") w.depth_proxy = num();
            else fail("unknown key " + key);
        } else {
            fail("key outside any section");
        }
    }
    return spec;
}

SceneSpec load_scene_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open scene spec: " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return scene_spec_from_text(buf.str());
}

void save_scene_spec(const std::filesystem::path& path, const SceneSpec& spec) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open file for writing: " + path.string());
    out << scene_spec_to_text(spec);
}

std::string truth_to_jsonl(const GroundTruth& truth) {
    std::ostringstream out;
    for (const auto& ft : truth.frames) {
        nlohmann::ordered_json j;
        j["frame"] = ft.frame;
        j["objects"] = nlohmann::ordered_json::array();
        for (const auto& o : ft.objects) {
            nlohmann::ordered_json jo;
            jo["id"] = o.id;
            jo["bbox"] = {o.bx0, o.by0, o.bx1, o.by1};
            jo["centroid"] = {o.cx, o.cy};
            jo["depth_proxy"] = o.depth_proxy;
            jo["visible_px"] = o.visible_px;
            jo["wheels"] = nlohmann::ordered_json::array();
            for (const auto& w : o.wheels) jo["wheels"].push_back({w.cx, w.cy, w.r});
            if (std::isfinite(o.ttc_frames))
                jo["ttc_frames"] = o.ttc_frames;
            else
                jo["ttc_frames"] = nullptr;
            j["objects"].push_back(std::move(jo));
        }
        out << j.dump() << "\n";
    }
    return out.str();
}

}  // namespace blindspot

#include <doctest.h>

#include <cmath>
#include <random>

#include "blindspot/stereo.hpp"

using namespace blindspot;

namespace {

// deterministic speckle texture
Frame textured(int w, int h, unsigned seed) {
    Frame f(w, h);
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> d(0.0, 1.0);
    for (auto& v : f.intensities) v = d(rng);
    return f;
}

Frame shift_left_content(const Frame& src, int d) {
    // right camera image: content appears d px to the left
    Frame out(src.width, src.height);
    for (int y = 0; y < src.height; ++y)
        for (int x = 0; x < src.width; ++x)
            out.at(x, y) = src.at(std::min(x + d, src.width - 1), y);
    return out;
}

DepthFrame depth_with_blob(int w, int h, double value, int bx, int by, int bw, int bh) {
    DepthFrame d(w, h, 1.0);
    for (int y = by; y < by + bh; ++y)
        for (int x = bx; x < bx + bw; ++x) d.at(x, y) = value;
    return d;
}

}  // namespace

TEST_SUITE("stereo") {

TEST_CASE("identical textured frames sit at disparity zero, proxy one") {
    Frame left = textured(48, 32, 1);
    StereoParams p;
    DepthFrame d = compute_disparity(left, left, p);
    for (int y = 8; y < 24; ++y)
        for (int x = 8; x < 40; ++x) CHECK(d.at(x, y) == doctest::Approx(1.0));
}

TEST_CASE("a four pixel shift recovers proxy 0.75") {
    Frame left = textured(96, 48, 2);
    Frame right = shift_left_content(left, 4);
    StereoParams p;  // max_disparity 16
    DepthFrame d = compute_disparity(left, right, p);

    long good = 0, total = 0;
    for (int y = 10; y < 38; ++y)
        for (int x = 24; x < 72; ++x) {
            ++total;
            if (std::fabs(d.at(x, y) - 0.75) < 1e-9) ++good;
        }
    CHECK(static_cast<double>(good) / total > 0.95);
}

TEST_CASE("uniform images are ambiguous and marked farthest") {
    Frame left(48, 32, 0.5);
    Frame right(48, 32, 0.5);
    DepthFrame d = compute_disparity(left, right, {});
    for (double v : d.values) CHECK(v == doctest::Approx(1.0));
}

TEST_CASE("disparity shift law: more shift means nearer") {
    Frame left = textured(96, 48, 3);
    StereoParams p;
    DepthFrame d2 = compute_disparity(left, shift_left_content(left, 2), p);
    DepthFrame d6 = compute_disparity(left, shift_left_content(left, 6), p);

    double mean2 = 0, mean6 = 0;
    long n = 0;
    for (int y = 10; y < 38; ++y)
        for (int x = 24; x < 72; ++x) {
            mean2 += d2.at(x, y);
            mean6 += d6.at(x, y);
            ++n;
        }
    mean2 /= n;
    mean6 /= n;
    CHECK(mean2 - mean6 == doctest::Approx(4.0 / p.max_disparity).epsilon(0.1));
}

TEST_CASE("remove_background") {
    DepthFrame d(4, 2);
    d.values = {1.0, 0.9, 0.3, 0.79, 0.8, 0.0, 0.5, 0.95};
    DepthFrame out = remove_background(d, 0.8);
    CHECK(out.values == std::vector<double>{1.0, 1.0, 0.3, 0.79, 1.0, 0.0, 0.5, 1.0});
}

TEST_CASE("isolate_band is half-open") {
    DepthFrame d = depth_with_blob(32, 32, 0.2, 8, 8, 10, 10);

    SUBCASE("band covers exactly the blob") {
        BinaryMask m = isolate_band(d, 0.0, 0.35);
        long count = 0;
        for (int y = 0; y < 32; ++y)
            for (int x = 0; x < 32; ++x) {
                if (m.at(x, y)) ++count;
                CHECK(static_cast<bool>(m.at(x, y)) ==
                      (x >= 8 && x < 18 && y >= 8 && y < 18));
            }
        CHECK(count == 100);
    }
    SUBCASE("empty band") {
        BinaryMask m = isolate_band(d, 0.4, 0.6);
        for (auto v : m.values) CHECK(v == 0);
    }
    SUBCASE("full band still excludes the sentinel") {
        BinaryMask m = isolate_band(d, 0.0, 1.0);
        long count = 0;
        for (auto v : m.values) count += v;
        CHECK(count == 100);  // background at exactly 1.0 is out
    }
    SUBCASE("inverted bounds throw") {
        CHECK_THROWS_AS(isolate_band(d, 0.5, 0.5), Error);
    }
}

TEST_CASE("count_objects") {
    StereoParams p;
    p.min_blob_area = 50;

    SUBCASE("empty mask") {
        CHECK(count_objects(BinaryMask(32, 32), p) == 0);
    }
    SUBCASE("two disjoint blobs") {
        BinaryMask m(64, 32);
        for (int y = 4; y < 14; ++y)
            for (int x = 4; x < 14; ++x) m.at(x, y) = 1;
        for (int y = 4; y < 14; ++y)
            for (int x = 40; x < 50; ++x) m.at(x, y) = 1;
        CHECK(count_objects(m, p) == 2);
    }
    SUBCASE("a one pixel bridge merges them under 4-connectivity") {
        BinaryMask m(64, 32);
        for (int y = 4; y < 14; ++y) {
            for (int x = 4; x < 14; ++x) m.at(x, y) = 1;
            for (int x = 20; x < 30; ++x) m.at(x, y) = 1;
        }
        for (int x = 14; x < 20; ++x) m.at(x, 9) = 1;
        CHECK(count_objects(m, p) == 1);
    }
    SUBCASE("diagonal touch depends on connectivity") {
        BinaryMask m(40, 40);
        for (int y = 0; y < 10; ++y)
            for (int x = 0; x < 10; ++x) m.at(x, y) = 1;
        for (int y = 10; y < 20; ++y)
            for (int x = 10; x < 20; ++x) m.at(x, y) = 1;
        StereoParams four = p;
        StereoParams eight = p;
        eight.connectivity = 8;
        CHECK(count_objects(m, four) == 2);
        CHECK(count_objects(m, eight) == 1);
    }
    SUBCASE("area filter drops specks") {
        BinaryMask m(32, 32);
        for (int y = 0; y < 7; ++y)
            for (int x = 0; x < 7; ++x) m.at(x, y) = 1;  // 49 px < 50
        CHECK(count_objects(m, p) == 0);
    }
    SUBCASE("translation invariance") {
        std::mt19937 rng(5);
        BinaryMask a(64, 64), b(64, 64);
        for (int y = 10; y < 22; ++y)
            for (int x = 10; x < 22; ++x) {
                a.at(x, y) = 1;
                b.at(x + 20, y + 15) = 1;
            }
        CHECK(count_objects(a, p) == count_objects(b, p));
    }
}

TEST_CASE("alert classification follows the lane bands") {
    StereoParams p;
    LaneBands bands;

    SUBCASE("no blobs: green") {
        AlertResult r = classify_alert(DepthFrame(64, 48, 1.0), bands, p);
        CHECK(r.level == AlertLevel::Green);
        CHECK(r.band_counts == std::array<int, 3>{0, 0, 0});
    }
    SUBCASE("nearest band: red") {
        AlertResult r =
            classify_alert(depth_with_blob(64, 48, 0.2, 10, 10, 12, 12), bands, p);
        CHECK(r.level == AlertLevel::Red);
        CHECK(r.band_counts[0] == 1);
    }
    SUBCASE("middle bands only: yellow") {
        AlertResult r =
            classify_alert(depth_with_blob(64, 48, 0.6, 10, 10, 12, 12), bands, p);
        CHECK(r.level == AlertLevel::Yellow);
        CHECK(r.band_counts[2] == 1);
    }
    SUBCASE("beyond t3 is no alert") {
        AlertResult r =
            classify_alert(depth_with_blob(64, 48, 0.9, 10, 10, 12, 12), bands, p);
        CHECK(r.level == AlertLevel::Green);
    }
    SUBCASE("red dominates whatever else is present") {
        DepthFrame d(96, 48, 1.0);
        for (int y = 10; y < 22; ++y)
            for (int x = 10; x < 22; ++x) d.at(x, y) = 0.2;
        for (int y = 10; y < 22; ++y)
            for (int x = 50; x < 62; ++x) d.at(x, y) = 0.6;
        AlertResult r = classify_alert(d, bands, p);
        CHECK(r.level == AlertLevel::Red);
        CHECK(r.band_counts[0] == 1);
        CHECK(r.band_counts[2] == 1);
    }
}

TEST_CASE("gaussian smoothing of depth") {
    SUBCASE("constant map is unchanged") {
        DepthFrame d(32, 32, 0.4);
        DepthFrame out = smooth_depth(d, 1.5);
        for (double v : out.values) CHECK(v == doctest::Approx(0.4).epsilon(1e-9));
    }
    SUBCASE("spike mass is preserved in the interior") {
        DepthFrame d(33, 33, 0.0);
        d.at(16, 16) = 0.9;
        DepthFrame out = smooth_depth(d, 2.0);
        double mass = 0.0;
        for (double v : out.values) mass += v;
        CHECK(mass == doctest::Approx(0.9).epsilon(1e-6));
    }
    SUBCASE("sentinel pixels do not drag the average") {
        DepthFrame d(32, 32, 1.0);  // all background
        for (int y = 10; y < 20; ++y)
            for (int x = 10; x < 20; ++x) d.at(x, y) = 0.3;
        DepthFrame out = smooth_depth(d, 1.5);
        // deep inside the blob the value stays put instead of drifting to 1.0
        CHECK(out.at(14, 14) == doctest::Approx(0.3).epsilon(1e-6));
        // pure background stays sentinel
        CHECK(out.at(2, 2) == doctest::Approx(1.0));
    }
    SUBCASE("sigma must be positive") {
        CHECK_THROWS_AS(smooth_depth(DepthFrame(8, 8, 0.5), 0.0), Error);
    }
}

TEST_CASE("smoothing stabilizes blob counts on noisy depth") {
    std::mt19937 rng(41);
    std::uniform_real_distribution<double> noise(0.0, 1.0);
    StereoParams p;
    LaneBands bands;

    int flicker_raw = 0, flicker_smooth = 0;
    for (int trial = 0; trial < 10; ++trial) {
        DepthFrame d(64, 48, 1.0);
        for (int y = 14; y < 34; ++y)
            for (int x = 20; x < 44; ++x) d.at(x, y) = 0.25;
        // speckle: 5% of blob pixels knocked out of band
        for (int y = 14; y < 34; ++y)
            for (int x = 20; x < 44; ++x)
                if (noise(rng) < 0.05) d.at(x, y) = 0.6;

        int raw = count_objects(isolate_band(d, 0.0, bands.t1), p);
        int smooth = count_objects(isolate_band(smooth_depth(d, 1.2), 0.0, bands.t1), p);
        if (raw != 1) ++flicker_raw;
        if (smooth != 1) ++flicker_smooth;
    }
    CHECK(flicker_smooth <= flicker_raw);
    CHECK(flicker_smooth == 0);
}

}  // TEST_SUITE

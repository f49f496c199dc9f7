#include <doctest.h>

#include "movo/frontend.hpp"

#include <cmath>
#include <random>

using namespace movo;

namespace {

GrayImage make_image(int w, int h, std::uint8_t fill = 0) {
    GrayImage img;
    img.width = w;
    img.height = h;
    img.data.assign(static_cast<size_t>(w) * h, fill);
    return img;
}

// Independent exhaustive segment-test oracle: for every pixel, check every
// wraparound arc of length >= 9 on the radius-3 circle, then apply the same
// greedy score/row/column NMS the detector documents.
std::vector<Corner> fast_oracle(const GrayImage& img, int threshold, int nms_radius) {
    static const int dx[16] = {0, 1, 2, 3, 3, 3, 2, 1, 0, -1, -2, -3, -3, -3, -2, -1};
    static const int dy[16] = {-3, -3, -2, -1, 0, 1, 2, 3, 3, 3, 2, 1, 0, -1, -2, -3};
    std::vector<Corner> raw;
    for (int y = 3; y < img.height - 3; ++y) {
        for (int x = 3; x < img.width - 3; ++x) {
            const int c = img.at(x, y);
            double best = -1.0;
            for (int polarity = 0; polarity < 2; ++polarity) {
                for (int start = 0; start < 16; ++start) {
                    // Longest arc starting here with all pixels qualifying.
                    int len = 0;
                    double sum = 0.0;
                    while (len < 16) {
                        const int i = (start + len) % 16;
                        const int p = img.at(x + dx[i], y + dy[i]);
                        const bool q = polarity == 0 ? (p > c + threshold) : (p < c - threshold);
                        if (!q) break;
                        sum += std::abs(p - c);
                        ++len;
                    }
                    if (len >= 9) best = std::max(best, sum);
                }
            }
            if (best >= 0.0) raw.push_back({x, y, best});
        }
    }
    std::sort(raw.begin(), raw.end(), [](const Corner& a, const Corner& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.y != b.y) return a.y < b.y;
        return a.x < b.x;
    });
    std::vector<Corner> kept;
    for (const Corner& c : raw) {
        bool near = false;
        for (const Corner& k : kept) {
            const long ddx = c.x - k.x, ddy = c.y - k.y;
            if (ddx * ddx + ddy * ddy <= static_cast<long>(nms_radius) * nms_radius) near = true;
        }
        if (!near) kept.push_back(c);
    }
    return kept;
}

bool same_corners(const std::vector<Corner>& a, const std::vector<Corner>& b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i) {
        if (a[i].x != b[i].x || a[i].y != b[i].y || a[i].score != b[i].score) return false;
    }
    return true;
}

// Smooth random texture: sum of seeded low-frequency sinusoids, so an integer
// shift has no wraparound artifacts and LK has usable gradients everywhere.
double texture_value(double x, double y, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * M_PI);
    std::uniform_real_distribution<double> freq(0.02, 0.12);
    double v = 0.0;
    for (int i = 0; i < 6; ++i) {
        const double fx = freq(rng), fy = freq(rng), p = phase(rng);
        v += std::sin(fx * x + fy * y + p);
    }
    return 127.0 + 20.0 * v;
}

GrayImage textured_image(int w, int h, double shift_x, double shift_y, std::uint64_t seed) {
    GrayImage img = make_image(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            img.at(x, y) = static_cast<std::uint8_t>(
                std::clamp(texture_value(x - shift_x, y - shift_y, seed), 0.0, 255.0));
        }
    }
    return img;
}

}  // namespace

TEST_CASE("fast_detect finds nothing in a constant image") {
    CHECK(fast_detect(make_image(64, 64, 100), 20, 7).empty());
}

TEST_CASE("a 1-pixel dot is a full-circle corner with score 16x255") {
    GrayImage img = make_image(64, 64, 0);
    img.at(30, 30) = 255;
    const auto corners = fast_detect(img, 20, 7);
    CHECK(same_corners(corners, fast_oracle(img, 20, 7)));
    REQUIRE(!corners.empty());
    CHECK(corners[0].x == 30);
    CHECK(corners[0].y == 30);
    CHECK(corners[0].score == 16.0 * 255.0);
}

TEST_CASE("white square on black yields exactly 4 corners at its vertices") {
    GrayImage img = make_image(96, 96, 0);
    for (int y = 30; y < 60; ++y) {
        for (int x = 30; x < 60; ++x) img.at(x, y) = 255;
    }
    const auto corners = fast_detect(img, 20, 7);
    CHECK(same_corners(corners, fast_oracle(img, 20, 7)));
    REQUIRE(corners.size() == 4);
    for (const Corner& c : corners) {
        CHECK((std::abs(c.x - 30) <= 2 || std::abs(c.x - 59) <= 2));
        CHECK((std::abs(c.y - 30) <= 2 || std::abs(c.y - 59) <= 2));
    }
}

TEST_CASE("fast_detect equals the exhaustive oracle on random images") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        std::mt19937_64 rng(seed);
        GrayImage img = make_image(96, 96);
        for (auto& b : img.data) b = static_cast<std::uint8_t>(rng());
        CHECK(same_corners(fast_detect(img, 20, 5), fast_oracle(img, 20, 5)));
    }
}

TEST_CASE("NMS leaves no two corners within the radius") {
    std::mt19937_64 rng(42);
    GrayImage img = make_image(128, 128);
    for (auto& b : img.data) b = static_cast<std::uint8_t>(rng());
    const auto corners = fast_detect(img, 15, 9);
    for (size_t i = 0; i < corners.size(); ++i) {
        for (size_t j = i + 1; j < corners.size(); ++j) {
            const long dx = corners[i].x - corners[j].x;
            const long dy = corners[i].y - corners[j].y;
            CHECK(dx * dx + dy * dy > 81);
        }
    }
}

TEST_CASE("fast_detect is deterministic") {
    std::mt19937_64 rng(9);
    GrayImage img = make_image(80, 80);
    for (auto& b : img.data) b = static_cast<std::uint8_t>(rng());
    CHECK(same_corners(fast_detect(img, 20, 7), fast_detect(img, 20, 7)));
}

TEST_CASE("build_pyramid keeps constant images constant and halves sizes") {
    const PyramidLevels pyr = build_pyramid(make_image(64, 64, 77), 2);
    REQUIRE(pyr.levels.size() == 2);
    CHECK(pyr.levels[1].width == 32);
    CHECK(pyr.levels[1].height == 32);
    for (auto b : pyr.levels[1].data) CHECK(b == 77);
}

TEST_CASE("build_pyramid box filter rounds half up") {
    GrayImage img = make_image(64, 64);
    for (int y = 0; y < 64; ++y) {
        for (int x = 0; x < 64; ++x) img.at(x, y) = ((x + y) % 2 == 0) ? 0 : 255;
    }
    const PyramidLevels pyr = build_pyramid(img, 2);
    // Every 2x2 tile holds {0,255,255,0}: floor(127.5 + 0.5) = 128.
    for (auto b : pyr.levels[1].data) CHECK(b == 128);
}

TEST_CASE("build_pyramid rejects levels that fall below 32x32") {
    CHECK_THROWS_AS(build_pyramid(make_image(48, 48), 2), TooSmall);
}

TEST_CASE("klt_track on identical frames returns the inputs") {
    const GrayImage img = textured_image(128, 128, 0, 0, 5);
    const PyramidLevels pyr = build_pyramid(img, 2);
    std::vector<Point2> pts;
    for (int i = 0; i < 10; ++i) pts.push_back({30.0 + 7 * i, 40.0 + 4 * i});
    const auto tracked = klt_track(pyr, pyr, pts);
    for (size_t i = 0; i < pts.size(); ++i) {
        REQUIRE(tracked[i].ok);
        CHECK(std::hypot(tracked[i].position.u - pts[i].u, tracked[i].position.v - pts[i].v) <
              0.05);
    }
}

TEST_CASE("klt_track recovers an integer shift") {
    const GrayImage a = textured_image(160, 160, 0, 0, 11);
    const GrayImage b = textured_image(160, 160, 3, 0, 11);
    const PyramidLevels pa = build_pyramid(a, 2);
    const PyramidLevels pb = build_pyramid(b, 2);
    std::vector<Point2> pts;
    for (int i = 0; i < 12; ++i) pts.push_back({40.0 + 6 * i, 45.0 + 5 * i});
    const auto tracked = klt_track(pa, pb, pts);
    for (size_t i = 0; i < pts.size(); ++i) {
        REQUIRE(tracked[i].ok);
        CHECK(std::abs(tracked[i].position.u - (pts[i].u + 3.0)) < 0.25);
        CHECK(std::abs(tracked[i].position.v - pts[i].v) < 0.25);
    }
}

TEST_CASE("klt_track flags points on constant regions") {
    const GrayImage img = make_image(96, 96, 50);
    const PyramidLevels pyr = build_pyramid(img, 1);
    const auto tracked = klt_track(pyr, pyr, {{48, 48}});
    CHECK_FALSE(tracked[0].ok);
}

TEST_CASE("match_frames on identical frames matches corners to themselves") {
    std::mt19937_64 rng(3);
    GrayImage img = make_image(128, 128, 10);
    // Sparse bright dots give distinct trackable corners.
    for (int i = 0; i < 60; ++i) {
        const int x = 8 + static_cast<int>(rng() % 112);
        const int y = 8 + static_cast<int>(rng() % 112);
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) img.at(x + dx, y + dy) = 250;
        }
    }
    DetectorConfig cfg;
    cfg.min_features = 100;
    const MatchResult res = match_frames(img, img, {}, 0, cfg);
    CHECK(res.matches.size() >= 8);
    for (const FeatureMatch& m : res.matches) {
        CHECK(std::hypot(m.curr.u - m.prev.u, m.curr.v - m.prev.v) < 0.05);
    }
}

TEST_CASE("match_frames recovers a global shift") {
    auto dotted = [](int shift) {
        std::mt19937_64 rng(77);
        GrayImage img = make_image(160, 160, 10);
        for (int i = 0; i < 70; ++i) {
            const int x = shift + 12 + static_cast<int>(rng() % 130);
            const int y = 12 + static_cast<int>(rng() % 136);
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) img.at(x + dx, y + dy) = 250;
            }
        }
        return img;
    };
    const GrayImage a = dotted(0);
    const GrayImage b = dotted(3);
    DetectorConfig cfg;
    cfg.min_features = 200;
    const MatchResult res = match_frames(a, b, {}, 0, cfg);
    CHECK(res.matches.size() >= 8);
    for (const FeatureMatch& m : res.matches) {
        CHECK(std::abs(m.curr.u - m.prev.u - 3.0) < 0.3);
        CHECK(std::abs(m.curr.v - m.prev.v) < 0.3);
    }
}

TEST_CASE("match_frames throws on blank frames") {
    const GrayImage blank = make_image(64, 64, 128);
    CHECK_THROWS_AS(match_frames(blank, blank, {}, 0, DetectorConfig{}), InsufficientFeatures);
}

#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "gal/evidence.hpp"
#include "gal/lines.hpp"

using namespace gal;

namespace {

Raster solid(int w, int h, double v) {
    Raster img(w, h, 3, 0.0);
    for (auto& d : img.data) d = v;
    return img;
}

void draw_segment(Raster& img, double x1, double y1, double x2, double y2, double v,
                  int thickness = 1) {
    bresenham(static_cast<int>(x1), static_cast<int>(y1), static_cast<int>(x2),
              static_cast<int>(y2), [&](int x, int y) {
                  for (int dy = -thickness; dy <= thickness; ++dy)
                      for (int dx = -thickness; dx <= thickness; ++dx) {
                          int xx = x + dx, yy = y + dy;
                          if (xx < 0 || yy < 0 || xx >= img.width || yy >= img.height) continue;
                          for (int c = 0; c < 3; ++c) img.at(xx, yy, c) = v;
                      }
              });
}

}  // namespace

TEST_CASE("detect_segments finds a vertical step edge", "[lineworks]") {
    Raster img(64, 64, 3);
    for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 64; ++x)
            for (int c = 0; c < 3; ++c) img.at(x, y, c) = x < 32 ? 0.0 : 1.0;
    auto segs = detect_segments(img);
    REQUIRE(segs.size() == 1);
    CHECK(std::abs(segs[0].angle - 90.0) <= 1.0);
    CHECK(segs[0].length >= 50.0);
    CHECK(std::abs(segs[0].mid_x() - 31.5) <= 2.0);
}

TEST_CASE("detect_segments on uniform image is empty", "[lineworks]") {
    CHECK(detect_segments(solid(48, 48, 0.5)).empty());
}

TEST_CASE("detect_segments recalls a drawn wireframe", "[lineworks]") {
    Raster img = solid(128, 128, 0.9);
    struct Truth {
        double x1, y1, x2, y2;
    };
    std::vector<Truth> truth = {
        {10, 10, 60, 10}, {100, 20, 100, 70}, {20, 40, 55, 75},
        {70, 90, 120, 90}, {30, 118, 70, 100},
    };
    for (const auto& t : truth) draw_segment(img, t.x1, t.y1, t.x2, t.y2, 0.1);
    auto segs = detect_segments(img);
    int matched = 0;
    for (const auto& t : truth) {
        bool found = false;
        for (const auto& s : segs) {
            double direct = std::max(std::hypot(s.x1 - t.x1, s.y1 - t.y1),
                                     std::hypot(s.x2 - t.x2, s.y2 - t.y2));
            double swapped = std::max(std::hypot(s.x1 - t.x2, s.y1 - t.y2),
                                      std::hypot(s.x2 - t.x1, s.y2 - t.y1));
            if (std::min(direct, swapped) <= 3.0) {
                found = true;
                break;
            }
        }
        if (found) ++matched;
    }
    CHECK(matched >= 4);
}

TEST_CASE("segment angle is invariant to endpoint order", "[lineworks]") {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> u(0.0, 100.0);
    for (int it = 0; it < 200; ++it) {
        double x1 = u(rng), y1 = u(rng), x2 = u(rng), y2 = u(rng);
        if (x1 == x2 && y1 == y2) continue;
        CHECK(segment_angle_deg(x1, y1, x2, y2) ==
              Catch::Approx(segment_angle_deg(x2, y2, x1, y1)).margin(1e-9));
    }
}

TEST_CASE("edge_probability of uniform image is zero", "[lineworks]") {
    Raster e = edge_probability(solid(32, 32, 0.7));
    for (double v : e.data) CHECK(v == 0.0);
}

TEST_CASE("edge_probability of an ideal step is a unit ridge", "[lineworks]") {
    Raster img(64, 64, 3);
    for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 64; ++x)
            for (int c = 0; c < 3; ++c) img.at(x, y, c) = x < 32 ? 0.0 : 1.0;
    Raster e = edge_probability(img);
    for (int y = 2; y < 62; ++y) {
        double ridge = 0;
        for (int x = 29; x <= 34; ++x) ridge = std::max(ridge, e.at(x, y));
        CHECK(ridge == 1.0);
        for (int x = 0; x < 64; ++x)
            if (std::abs(x - 31.5) > 4.0) CHECK(e.at(x, y) == 0.0);
    }
}

TEST_CASE("edge_probability stays in [0,1] on random images", "[lineworks]") {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int it = 0; it < 20; ++it) {
        Raster img(24, 24, 3);
        for (auto& v : img.data) v = u(rng);
        Raster e = edge_probability(img);
        for (double v : e.data) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
}

TEST_CASE("defocus_map of uniform image is zero", "[lineworks]") {
    Raster d = defocus_map(solid(40, 40, 0.3));
    for (double v : d.data) CHECK(v == 0.0);
}

TEST_CASE("defocus_map is quiet on a globally sharp scene", "[lineworks]") {
    Raster img(96, 96, 3);
    for (int y = 0; y < 96; ++y)
        for (int x = 0; x < 96; ++x) {
            double v = ((x / 12 + y / 12) % 2 == 0) ? 0.15 : 0.85;
            for (int c = 0; c < 3; ++c) img.at(x, y, c) = v;
        }
    Raster d = defocus_map(img);
    double mx = 0;
    for (double v : d.data) mx = std::max(mx, v);
    CHECK(mx < 0.2);
}

TEST_CASE("defocus_map ridge sits at a sharp/blurred divide", "[lineworks]") {
    const int W = 96, H = 96, divide = 48;
    Raster sharp(W, H, 3);
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
            double v = ((x / 12 + y / 12) % 2 == 0) ? 0.0 : 1.0;
            for (int c = 0; c < 3; ++c) sharp.at(x, y, c) = v;
        }
    Raster blurred = gaussian_blur(sharp, 3.0);
    Raster img = sharp;
    for (int y = divide; y < H; ++y)
        for (int x = 0; x < W; ++x)
            for (int c = 0; c < 3; ++c) img.at(x, y, c) = blurred.at(x, y, c);
    Raster d = defocus_map(img);
    // strongest response row should be the divide
    int best_row = 0;
    double best = -1;
    for (int y = 0; y < H; ++y) {
        double s = 0;
        for (int x = 0; x < W; ++x) s += d.at(x, y);
        if (s > best) {
            best = s;
            best_row = y;
        }
    }
    CHECK(std::abs(best_row - divide) <= 4);
}

TEST_CASE("rasterized line map matches segments exactly", "[lineworks]") {
    Raster img = solid(64, 64, 0.9);
    draw_segment(img, 8, 8, 55, 8, 0.1);
    draw_segment(img, 20, 15, 20, 60, 0.1);
    auto segs = detect_segments(img);
    EvidenceMaps ev = build_evidence(img, segs);
    Raster expected = rasterize_segments(segs, 64, 64);
    CHECK(ev.line_map.data == expected.data);
    for (double v : ev.line_map.data) CHECK((v == 0.0 || v == 1.0));
}

TEST_CASE("vertical_line_score basics", "[lineworks]") {
    std::vector<int> region;
    for (int y = 20; y < 120; ++y)
        for (int x = 20; x < 120; ++x) region.push_back(y * 200 + x);

    CHECK(vertical_line_score({}, region, 200) == 0.0);
    CHECK_THROWS_AS(vertical_line_score({}, {}, 200), ParamError);

    // fully striped with vertical lines: saturates at 1
    std::vector<LineSegment> stripes;
    for (int x = 20; x < 120; x += 4) {
        LineSegment s;
        s.x1 = x;
        s.y1 = 20;
        s.x2 = x;
        s.y2 = 119;
        s.length = 99;
        s.angle = 90;
        stripes.push_back(s);
    }
    CHECK(vertical_line_score(stripes, region, 200) == 1.0);

    // non-vertical segments do not count
    LineSegment h;
    h.x1 = 30;
    h.y1 = 50;
    h.x2 = 100;
    h.y2 = 50;
    h.length = 70;
    h.angle = 0;
    CHECK(vertical_line_score({h}, region, 200) == 0.0);
}

TEST_CASE("vertical_line_score is monotone and translation invariant", "[lineworks]") {
    std::vector<int> region;
    for (int y = 10; y < 60; ++y)
        for (int x = 10; x < 60; ++x) region.push_back(y * 100 + x);
    std::vector<LineSegment> segs;
    double prev = 0.0;
    for (int k = 0; k < 8; ++k) {
        LineSegment s;
        s.x1 = 12 + 5 * k;
        s.y1 = 15;
        s.x2 = 12 + 5 * k;
        s.y2 = 35;
        s.length = 20;
        s.angle = 90;
        segs.push_back(s);
        double score = vertical_line_score(segs, region, 100);
        CHECK(score >= prev);
        prev = score;
    }
    // shift region and segments together by (30, 20)
    std::vector<int> region2;
    for (int y = 30; y < 80; ++y)
        for (int x = 40; x < 90; ++x) region2.push_back(y * 100 + x);
    std::vector<LineSegment> segs2 = segs;
    for (auto& s : segs2) {
        s.x1 += 30;
        s.x2 += 30;
        s.y1 += 20;
        s.y2 += 20;
    }
    CHECK(vertical_line_score(segs2, region2, 100) == Catch::Approx(prev));
}

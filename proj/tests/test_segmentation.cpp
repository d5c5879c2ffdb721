#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <set>

#include "gal/segmentation.hpp"

using namespace gal;

namespace {

Raster uniform_image(int w, int h, double r, double g, double b) {
    Raster img(w, h, 3);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            img.at(x, y, 0) = r;
            img.at(x, y, 1) = g;
            img.at(x, y, 2) = b;
        }
    return img;
}

// partitions equal up to a relabeling?
bool same_partition(const Segmentation& a, const Segmentation& b) {
    if (a.ids.size() != b.ids.size()) return false;
    std::map<int, int> fwd, bwd;
    for (size_t p = 0; p < a.ids.size(); ++p) {
        auto [itf, newf] = fwd.try_emplace(a.ids[p], b.ids[p]);
        if (itf->second != b.ids[p]) return false;
        auto [itb, newb] = bwd.try_emplace(b.ids[p], a.ids[p]);
        if (itb->second != a.ids[p]) return false;
    }
    return true;
}

Segmentation random_segmentation(std::mt19937& rng, int w, int h, int blobs) {
    // random key grid, then connected components: a valid segmentation
    std::uniform_int_distribution<int> key(0, blobs - 1);
    std::vector<int> keys(static_cast<size_t>(w) * h);
    for (auto& k : keys) k = key(rng);
    Segmentation s;
    s.width = w;
    s.height = h;
    s.n_segments = connected_components(keys, w, h, s.ids);
    s.method = "random";
    s.validate();
    return s;
}

}  // namespace

TEST_CASE("slic uniform image degenerates to a near-square grid", "[segmentation]") {
    Raster img = uniform_image(64, 64, 0.5, 0.5, 0.5);
    Segmentation seg = slic(img, 16, 10.0);
    REQUIRE(seg.n_segments == 16);
    std::vector<int> area(seg.n_segments, 0);
    for (int id : seg.ids) ++area[id];
    for (int a : area) {
        CHECK(a >= 256 * 0.7);
        CHECK(a <= 256 * 1.3);
    }
}

TEST_CASE("slic respects a two-tone boundary", "[segmentation]") {
    Raster img(64, 32, 3);
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 64; ++x)
            for (int c = 0; c < 3; ++c) img.at(x, y, c) = x < 32 ? 0.1 : 0.9;
    Segmentation seg = slic(img, 2, 10.0);
    REQUIRE(seg.n_segments == 2);
    int left_id = seg.at(0, 0), right_id = seg.at(63, 0);
    REQUIRE(left_id != right_id);
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 64; ++x) {
            if (std::abs(x - 32) <= 1) continue;  // 1 px slack at the boundary
            CHECK(seg.at(x, y) == (x < 32 ? left_id : right_id));
        }
}

TEST_CASE("slic parameter validation", "[segmentation]") {
    Raster img = uniform_image(8, 8, 0.5, 0.5, 0.5);
    CHECK_THROWS_AS(slic(img, 0, 10.0), ParamError);
    CHECK_THROWS_AS(slic(img, 65, 10.0), ParamError);
    CHECK_THROWS_AS(slic(img, 4, 0.0), ParamError);
    Raster gray(8, 8, 1);
    CHECK_THROWS_AS(slic(gray, 4, 10.0), ParamError);
}

TEST_CASE("slic output always satisfies segmentation invariants", "[segmentation]") {
    std::mt19937 rng(21);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int it = 0; it < 5; ++it) {
        Raster img(40, 30, 3);
        for (auto& v : img.data) v = u(rng);
        Segmentation seg = slic(img, 20, 10.0);
        CHECK_NOTHROW(seg.validate());
        CHECK(seg.n_segments >= 10);
        CHECK(seg.n_segments <= 30);
    }
}

TEST_CASE("graph_segment recovers piecewise-constant regions exactly", "[segmentation]") {
    Raster img(30, 24, 3);
    for (int y = 0; y < 24; ++y)
        for (int x = 0; x < 30; ++x) {
            double tone = x < 10 ? 0.1 : x < 20 ? 0.5 : 0.9;
            for (int c = 0; c < 3; ++c) img.at(x, y, c) = tone;
        }
    Segmentation seg = graph_segment(img, 100.0, 40);
    REQUIRE(seg.n_segments == 3);
    for (int y = 0; y < 24; ++y)
        for (int x = 0; x < 30; ++x) {
            int want = x < 10 ? seg.at(0, 0) : x < 20 ? seg.at(10, 0) : seg.at(20, 0);
            CHECK(seg.at(x, y) == want);
        }
}

TEST_CASE("graph_segment count decreases as scale grows", "[segmentation]") {
    std::mt19937 rng(33);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Raster img(48, 48, 3);
    for (auto& v : img.data) v = u(rng);
    int prev = std::numeric_limits<int>::max();
    for (double k : {10.0, 50.0, 100.0, 200.0, 400.0, 800.0}) {
        int n = graph_segment(img, k, 1).n_segments;
        CHECK(n <= prev);
        prev = n;
    }
}

TEST_CASE("graph_segment min_size forces a single segment", "[segmentation]") {
    std::mt19937 rng(34);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Raster img(16, 16, 3);
    for (auto& v : img.data) v = u(rng);
    CHECK(graph_segment(img, 10.0, 256).n_segments == 1);
    CHECK_THROWS_AS(graph_segment(img, 0.0, 10), ParamError);
    CHECK_THROWS_AS(graph_segment(img, 10.0, 0), ParamError);
}

TEST_CASE("intersect of identical inputs is the identity", "[segmentation]") {
    std::mt19937 rng(55);
    Segmentation a = random_segmentation(rng, 20, 15, 5);
    Segmentation out = intersect_segmentations({a, a});
    CHECK(same_partition(a, out));
}

TEST_CASE("intersect of crossed splits yields quadrants", "[segmentation]") {
    Segmentation h, v;
    h.width = v.width = 4;
    h.height = v.height = 4;
    h.n_segments = v.n_segments = 2;
    h.ids.resize(16);
    v.ids.resize(16);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) {
            h.ids[y * 4 + x] = x < 2 ? 0 : 1;
            v.ids[y * 4 + x] = y < 2 ? 0 : 1;
        }
    Segmentation out = intersect_segmentations({h, v});
    CHECK(out.n_segments == 4);
    std::set<int> corner_ids = {out.at(0, 0), out.at(3, 0), out.at(0, 3), out.at(3, 3)};
    CHECK(corner_ids.size() == 4);
}

TEST_CASE("intersect properties over random inputs", "[segmentation]") {
    std::mt19937 rng(77);
    for (int it = 0; it < 100; ++it) {
        Segmentation a = random_segmentation(rng, 16, 12, 4);
        Segmentation b = random_segmentation(rng, 16, 12, 4);
        Segmentation ab = intersect_segmentations({a, b});
        CHECK(ab.n_segments >= std::max(a.n_segments, b.n_segments));
        // idempotent on its own output
        CHECK(same_partition(ab, intersect_segmentations({ab, ab})));
        // associative up to id permutation
        Segmentation c = random_segmentation(rng, 16, 12, 3);
        CHECK(same_partition(intersect_segmentations({ab, c}),
                             intersect_segmentations({a, intersect_segmentations({b, c})})));
    }
    Segmentation a = random_segmentation(rng, 16, 12, 4);
    Segmentation wrong = random_segmentation(rng, 12, 16, 4);
    CHECK_THROWS_AS(intersect_segmentations({a, wrong}), ParamError);
}

TEST_CASE("build_graph smallest case", "[segmentation]") {
    Segmentation s;
    s.width = 2;
    s.height = 1;
    s.n_segments = 2;
    s.ids = {0, 1};
    SegmentGraph g = build_graph(s);
    REQUIRE(g.edges.size() == 1);
    CHECK(g.edges[0].i == 0);
    CHECK(g.edges[0].j == 1);
    REQUIRE(g.edges[0].boundary.size() == 1);
    CHECK(g.edges[0].boundary[0] == std::pair<int, int>{0, 1});
    CHECK(g.nodes[0].area == 1);
    CHECK(g.nodes[0].cx == 0.0);
}

TEST_CASE("build_graph quadrants have no diagonal adjacency", "[segmentation]") {
    Segmentation s;
    s.width = 4;
    s.height = 4;
    s.n_segments = 4;
    s.ids.resize(16);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) s.ids[y * 4 + x] = (y < 2 ? 0 : 2) + (x < 2 ? 0 : 1);
    SegmentGraph g = build_graph(s);
    CHECK(g.edges.size() == 4);
    for (const auto& e : g.edges) CHECK_FALSE((e.i == 0 && e.j == 3));
    for (const auto& e : g.edges) CHECK_FALSE((e.i == 1 && e.j == 2));
}

TEST_CASE("build_graph boundary lengths match a brute-force pixel scan", "[segmentation]") {
    std::mt19937 rng(91);
    for (int it = 0; it < 10; ++it) {
        Segmentation s = random_segmentation(rng, 32, 32, 6);
        SegmentGraph g = build_graph(s);
        // oracle: count 4-adjacent pixel pairs with differing ids
        size_t expected = 0;
        for (int y = 0; y < 32; ++y)
            for (int x = 0; x < 32; ++x) {
                if (x + 1 < 32 && s.at(x, y) != s.at(x + 1, y)) ++expected;
                if (y + 1 < 32 && s.at(x, y) != s.at(x, y + 1)) ++expected;
            }
        size_t total = 0;
        for (const auto& e : g.edges) total += e.boundary.size();
        CHECK(total == expected);
        // edge list sorted, unique, i<j, non-empty boundaries
        for (size_t k = 0; k < g.edges.size(); ++k) {
            CHECK(g.edges[k].i < g.edges[k].j);
            CHECK_FALSE(g.edges[k].boundary.empty());
            if (k > 0)
                CHECK(std::pair{g.edges[k - 1].i, g.edges[k - 1].j} <
                      std::pair{g.edges[k].i, g.edges[k].j});
        }
        // oracle: edge set matches brute-force adjacency on the id map
        std::set<std::pair<int, int>> expected_edges;
        for (int y = 0; y < 32; ++y)
            for (int x = 0; x < 32; ++x) {
                if (x + 1 < 32 && s.at(x, y) != s.at(x + 1, y))
                    expected_edges.insert({std::min(s.at(x, y), s.at(x + 1, y)),
                                           std::max(s.at(x, y), s.at(x + 1, y))});
                if (y + 1 < 32 && s.at(x, y) != s.at(x, y + 1))
                    expected_edges.insert({std::min(s.at(x, y), s.at(x, y + 1)),
                                           std::max(s.at(x, y), s.at(x, y + 1))});
            }
        std::set<std::pair<int, int>> got;
        for (const auto& e : g.edges) got.insert({e.i, e.j});
        CHECK(got == expected_edges);
    }
}

#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <random>

#include "gal/gmm.hpp"
#include "gal/ipl.hpp"

using namespace gal;

namespace {

SegmentGraph single_segment_graph(int w, int h) {
    Segmentation s;
    s.width = w;
    s.height = h;
    s.n_segments = 1;
    s.ids.assign(static_cast<size_t>(w) * h, 0);
    return build_graph(s);
}

}  // namespace

TEST_CASE("extract_features on a uniform full-image segment", "[ipl]") {
    Raster img(10, 10, 3);
    for (int y = 0; y < 10; ++y)
        for (int x = 0; x < 10; ++x) {
            img.at(x, y, 0) = 0.2;
            img.at(x, y, 1) = 0.4;
            img.at(x, y, 2) = 0.6;
        }
    auto f = extract_features(img, single_segment_graph(10, 10));
    REQUIRE(f.size() == 1);
    CHECK(f[0][0] == Catch::Approx(0.2));
    CHECK(f[0][1] == Catch::Approx(0.4));
    CHECK(f[0][2] == Catch::Approx(0.6));
    for (int c = 0; c < 3; ++c) CHECK(f[0][3 + c] == Catch::Approx(0.0).margin(1e-12));
    for (int b = 0; b < 8; ++b) CHECK(f[0][9 + b] == Catch::Approx(1.0 / 8.0));  // zero gradient
    CHECK(f[0][17] == Catch::Approx(0.0).margin(1e-12));
    CHECK(f[0][18] == 1.0);  // area fraction
}

TEST_CASE("extract_features centroid of the top-left pixel", "[ipl]") {
    Raster img(10, 10, 3, 0.5);
    Segmentation s;
    s.width = 10;
    s.height = 10;
    s.n_segments = 2;
    s.ids.assign(100, 1);
    s.ids[0] = 0;
    auto f = extract_features(img, build_graph(s));
    CHECK(f[0][6] == Catch::Approx(0.05));
    CHECK(f[0][7] == Catch::Approx(0.05));
    CHECK(f[0][18] == Catch::Approx(0.01));
}

TEST_CASE("train_forest separates a linearly separable toy set", "[ipl]") {
    std::mt19937 rng(31);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<std::vector<double>> x;
    std::vector<int> y;
    for (int i = 0; i < 200; ++i) {
        double a = u(rng), b = u(rng);
        x.push_back({a, b, u(rng)});
        y.push_back(a + b > 1.0 ? 1 : 0);
    }
    ForestModel m = train_forest(x, y, 2, 20, 8, 7);
    int correct = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        auto p = predict_forest(m, x[i]);
        if ((p[1] > p[0]) == (y[i] == 1)) ++correct;
    }
    CHECK(correct >= 190);
}

TEST_CASE("train_forest memorizes a single sample and validates params", "[ipl]") {
    std::vector<std::vector<double>> x = {{0.3, 0.7}};
    std::vector<int> y = {2};
    ForestModel m = train_forest(x, y, 3, 5, 4, 1);
    auto p = predict_forest(m, x[0]);
    CHECK(p[2] == 1.0);
    CHECK_THROWS_AS(train_forest(x, y, 3, 0, 4, 1), ParamError);
    CHECK_THROWS_AS(train_forest({}, {}, 3, 5, 4, 1), ParamError);
    CHECK_THROWS_AS(predict_forest(m, {0.1}), ParamError);
}

TEST_CASE("train_forest is reproducible under a fixed seed", "[ipl]") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<std::vector<double>> x;
    std::vector<int> y;
    for (int i = 0; i < 60; ++i) {
        x.push_back({u(rng), u(rng), u(rng), u(rng)});
        y.push_back(static_cast<int>(rng() % 3));
    }
    ForestModel a = train_forest(x, y, 3, 8, 6, 42);
    ForestModel b = train_forest(x, y, 3, 8, 6, 42);
    std::uniform_real_distribution<double> q(0.0, 1.0);
    for (int i = 0; i < 50; ++i) {
        std::vector<double> f = {q(rng), q(rng), q(rng), q(rng)};
        CHECK(predict_forest(a, f) == predict_forest(b, f));
    }
}

TEST_CASE("predict_forest averages leaf histograms", "[ipl]") {
    ForestModel m;
    m.n_classes = 3;
    m.n_features = 1;
    ForestModel::Tree t1, t2;
    t1.nodes.push_back({-1, 0, -1, -1, {1, 0, 0}});
    t2.nodes.push_back({-1, 0, -1, -1, {0, 1, 0}});
    m.trees = {t1, t2};
    auto p = predict_forest(m, {0.5});
    CHECK(p == std::vector<double>{0.5, 0.5, 0.0});

    m.trees = {t1, t1};
    CHECK(predict_forest(m, {0.5}) == std::vector<double>{1.0, 0.0, 0.0});
}

TEST_CASE("predict_forest output sums to 1 over random inputs", "[ipl]") {
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<std::vector<double>> x;
    std::vector<int> y;
    for (int i = 0; i < 100; ++i) {
        x.push_back({u(rng), u(rng), u(rng)});
        y.push_back(static_cast<int>(rng() % 3));
    }
    ForestModel m = train_forest(x, y, 3, 10, 7, 3);
    for (int i = 0; i < 1000; ++i) {
        auto p = predict_forest(m, {u(rng), u(rng), u(rng)});
        double s = 0;
        for (double v : p) s += v;
        CHECK(s == Catch::Approx(1.0).margin(1e-9));
    }
}

TEST_CASE("fuse_stage2 preserves unanimity under identity-like weights", "[ipl]") {
    FusionModel m;
    for (int c = 0; c < 3; ++c)
        for (int s = 0; s < 3; ++s) m.w[c][s * 3 + c] = 5.0;  // each source votes its class
    std::array<double, 9> sky_votes = {0, 0, 1, 0, 0, 1, 0, 0, 1};
    auto p = fuse_stage2(sky_votes, m);
    CHECK(p[kSky3] > 0.9);
}

TEST_CASE("fuse_stage2 of the zero model is uniform", "[ipl]") {
    FusionModel zero;
    std::array<double, 9> any = {0.9, 0.05, 0.05, 0.2, 0.5, 0.3, 0.1, 0.1, 0.8};
    auto p = fuse_stage2(any, zero);
    for (double v : p) CHECK(v == Catch::Approx(1.0 / 3.0));
}

TEST_CASE("train_fusion learns a dominant source", "[ipl]") {
    std::mt19937 rng(13);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<std::array<double, 9>> x;
    std::vector<int> y;
    for (int i = 0; i < 300; ++i) {
        int label = static_cast<int>(rng() % 3);
        std::array<double, 9> row{};
        for (int s = 0; s < 3; ++s) {
            // source 0 is informative, sources 1-2 are noise
            std::array<double, 3> p{};
            double sum = 0;
            for (int c = 0; c < 3; ++c) {
                p[c] = u(rng) + (s == 0 && c == label ? 2.0 : 0.0);
                sum += p[c];
            }
            for (int c = 0; c < 3; ++c) row[s * 3 + c] = p[c] / sum;
        }
        x.push_back(row);
        y.push_back(label);
    }
    FusionModel m = train_fusion(x, y);
    int correct = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        auto p = fuse_stage2(x[i], m);
        int arg = static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
        if (arg == y[i]) ++correct;
    }
    CHECK(correct >= 270);
}

TEST_CASE("assemble_initial routes mass correctly", "[ipl]") {
    std::array<double, 5> uniform5 = {0.2, 0.2, 0.2, 0.2, 0.2};
    ClassDistribution support = assemble_initial({1, 0, 0}, uniform5);
    CHECK(support.p == std::array<double, 7>{1, 0, 0, 0, 0, 0, 0});

    ClassDistribution vertical = assemble_initial({0, 1, 0}, uniform5);
    CHECK(vertical.p[0] == 0.0);
    CHECK(vertical.p[6] == 0.0);
    for (int v = 1; v <= 5; ++v) CHECK(vertical.p[v] == Catch::Approx(0.2));

    CHECK_THROWS_AS(assemble_initial({0, 1, 0}, {0.5, 0.5, 0.5, 0, 0}), ParamError);
}

TEST_CASE("assemble_initial preserves mass over random simplex points", "[ipl]") {
    std::mt19937 rng(23);
    std::exponential_distribution<double> e(1.0);
    for (int it = 0; it < 500; ++it) {
        std::array<double, 3> p3{};
        double s3 = 0;
        for (auto& v : p3) {
            v = e(rng);
            s3 += v;
        }
        for (auto& v : p3) v /= s3;
        std::array<double, 5> v5{};
        double s5 = 0;
        for (auto& v : v5) {
            v = e(rng);
            s5 += v;
        }
        for (auto& v : v5) v /= s5;
        ClassDistribution d = assemble_initial(p3, v5);
        CHECK(d.sum() == Catch::Approx(1.0).margin(1e-6));
        // no mass crosses between {support, sky} and the vertical block
        CHECK(d.p[0] == Catch::Approx(p3[0]).margin(1e-12));
        CHECK(d.p[6] == Catch::Approx(p3[2]).margin(1e-12));
        double vertical_mass = d.p[1] + d.p[2] + d.p[3] + d.p[4] + d.p[5];
        CHECK(vertical_mass == Catch::Approx(p3[1]).margin(1e-9));
    }
}

TEST_CASE("vertical prob file roundtrip and validation", "[ipl]") {
    std::vector<std::array<double, 5>> rows = {{0.2, 0.2, 0.2, 0.2, 0.2},
                                               {1, 0, 0, 0, 0},
                                               {0, 0.5, 0.5, 0, 0}};
    auto path = (std::filesystem::temp_directory_path() / "gal_vprobs.txt").string();
    write_vertical_probs(rows, path);
    auto back = read_vertical_probs(path, 3);
    for (int i = 0; i < 3; ++i)
        for (int v = 0; v < 5; ++v) CHECK(back[i][v] == Catch::Approx(rows[i][v]));
    CHECK_THROWS_AS(read_vertical_probs(path, 5), FormatError);  // missing rows
}

TEST_CASE("fit_gmm recovers separated color clusters", "[ipl]") {
    std::mt19937 rng(41);
    std::normal_distribution<double> n1(0.2, 0.03), n2(0.8, 0.03);
    std::vector<std::array<double, 3>> pts;
    for (int i = 0; i < 300; ++i) {
        pts.push_back({n1(rng), n1(rng), n1(rng)});
        pts.push_back({n2(rng), n2(rng), n2(rng)});
    }
    GmmModel m = fit_gmm(pts, 2);
    REQUIRE(m.components.size() == 2);
    m.validate();
    std::array<double, 3> lo = {0.2, 0.2, 0.2}, hi = {0.8, 0.8, 0.8};
    CHECK(m.pdf(lo) > 10.0 * m.pdf({0.5, 0.5, 0.5}));
    CHECK(m.pdf(hi) > 10.0 * m.pdf({0.5, 0.5, 0.5}));
    CHECK_THROWS_AS(fit_gmm({}, 2), ParamError);
}

#ifndef GAL_SYNTH_HPP
#define GAL_SYNTH_HPP

#include <filesystem>
#include <random>

#include "gal/gav.hpp"
#include "gal/grabcut.hpp"

namespace gal {

enum class SceneKind { HorizonOnly, FrontoBuilding, CornerBuilding, Alley, Occluded };

inline const char* scene_kind_name(SceneKind k) {
    switch (k) {
        case SceneKind::HorizonOnly: return "horizon-only";
        case SceneKind::FrontoBuilding: return "fronto-building";
        case SceneKind::CornerBuilding: return "corner-building";
        case SceneKind::Alley: return "alley";
        case SceneKind::Occluded: return "occluded";
    }
    return "?";
}

inline SceneKind scene_kind_from_name(const std::string& name) {
    for (SceneKind k : {SceneKind::HorizonOnly, SceneKind::FrontoBuilding,
                        SceneKind::CornerBuilding, SceneKind::Alley, SceneKind::Occluded})
        if (name == scene_kind_name(k)) return k;
    throw ParamError("unknown scene kind: " + name);
}

// What the generator knows to be true about a rendered scene.
struct GavTruth {
    std::array<int, 7> flags{};
    double horizon_y = -1;
    std::vector<int> orientations;  // facade orientations, left to right
};

struct SyntheticScene {
    SceneKind kind = SceneKind::HorizonOnly;
    Raster image;
    LabelMap truth;
    std::vector<Box> boxes;
    GavTruth gav;
};

namespace detail {

struct Painter {
    Raster& img;
    LabelMap& truth;

    void set(int x, int y, std::array<double, 3> c, int label) {
        if (x < 0 || y < 0 || x >= img.width || y >= img.height) return;
        for (int ch = 0; ch < 3; ++ch) img.at(x, y, ch) = std::clamp(c[ch], 0.0, 1.0);
        truth.at(x, y) = static_cast<uint8_t>(label);
    }
    void paint_only(int x, int y, std::array<double, 3> c) {
        if (x < 0 || y < 0 || x >= img.width || y >= img.height) return;
        for (int ch = 0; ch < 3; ++ch) img.at(x, y, ch) = std::clamp(c[ch], 0.0, 1.0);
    }
};

inline std::array<double, 3> jitter(std::array<double, 3> c, std::mt19937& rng, double amt) {
    std::uniform_real_distribution<double> u(-amt, amt);
    double d = u(rng);
    for (auto& v : c) v = std::clamp(v + d, 0.0, 1.0);
    return c;
}

inline std::array<double, 3> pick_sky(std::mt19937& rng) {
    static const std::array<double, 3> bases[3] = {
        {0.55, 0.75, 0.95}, {0.70, 0.82, 0.95}, {0.62, 0.70, 0.88}};
    return jitter(bases[rng() % 3], rng, 0.05);
}
inline std::array<double, 3> pick_support(std::mt19937& rng) {
    static const std::array<double, 3> bases[3] = {
        {0.45, 0.42, 0.38}, {0.35, 0.48, 0.28}, {0.62, 0.54, 0.40}};
    return jitter(bases[rng() % 3], rng, 0.05);
}
inline std::array<double, 3> pick_facade(std::mt19937& rng) {
    static const std::array<double, 3> bases[4] = {
        {0.50, 0.32, 0.26}, {0.55, 0.48, 0.38}, {0.34, 0.38, 0.44}, {0.46, 0.40, 0.30}};
    return jitter(bases[rng() % 4], rng, 0.05);
}
inline std::array<double, 3> pick_solid(std::mt19937& rng) {
    static const std::array<double, 3> bases[3] = {
        {0.70, 0.15, 0.15}, {0.16, 0.18, 0.30}, {0.75, 0.45, 0.10}};
    return jitter(bases[rng() % 3], rng, 0.03);
}

inline void add_noise(Raster& img, std::mt19937& rng, double sigma) {
    std::normal_distribution<double> n(0.0, sigma);
    for (auto& v : img.data) v = std::clamp(v + n(rng), 0.0, 1.0);
}

// windows on a facade whose horizontal edges run through the vanishing
// point; vertical edges stay vertical
inline void draw_windows(Painter& p, std::mt19937& rng, int x_lo, int x_hi,
                         const std::function<double(double)>& top,
                         const std::function<double(double)>& bottom, double vx, double vy,
                         int label) {
    std::array<double, 3> frame = {0.13, 0.15, 0.18};
    int n_cols = 2 + static_cast<int>(rng() % 3);
    int n_rows = 2 + static_cast<int>(rng() % 2);
    double xc = 0.5 * (x_lo + x_hi);  // anchor column for band fractions
    double t0 = top(xc), b0 = bottom(xc);
    for (int wr = 0; wr < n_rows; ++wr) {
        // window band as fractions of the facade height at the anchor
        double f0 = 0.15 + 0.8 * wr / n_rows;
        double f1 = f0 + 0.5 / n_rows;
        double ya = t0 + f0 * (b0 - t0);
        double yb = t0 + f1 * (b0 - t0);
        for (int wc = 0; wc < n_cols; ++wc) {
            double g0 = 0.1 + 0.85 * wc / n_cols;
            double g1 = g0 + 0.55 / n_cols;
            int wx0 = static_cast<int>(x_lo + g0 * (x_hi - x_lo));
            int wx1 = static_cast<int>(x_lo + g1 * (x_hi - x_lo));
            for (int x = wx0; x <= wx1; ++x) {
                // project the band edges along lines through the VP
                double fa = std::abs(xc - vx) > 1e6 ? ya
                                                    : vy + (ya - vy) * (x - vx) / (xc - vx);
                double fb = std::abs(xc - vx) > 1e6 ? yb
                                                    : vy + (yb - vy) * (x - vx) / (xc - vx);
                for (int y = static_cast<int>(fa); y <= static_cast<int>(fb); ++y) {
                    if (y <= top(x) || y >= bottom(x)) continue;
                    p.paint_only(x, y, frame);
                    (void)label;
                }
            }
        }
    }
}

// soft bright blobs drawn only over sky pixels; after the depth-of-field
// pass their edges carry the sky's blur scale
inline void draw_clouds(Raster& img, const LabelMap& truth, std::mt19937& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int n = 6 + static_cast<int>(rng() % 8);
    for (int k = 0; k < n; ++k) {
        int cx = static_cast<int>(u(rng) * img.width);
        int cy = static_cast<int>(u(rng) * img.height * 0.6);
        double rx = 8 + 27 * u(rng);
        double ry = rx * (0.35 + 0.45 * u(rng));
        double amp = 0.18 + 0.2 * u(rng);
        for (int y = std::max(0, static_cast<int>(cy - ry));
             y <= std::min(img.height - 1, static_cast<int>(cy + ry)); ++y)
            for (int x = std::max(0, static_cast<int>(cx - rx));
                 x <= std::min(img.width - 1, static_cast<int>(cx + rx)); ++x) {
                if (truth.at(x, y) != static_cast<int>(GeometricClass::Sky)) continue;
                double d = (x - cx) * (x - cx) / (rx * rx) + (y - cy) * (y - cy) / (ry * ry);
                if (d > 1.0) continue;
                double f = amp * (1.0 - d);
                for (int c = 0; c < 3; ++c)
                    img.at(x, y, c) = std::clamp(img.at(x, y, c) + f, 0.0, 1.0);
            }
    }
}

// pebble/grass speckle over the support so the ground carries edges too
inline void draw_speckle(Raster& img, const LabelMap& truth, std::mt19937& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int n = img.width * img.height / 150;
    for (int k = 0; k < n; ++k) {
        int cx = static_cast<int>(u(rng) * img.width);
        int cy = static_cast<int>(u(rng) * img.height);
        if (truth.at(cx, cy) != static_cast<int>(GeometricClass::Support)) continue;
        int r = 1 + static_cast<int>(rng() % 3);
        double amp = (u(rng) - 0.5) * 0.22;
        for (int y = std::max(0, cy - r); y <= std::min(img.height - 1, cy + r); ++y)
            for (int x = std::max(0, cx - r); x <= std::min(img.width - 1, cx + r); ++x) {
                if (truth.at(x, y) != static_cast<int>(GeometricClass::Support)) continue;
                for (int c = 0; c < 3; ++c)
                    img.at(x, y, c) = std::clamp(img.at(x, y, c) + amp, 0.0, 1.0);
            }
    }
}

inline void porous_patch(Painter& p, std::mt19937& rng, int cx, int cy, int rx, int ry) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int y = cy - ry; y <= cy + ry; ++y)
        for (int x = cx - rx; x <= cx + rx; ++x) {
            double dx = (x - cx) / static_cast<double>(rx);
            double dy = (y - cy) / static_cast<double>(ry);
            if (dx * dx + dy * dy > 1.0) continue;
            std::array<double, 3> c = {0.12 + 0.5 * u(rng), 0.25 + 0.55 * u(rng),
                                       0.08 + 0.4 * u(rng)};
            p.set(x, y, c, static_cast<int>(GeometricClass::Porous));
        }
}

}  // namespace detail

inline SyntheticScene generate_scene(SceneKind kind, std::mt19937& rng, int W, int H) {
    using detail::Painter;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    SyntheticScene scene;
    scene.kind = kind;
    scene.image = Raster(W, H, 3, 0.0);
    scene.truth = LabelMap(W, H, static_cast<uint8_t>(GeometricClass::Support));
    Painter p{scene.image, scene.truth};

    auto sky_c = detail::pick_sky(rng);
    auto support_c = detail::pick_support(rng);

    SceneKind base = kind;
    if (kind == SceneKind::Occluded) {
        SceneKind bases[4] = {SceneKind::HorizonOnly, SceneKind::FrontoBuilding,
                              SceneKind::CornerBuilding, SceneKind::Alley};
        base = bases[rng() % 4];
    }

    switch (base) {
        case SceneKind::HorizonOnly: {
            int h = static_cast<int>((0.3 + 0.4 * u(rng)) * H);
            for (int y = 0; y < H; ++y)
                for (int x = 0; x < W; ++x)
                    p.set(x, y, y < h ? sky_c : support_c,
                          y < h ? static_cast<int>(GeometricClass::Sky)
                                : static_cast<int>(GeometricClass::Support));
            scene.gav.flags[kGavHorizon] = 1;
            scene.gav.horizon_y = h;
            break;
        }
        case SceneKind::FrontoBuilding: {
            int h = static_cast<int>((0.4 + 0.1 * u(rng)) * H);
            int top = static_cast<int>((0.12 + 0.15 * u(rng)) * H);
            int bottom = static_cast<int>((0.68 + 0.15 * u(rng)) * H);
            int x0 = static_cast<int>((0.08 + 0.15 * u(rng)) * W);
            int x1 = static_cast<int>((0.75 + 0.17 * u(rng)) * W);
            auto facade = detail::pick_facade(rng);
            for (int y = 0; y < H; ++y)
                for (int x = 0; x < W; ++x) {
                    bool in_building = x >= x0 && x <= x1 && y >= top && y < bottom;
                    if (in_building)
                        p.set(x, y, facade, static_cast<int>(GeometricClass::PlanarCenter));
                    else
                        p.set(x, y, y < h ? sky_c : support_c,
                              y < h ? static_cast<int>(GeometricClass::Sky)
                                    : static_cast<int>(GeometricClass::Support));
                }
            Painter pw{scene.image, scene.truth};
            detail::draw_windows(pw, rng, x0 + 3, x1 - 3,
                                 [&](double) { return static_cast<double>(top); },
                                 [&](double) { return static_cast<double>(bottom); }, 1e9, h,
                                 static_cast<int>(GeometricClass::PlanarCenter));
            scene.gav.flags[kGavSkyGroundLine] = 1;
            scene.gav.flags[kGavPlanarSurface] = 1;
            scene.gav.flags[kGavVerticalLine] = 1;
            scene.gav.flags[kGavVanishingLine] = 1;
            scene.gav.orientations = {static_cast<int>(GeometricClass::PlanarCenter)};
            break;
        }
        case SceneKind::CornerBuilding: {
            double h = (0.42 + 0.08 * u(rng)) * H;
            int xc = static_cast<int>((0.38 + 0.24 * u(rng)) * W);
            int xl = static_cast<int>((0.04 + 0.1 * u(rng)) * W);
            int xr = static_cast<int>((0.86 + 0.1 * u(rng)) * W);
            double yc = (0.1 + 0.1 * u(rng)) * H;
            double ybc = (0.78 + 0.12 * u(rng)) * H;
            double s1 = 0.1 + 0.3 * u(rng), s2 = 0.1 + 0.3 * u(rng);
            double g1 = 0.08 + 0.12 * u(rng), g2 = 0.08 + 0.12 * u(rng);
            auto facade_l = detail::pick_facade(rng);
            auto facade_r = detail::pick_facade(rng);
            auto top = [&](double x) {
                return x <= xc ? yc + s1 * (xc - x) : yc + s2 * (x - xc);
            };
            auto bot = [&](double x) {
                return x <= xc ? ybc - g1 * (xc - x) : ybc - g2 * (x - xc);
            };
            for (int y = 0; y < H; ++y)
                for (int x = 0; x < W; ++x) {
                    bool in_b = x >= xl && x <= xr && y >= top(x) && y < bot(x);
                    if (in_b)
                        p.set(x, y, x <= xc ? facade_l : facade_r,
                              x <= xc ? static_cast<int>(GeometricClass::PlanarLeft)
                                      : static_cast<int>(GeometricClass::PlanarRight));
                    else
                        p.set(x, y, y < h ? sky_c : support_c,
                              y < h ? static_cast<int>(GeometricClass::Sky)
                                    : static_cast<int>(GeometricClass::Support));
                }
            // window lines converge to each facade's own vanishing point
            double xv1 = xc - (ybc - yc) / (s1 + g1);
            double yv1 = yc + s1 * (xc - xv1);
            double xv2 = xc + (ybc - yc) / (s2 + g2);
            double yv2 = yc + s2 * (xv2 - xc);
            Painter pw{scene.image, scene.truth};
            detail::draw_windows(pw, rng, xl + 2, xc - 3, top, bot, xv1, yv1,
                                 static_cast<int>(GeometricClass::PlanarLeft));
            detail::draw_windows(pw, rng, xc + 3, xr - 2, top, bot, xv2, yv2,
                                 static_cast<int>(GeometricClass::PlanarRight));
            scene.gav.flags[kGavSkyGroundLine] = 1;
            scene.gav.flags[kGavPlanarSurface] = 1;
            scene.gav.flags[kGavVerticalLine] = 1;
            scene.gav.flags[kGavVanishingLine] = 1;
            scene.gav.horizon_y = 0.5 * (yv1 + yv2);
            scene.gav.orientations = {static_cast<int>(GeometricClass::PlanarLeft),
                                      static_cast<int>(GeometricClass::PlanarRight)};
            break;
        }
        case SceneKind::Alley: {
            double h = (0.42 + 0.08 * u(rng)) * H;
            int xc = static_cast<int>((0.4 + 0.2 * u(rng)) * W);
            double gap = 2 + 6 * u(rng);
            double y_top_l = (0.05 + 0.1 * u(rng)) * H;
            double y_top_r = (0.05 + 0.1 * u(rng)) * H;
            double y_bot_l = (0.85 + 0.1 * u(rng)) * H;
            double y_bot_r = (0.85 + 0.1 * u(rng)) * H;
            auto wall_l = detail::pick_facade(rng);
            auto wall_r = detail::pick_facade(rng);
            auto top = [&](double x) {
                if (x <= xc) return y_top_l + (h - gap - y_top_l) * x / xc;
                return h - gap + (y_top_r - (h - gap)) * (x - xc) / (W - 1 - xc);
            };
            auto bot = [&](double x) {
                if (x <= xc) return y_bot_l + (h + gap - y_bot_l) * x / xc;
                return h + gap + (y_bot_r - (h + gap)) * (x - xc) / (W - 1 - xc);
            };
            for (int y = 0; y < H; ++y)
                for (int x = 0; x < W; ++x) {
                    bool in_w = y >= top(x) && y < bot(x);
                    if (in_w)
                        p.set(x, y, x <= xc ? wall_l : wall_r,
                              x <= xc ? static_cast<int>(GeometricClass::PlanarRight)
                                      : static_cast<int>(GeometricClass::PlanarLeft));
                    else
                        p.set(x, y, y < top(x) ? sky_c : support_c,
                              y < top(x) ? static_cast<int>(GeometricClass::Sky)
                                         : static_cast<int>(GeometricClass::Support));
                }
            Painter pw{scene.image, scene.truth};
            detail::draw_windows(pw, rng, 2, xc - 4, top, bot, xc, h,
                                 static_cast<int>(GeometricClass::PlanarRight));
            detail::draw_windows(pw, rng, xc + 4, W - 3, top, bot, xc, h,
                                 static_cast<int>(GeometricClass::PlanarLeft));
            scene.gav.flags[kGavSkyGroundLine] = 1;
            scene.gav.flags[kGavPlanarSurface] = 1;
            scene.gav.flags[kGavVerticalLine] = 1;
            scene.gav.flags[kGavVanishingLine] = 1;
            scene.gav.horizon_y = h;
            scene.gav.orientations = {static_cast<int>(GeometricClass::PlanarRight),
                                      static_cast<int>(GeometricClass::PlanarLeft)};
            break;
        }
        case SceneKind::Occluded:
            break;  // handled below
    }

    if (kind == SceneKind::Occluded) {
        // solid rectangle with a known bounding box
        int bw = static_cast<int>((0.1 + 0.08 * u(rng)) * W);
        int bh = static_cast<int>((0.12 + 0.1 * u(rng)) * H);
        int bx = static_cast<int>((0.15 + 0.5 * u(rng)) * W);
        int by = static_cast<int>((0.45 + 0.25 * u(rng)) * H);
        auto solid_c = detail::pick_solid(rng);
        for (int y = by; y < by + bh; ++y)
            for (int x = bx; x < bx + bw; ++x)
                p.set(x, y, solid_c, static_cast<int>(GeometricClass::Solid));
        int margin = 4;
        scene.boxes.push_back({std::max(0, bx - margin), std::max(0, by - margin),
                               std::min(W - 1 - std::max(0, bx - margin), bw + 2 * margin),
                               std::min(H - 1 - std::max(0, by - margin), bh + 2 * margin)});
        // porous blob
        int rx = static_cast<int>((0.06 + 0.05 * u(rng)) * W);
        int ry = static_cast<int>((0.08 + 0.06 * u(rng)) * H);
        int cx = static_cast<int>((0.12 + 0.2 * u(rng)) * W);
        int cy = static_cast<int>((0.55 + 0.2 * u(rng)) * H);
        detail::porous_patch(p, rng, cx, cy, rx, ry);
        scene.gav.flags[kGavSolid] = 1;
        scene.gav.flags[kGavPorous] = 1;
    }

    detail::draw_clouds(scene.image, scene.truth, rng);
    detail::draw_speckle(scene.image, scene.truth, rng);

    // depth-of-field: the sky is out of focus, the ground sharpens toward
    // the camera, structures stay sharp; this is what the defocus-edge cue
    // keys on in real photographs
    {
        Raster blurred = gaussian_blur(scene.image, 3.0);
        double h_ref = scene.gav.horizon_y > 0 ? scene.gav.horizon_y : 0.45 * H;
        for (int y = 0; y < H; ++y)
            for (int x = 0; x < W; ++x) {
                int label = scene.truth.at(x, y);
                double t;  // blend toward the blurred copy
                if (label == static_cast<int>(GeometricClass::Sky)) t = 1.0;
                else if (label == static_cast<int>(GeometricClass::Support))
                    t = std::clamp(1.0 - (y - h_ref) / (H - h_ref), 0.0, 1.0);
                else t = 0.0;
                for (int c = 0; c < 3; ++c)
                    scene.image.at(x, y, c) = (1 - t) * scene.image.at(x, y, c) +
                                              t * blurred.at(x, y, c);
            }
    }
    detail::add_noise(scene.image, rng, 0.02);
    scene.truth.validate();
    scene.image.validate();
    return scene;
}

inline std::vector<SyntheticScene> generate_scenes(uint64_t seed, int count,
                                                   const std::vector<SceneKind>& kinds, int W,
                                                   int H) {
    if (count < 1) throw ParamError("generate_scenes: count must be >= 1");
    if (kinds.empty()) throw ParamError("generate_scenes: no kinds");
    std::vector<SyntheticScene> scenes;
    scenes.reserve(count);
    for (int i = 0; i < count; ++i) {
        std::mt19937 rng(static_cast<uint32_t>(seed * 0x9e3779b9u + 0x85ebca6bu * i));
        scenes.push_back(generate_scene(kinds[i % kinds.size()], rng, W, H));
    }
    return scenes;
}

inline void write_gav_truth(const GavTruth& gav, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "flags";
    for (int f : gav.flags) out << ' ' << f;
    out << "\nhorizon " << gav.horizon_y << "\norientations";
    for (int o : gav.orientations) out << ' ' << class_name(o);
    out << '\n';
}

inline void write_scene(const SyntheticScene& scene, const std::string& dir, int index) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    char stem[32];
    std::snprintf(stem, sizeof stem, "scene_%04d", index);
    std::string base = (fs::path(dir) / stem).string();
    write_raster(scene.image, base + ".ppm");
    write_label_map(scene.truth, LabelMapMode::Codes, base + "_truth.pgm");
    std::ofstream boxes(base + "_boxes.txt");
    for (const auto& b : scene.boxes)
        boxes << b.x << ' ' << b.y << ' ' << b.w << ' ' << b.h << '\n';
    write_gav_truth(scene.gav, base + "_gav.txt");
}

}  // namespace gal

#endif

#ifndef GAL_IPL_HPP
#define GAL_IPL_HPP

#include <optional>
#include <sstream>

#include "gal/config.hpp"
#include "gal/features.hpp"
#include "gal/forest.hpp"
#include "gal/segmentation.hpp"

namespace gal {

// 3-class scheme of the initial labeling stage.
enum Coarse3 : int { kSupport3 = 0, kVertical3 = 1, kSky3 = 2 };

inline int to_coarse3(int class7) {
    if (class7 == static_cast<int>(GeometricClass::Support)) return kSupport3;
    if (class7 == static_cast<int>(GeometricClass::Sky)) return kSky3;
    return kVertical3;
}

// Linear softmax fusion over the concatenated stage-1 probabilities
// (3 segmentations x 3 classes).
struct FusionModel {
    std::array<std::array<double, 9>, 3> w{};
    std::array<double, 3> bias{};
};

inline std::array<double, 3> fuse_stage2(const std::array<double, 9>& stage1,
                                         const FusionModel& m) {
    std::array<double, 3> score{};
    for (int c = 0; c < 3; ++c) {
        score[c] = m.bias[c];
        for (int k = 0; k < 9; ++k) score[c] += m.w[c][k] * stage1[k];
    }
    double mx = std::max({score[0], score[1], score[2]});
    double sum = 0;
    for (int c = 0; c < 3; ++c) {
        score[c] = std::exp(score[c] - mx);
        sum += score[c];
    }
    for (int c = 0; c < 3; ++c) score[c] /= sum;
    return score;
}

// Full-batch gradient descent on the softmax cross-entropy.
inline FusionModel train_fusion(const std::vector<std::array<double, 9>>& x,
                                const std::vector<int>& y, int iters = 300, double lr = 0.5) {
    if (x.empty() || x.size() != y.size()) throw ParamError("train_fusion: bad training set");
    FusionModel m;
    const double n = static_cast<double>(x.size());
    for (int it = 0; it < iters; ++it) {
        std::array<std::array<double, 9>, 3> gw{};
        std::array<double, 3> gb{};
        for (size_t i = 0; i < x.size(); ++i) {
            auto p = fuse_stage2(x[i], m);
            for (int c = 0; c < 3; ++c) {
                double err = p[c] - (y[i] == c ? 1.0 : 0.0);
                gb[c] += err;
                for (int k = 0; k < 9; ++k) gw[c][k] += err * x[i][k];
            }
        }
        for (int c = 0; c < 3; ++c) {
            m.bias[c] -= lr * gb[c] / n;
            for (int k = 0; k < 9; ++k) m.w[c][k] -= lr * gw[c][k] / n;
        }
    }
    return m;
}

// Route the 3-class mass into the 7-class vocabulary: support and sky pass
// through, the vertical mass is split by the 5-class sub-distribution
// (left, center, right, porous, solid).
inline ClassDistribution assemble_initial(const std::array<double, 3>& p3,
                                          const std::array<double, 5>& vertical5) {
    double vsum = 0;
    for (double v : vertical5) {
        if (!std::isfinite(v) || v < 0) throw ParamError("assemble_initial: bad vertical5 row");
        vsum += v;
    }
    if (std::abs(vsum - 1.0) > 1e-6)
        throw ParamError("assemble_initial: vertical5 row does not sum to 1");
    ClassDistribution out;
    out.p[static_cast<int>(GeometricClass::Support)] = p3[kSupport3];
    out.p[static_cast<int>(GeometricClass::Sky)] = p3[kSky3];
    for (int v = 0; v < 5; ++v) out.p[1 + v] = p3[kVertical3] * vertical5[v];
    return out;
}

// Plain-text vertical-class probability file:
// one `id p_left p_center p_right p_porous p_solid` line per fine segment.
inline std::vector<std::array<double, 5>> read_vertical_probs(const std::string& path,
                                                              int n_segments) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::vector<std::array<double, 5>> rows(n_segments, {0, 0, 0, 0, 0});
    std::vector<char> seen(n_segments, 0);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        int id;
        if (!(ls >> id)) continue;  // blank line
        std::array<double, 5> p{};
        for (double& v : p)
            if (!(ls >> v))
                throw FormatError("vertical probs " + path + ":" + std::to_string(lineno) +
                                  ": expected 5 probabilities");
        if (id < 0 || id >= n_segments)
            throw FormatError("vertical probs: id out of range at line " +
                              std::to_string(lineno));
        rows[id] = p;
        seen[id] = 1;
    }
    for (int i = 0; i < n_segments; ++i)
        if (!seen[i])
            throw FormatError("vertical probs: missing row for segment " + std::to_string(i));
    return rows;
}

inline void write_vertical_probs(const std::vector<std::array<double, 5>>& rows,
                                 const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    for (size_t i = 0; i < rows.size(); ++i) {
        out << i;
        for (double v : rows[i]) out << ' ' << v;
        out << '\n';
    }
}

// Everything the initial-labeling stage needs at run time.
struct IplModels {
    ForestModel forest_slic;  // 3-class, SLIC segments
    ForestModel forest_fh1;   // 3-class, fine FH segments
    ForestModel forest_fh2;   // 3-class, coarse FH segments
    FusionModel fusion;
    std::optional<ForestModel> vertical5;  // built-in 5-class classifier
};

struct IplResult {
    Segmentation fine;
    SegmentGraph graph;
    std::vector<std::array<double, 3>> p3;        // fused 3-class per fine unit
    std::vector<int> labels3;                     // argmax of p3
    std::vector<ClassDistribution> p_initial;     // 7-class per fine unit
    std::vector<std::array<double, 9>> stage1;    // concatenated stage-1 probs
};

namespace detail {

struct Stage1Views {
    Segmentation seg_slic, seg_fh1, seg_fh2;
    SegmentGraph graph_slic, graph_fh1, graph_fh2;
};

inline Stage1Views stage1_segmentations(const Raster& img, const Config& cfg) {
    Stage1Views v;
    v.seg_slic = slic(img, cfg.geti("slic_k"), cfg.get("slic_compactness"));
    v.seg_fh1 = graph_segment(img, cfg.get("fh_scale"), cfg.geti("fh_min_size"));
    v.seg_fh2 = graph_segment(img, cfg.get("fh_scale2"), cfg.geti("fh_min_size2"));
    v.graph_slic = build_graph(v.seg_slic);
    v.graph_fh1 = build_graph(v.seg_fh1);
    v.graph_fh2 = build_graph(v.seg_fh2);
    return v;
}

}  // namespace detail

inline IplResult run_ipl(const Raster& img, const IplModels& models, const Config& cfg,
                         const std::optional<std::string>& vertical_probs_path = {}) {
    auto views = detail::stage1_segmentations(img, cfg);

    auto stage1_probs = [&](const SegmentGraph& graph, const ForestModel& forest) {
        auto feats = extract_features(img, graph);
        std::vector<std::array<double, 3>> probs(feats.size());
        for (size_t s = 0; s < feats.size(); ++s) {
            auto p = predict_forest(forest, feats[s]);
            probs[s] = {p[0], p[1], p[2]};
        }
        return probs;
    };
    auto p_slic = stage1_probs(views.graph_slic, models.forest_slic);
    auto p_fh1 = stage1_probs(views.graph_fh1, models.forest_fh1);
    auto p_fh2 = stage1_probs(views.graph_fh2, models.forest_fh2);

    IplResult res;
    res.fine = intersect_segmentations({views.seg_slic, views.seg_fh1, views.seg_fh2});
    res.graph = build_graph(res.fine);

    const size_t n = res.graph.n_segments();
    res.stage1.resize(n);
    for (size_t u = 0; u < n; ++u) {
        // a fine unit lies inside exactly one segment of each source
        // segmentation; inherit the coarse probabilities directly
        int p = res.graph.nodes[u].pixels.front();
        const auto& a = p_slic[views.seg_slic.ids[p]];
        const auto& b = p_fh1[views.seg_fh1.ids[p]];
        const auto& c = p_fh2[views.seg_fh2.ids[p]];
        res.stage1[u] = {a[0], a[1], a[2], b[0], b[1], b[2], c[0], c[1], c[2]};
    }

    res.p3.resize(n);
    res.labels3.resize(n);
    for (size_t u = 0; u < n; ++u) {
        res.p3[u] = fuse_stage2(res.stage1[u], models.fusion);
        res.labels3[u] = static_cast<int>(
            std::max_element(res.p3[u].begin(), res.p3[u].end()) - res.p3[u].begin());
    }

    std::vector<std::array<double, 5>> vertical(n);
    if (vertical_probs_path) {
        vertical = read_vertical_probs(*vertical_probs_path, static_cast<int>(n));
    } else if (models.vertical5) {
        // orientation statistics live at facade scale: predict on the coarse
        // FH segments and inherit per unit, like the stage-1 transfer
        auto feats = extract_features(img, views.graph_fh2);
        std::vector<std::array<double, 5>> coarse(feats.size());
        for (size_t s = 0; s < feats.size(); ++s) {
            auto p = predict_forest(*models.vertical5, feats[s]);
            for (int v = 0; v < 5; ++v) coarse[s][v] = p[v];
        }
        for (size_t u = 0; u < n; ++u)
            vertical[u] = coarse[views.seg_fh2.ids[res.graph.nodes[u].pixels.front()]];
    } else {
        throw ConfigError("run_ipl: no vertical-class probabilities available "
                          "(supply a file or a built-in model)");
    }

    res.p_initial.resize(n);
    for (size_t u = 0; u < n; ++u) {
        res.p_initial[u] = assemble_initial(res.p3[u], vertical[u]);
        res.p_initial[u].validate();
    }
    return res;
}

// Per-pixel 3-class map painted from the fine units.
inline std::vector<int> labels3_pixels(const IplResult& ipl) {
    std::vector<int> out(ipl.fine.ids.size());
    for (size_t p = 0; p < out.size(); ++p) out[p] = ipl.labels3[ipl.fine.ids[p]];
    return out;
}

}  // namespace gal

#endif

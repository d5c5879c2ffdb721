#ifndef GAL_PIPELINE_HPP
#define GAL_PIPELINE_HPP

#include "gal/crf.hpp"
#include "gal/synth.hpp"

namespace gal {

struct PipelineModels {
    IplModels ipl;
    CrfParams params;
};

// Train the built-in classifiers on an internal synthetic corpus. Fully
// deterministic for a fixed config seed.
inline PipelineModels train_models(const Config& cfg = Config()) {
    const uint32_t seed = static_cast<uint32_t>(cfg.geti("seed"));
    const int W = cfg.geti("train_width"), H = cfg.geti("train_height");
    auto scenes = generate_scenes(
        seed, cfg.geti("train_scenes"),
        {SceneKind::HorizonOnly, SceneKind::FrontoBuilding, SceneKind::CornerBuilding,
         SceneKind::Alley, SceneKind::Occluded},
        W, H);

    // per-segmentation training pools for the three 3-class forests
    std::vector<std::vector<double>> feats_slic, feats_fh1, feats_fh2, feats_fine;
    std::vector<int> y_slic, y_fh1, y_fh2;
    std::vector<std::array<double, 9>> fusion_x;
    std::vector<int> fusion_y;
    std::vector<std::vector<double>> vertical_feats;
    std::vector<int> vertical_y;

    auto majority_label = [](const LabelMap& truth, const SegmentGraph::Node& node, int W_) {
        std::array<int, kNumClasses> counts{};
        for (int p : node.pixels) ++counts[truth.codes[p]];
        (void)W_;
        return static_cast<int>(
            std::max_element(counts.begin(), counts.end()) - counts.begin());
    };

    struct PerScene {
        detail::Stage1Views views;
        std::vector<std::array<double, 3>> p_slic, p_fh1, p_fh2;
        Segmentation fine;
        SegmentGraph fine_graph;
    };
    std::vector<PerScene> cache(scenes.size());

    for (size_t i = 0; i < scenes.size(); ++i) {
        const auto& scene = scenes[i];
        auto& c = cache[i];
        c.views = detail::stage1_segmentations(scene.image, cfg);
        auto harvest = [&](const SegmentGraph& graph, std::vector<std::vector<double>>& fx,
                           std::vector<int>& fy) {
            auto fs = extract_features(scene.image, graph);
            for (size_t s = 0; s < fs.size(); ++s) {
                fx.push_back(fs[s]);
                fy.push_back(to_coarse3(majority_label(scene.truth, graph.nodes[s], W)));
            }
        };
        harvest(c.views.graph_slic, feats_slic, y_slic);
        harvest(c.views.graph_fh1, feats_fh1, y_fh1);
        harvest(c.views.graph_fh2, feats_fh2, y_fh2);
        c.fine = intersect_segmentations({c.views.seg_slic, c.views.seg_fh1, c.views.seg_fh2});
        c.fine_graph = build_graph(c.fine);
    }

    PipelineModels models;
    const int trees = cfg.geti("forest_trees");
    const int depth = cfg.geti("forest_max_depth");
    models.ipl.forest_slic = train_forest(feats_slic, y_slic, 3, trees, depth, seed + 11);
    models.ipl.forest_fh1 = train_forest(feats_fh1, y_fh1, 3, trees, depth, seed + 22);
    models.ipl.forest_fh2 = train_forest(feats_fh2, y_fh2, 3, trees, depth, seed + 33);

    // stage-2 fusion set and the 5-class vertical classifier, on fine units
    for (size_t i = 0; i < scenes.size(); ++i) {
        const auto& scene = scenes[i];
        auto& c = cache[i];
        auto stage1 = [&](const SegmentGraph& graph, const ForestModel& forest) {
            auto fs = extract_features(scene.image, graph);
            std::vector<std::array<double, 3>> out(fs.size());
            for (size_t s = 0; s < fs.size(); ++s) {
                auto p = predict_forest(forest, fs[s]);
                out[s] = {p[0], p[1], p[2]};
            }
            return out;
        };
        auto p_slic = stage1(c.views.graph_slic, models.ipl.forest_slic);
        auto p_fh1 = stage1(c.views.graph_fh1, models.ipl.forest_fh1);
        auto p_fh2 = stage1(c.views.graph_fh2, models.ipl.forest_fh2);
        for (size_t s = 0; s < c.fine_graph.n_segments(); ++s) {
            int p = c.fine_graph.nodes[s].pixels.front();
            const auto& a = p_slic[c.views.seg_slic.ids[p]];
            const auto& b = p_fh1[c.views.seg_fh1.ids[p]];
            const auto& d = p_fh2[c.views.seg_fh2.ids[p]];
            fusion_x.push_back({a[0], a[1], a[2], b[0], b[1], b[2], d[0], d[1], d[2]});
            fusion_y.push_back(to_coarse3(majority_label(scene.truth, c.fine_graph.nodes[s], W)));
        }
        // the vertical sub-classifier trains at facade scale, where the
        // window-line statistics are strong
        auto coarse_feats = extract_features(scene.image, c.views.graph_fh2);
        for (size_t s = 0; s < c.views.graph_fh2.n_segments(); ++s) {
            int label7 = majority_label(scene.truth, c.views.graph_fh2.nodes[s], W);
            if (label7 >= 1 && label7 <= 5) {
                vertical_feats.push_back(coarse_feats[s]);
                vertical_y.push_back(label7 - 1);
            }
        }
    }
    models.ipl.fusion = train_fusion(fusion_x, fusion_y);
    if (!vertical_feats.empty())
        models.ipl.vertical5 =
            train_forest(vertical_feats, vertical_y, 5, trees, depth, seed + 44);
    models.params = CrfParams::from_config(cfg);
    return models;
}

struct PipelineResult {
    LabelMap final_labels;
    LabelMap ipl_labels;  // per-unit argmax of P_initial, before refinement
    GlobalAttributeVector gav;
    AttributeMaps maps;
    IplResult ipl;
    ExpansionResult expansion;
    std::vector<LineSegment> segments;
};

/**
 * The three-stage pipeline: initial labeling, global attribute extraction,
 * layout refinement. Solid objects are segmented first so the boundary
 * tracer can look behind them.
 */
inline PipelineResult run_pipeline(const Raster& img, const PipelineModels& models,
                                   const Config& cfg = Config(),
                                   const std::vector<Box>& boxes = {},
                                   const std::optional<std::string>& vertical_probs = {},
                                   std::optional<AttributeSet> enabled_opt = {}) {
    AttributeSet enabled = enabled_opt ? *enabled_opt : AttributeSet::from_config(cfg);
    const int W = img.width, H = img.height;

    PipelineResult res;
    res.ipl = run_ipl(img, models.ipl, cfg, vertical_probs);
    const auto& graph = res.ipl.graph;

    res.ipl_labels = LabelMap(W, H);
    for (size_t p = 0; p < graph.ids.size(); ++p)
        res.ipl_labels.codes[p] =
            static_cast<uint8_t>(res.ipl.p_initial[graph.ids[p]].argmax());

    res.segments = detect_segments(img, cfg);
    EvidenceMaps ev = build_evidence(img, res.segments, cfg);

    GaePayloads payloads;
    payloads.enabled = enabled;
    payloads.p_line = Field(W, H, 0.0);

    // solid objects first: their masks are removed before boundary tracing
    if (enabled.solid)
        payloads.solid = solid_mask(img, boxes, graph, cfg);
    else
        payloads.solid.rows.assign(graph.n_segments(), ClassDistribution::uniform());

    std::vector<int> labels3_px = labels3_pixels(res.ipl);
    std::vector<char> ignore;
    if (enabled.solid && payloads.solid.accepted_boxes > 0) ignore = payloads.solid.mask;

    if (enabled.skyground) {
        auto [sky, ground] =
            trace_boundaries(labels3_px, W, H, ignore, cfg.get("boundary_min_run_frac"));
        validate_boundary(sky, ev, payloads.p_line, cfg);
        validate_boundary(ground, ev, payloads.p_line, cfg);
        payloads.lines = {sky, ground};
        if (sky.flag || ground.flag)
            payloads.occluders = check_above_below(labels3_px, W, H, sky, ground,
                                                   cfg.get("occluder_min_area_frac"));
    } else {
        payloads.lines.first.y.assign(W, 0);
        payloads.lines.first.valid.assign(W, 0);
        payloads.lines.second.y.assign(W, 0);
        payloads.lines.second.valid.assign(W, 0);
        payloads.lines.second.kind = BoundaryPolyline::Kind::Ground;
    }
    // only accepted lines may deposit evidence
    if (!payloads.lines.first.flag && !payloads.lines.second.flag)
        payloads.p_line = Field(W, H, 0.0);

    // per-segment 3-class view for the horizon reasoning
    std::vector<int> labels3_seg(graph.n_segments());
    for (size_t s = 0; s < graph.n_segments(); ++s) labels3_seg[s] = res.ipl.labels3[s];

    if (enabled.horizon) {
        std::optional<double> horizon;
        if (scene_mode(res.segments, H, cfg) == SceneMode::Building)
            horizon = horizon_building(res.segments, cfg);
        else
            horizon = horizon_natural(res.segments, ev, H, W, cfg);
        if (horizon) {
            payloads.horizon_rows =
                gmm_refine(img, graph, labels3_seg, *horizon, res.ipl.p_initial, cfg);
            if (payloads.horizon_rows) payloads.horizon_y = horizon;
        }
    }

    payloads.vertical.rows.assign(graph.n_segments(), ClassDistribution::uniform());
    payloads.vertical.b.assign(graph.n_segments(), 0.0);
    if (enabled.verticall) payloads.vertical = vertical_attribute(graph, res.segments, cfg);

    payloads.planar.assign(graph.n_segments(), {});
    payloads.vanishing.rows.assign(graph.n_segments(), {});
    if (enabled.vanishing_planar) {
        payloads.pieces = fit_trapezoids(payloads.lines.first, payloads.lines.second,
                                         res.segments, W, H, cfg);
        payloads.planar = planar_rows(payloads.pieces, graph, payloads.lines.first,
                                      payloads.lines.second, H);
        // vanishing regions need the b scores even when the vertical-line
        // attribute itself is ablated
        const auto& b = enabled.verticall
                            ? payloads.vertical.b
                            : vertical_attribute(graph, res.segments, cfg).b;
        payloads.vanishing = estimate_vanishing(graph, res.segments, b, payloads.lines.first,
                                                payloads.lines.second, cfg);
    }

    if (enabled.porous)
        payloads.porous = porous_score(img, graph, ev, res.ipl.p_initial, cfg);
    else
        payloads.porous.rows.assign(graph.n_segments(), ClassDistribution::uniform());

    auto [gav, maps] = assemble_gav(res.ipl.p_initial, payloads, W, H);
    res.gav = std::move(gav);
    res.maps = std::move(maps);

    auto refined = refine(res.maps, graph, models.params, cfg.geti("expansion_max_cycles"));
    res.final_labels = std::move(refined.labels);
    res.expansion = std::move(refined.expansion);
    return res;
}

}  // namespace gal

#endif

#ifndef GAL_GRABCUT_HPP
#define GAL_GRABCUT_HPP

#include <optional>
#include <sstream>

#include "gal/config.hpp"
#include "gal/gmm.hpp"
#include "gal/maxflow.hpp"
#include "gal/segmentation.hpp"

namespace gal {

struct Box {
    int x = 0, y = 0, w = 0, h = 0;

    bool contains(int px, int py) const {
        return px >= x && py >= y && px < x + w && py < y + h;
    }
};

inline std::vector<Box> read_boxes(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::vector<Box> boxes;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        Box b;
        if (!(ls >> b.x)) continue;
        if (!(ls >> b.y >> b.w >> b.h))
            throw FormatError("boxes " + path + ":" + std::to_string(lineno) +
                              ": expected `x y w h`");
        boxes.push_back(b);
    }
    return boxes;
}

struct GrabCutResult {
    std::vector<char> mask;             // 1 = foreground, image sized
    std::vector<double> energy_trace;   // after each refit and each cut
};

/**
 * Foreground extraction following "GrabCut: interactive foreground extraction
 * using iterated graph cuts", Rother et al., SIGGRAPH 2004: alternate fitting
 * two color GMMs (foreground from the box, background from a frame around it)
 * and solving a binary min-cut with contrast-modulated 8-neighbour links.
 * Both half-steps lower the same energy, so the trace is non-increasing.
 */
inline std::optional<GrabCutResult> grab_cut(const Raster& img, const Box& box,
                                             const Config& cfg = Config()) {
    const int W = img.width, H = img.height;
    if (box.w <= 0 || box.h <= 0) return std::nullopt;
    if (box.x < 0 || box.y < 0 || box.x + box.w > W || box.y + box.h > H) return std::nullopt;
    if (box.x == 0 && box.y == 0 && box.w == W && box.h == H) return std::nullopt;

    const int frame = cfg.geti("grabcut_frame_px");
    const int x0 = std::max(0, box.x - frame), y0 = std::max(0, box.y - frame);
    const int x1 = std::min(W, box.x + box.w + frame), y1 = std::min(H, box.y + box.h + frame);
    const int rw = x1 - x0, rh = y1 - y0;
    const int n = rw * rh;

    auto rgb = [&](int px, int py) -> std::array<double, 3> {
        if (img.channels == 3)
            return {img.at(px, py, 0), img.at(px, py, 1), img.at(px, py, 2)};
        double v = img.at(px, py);
        return {v, v, v};
    };
    auto node_of = [&](int px, int py) { return (py - y0) * rw + (px - x0); };

    // contrast scale over 8-neighbour pairs inside the region
    double beta;
    {
        double sum = 0;
        long count = 0;
        const int dxs[4] = {1, 0, 1, -1}, dys[4] = {0, 1, 1, 1};
        for (int py = y0; py < y1; ++py)
            for (int px = x0; px < x1; ++px)
                for (int d = 0; d < 4; ++d) {
                    int qx = px + dxs[d], qy = py + dys[d];
                    if (qx < x0 || qy < y0 || qx >= x1 || qy >= y1) continue;
                    auto a = rgb(px, py), b = rgb(qx, qy);
                    double dd = 0;
                    for (int c = 0; c < 3; ++c) dd += (a[c] - b[c]) * (a[c] - b[c]);
                    sum += dd;
                    ++count;
                }
        beta = sum > 0 ? 1.0 / (2.0 * sum / count) : 0.0;
    }
    const double gamma = cfg.get("grabcut_gamma");

    std::vector<char> fg(n, 0);
    std::vector<char> hard_bg(n, 0);
    for (int py = y0; py < y1; ++py)
        for (int px = x0; px < x1; ++px) {
            if (box.contains(px, py)) fg[node_of(px, py)] = 1;
            else hard_bg[node_of(px, py)] = 1;
        }
    bool has_frame = false;
    for (char b : hard_bg) has_frame |= b != 0;
    if (!has_frame) return std::nullopt;  // no background sample around the box

    auto collect = [&](bool want_fg) {
        std::vector<std::array<double, 3>> pts;
        for (int py = y0; py < y1; ++py)
            for (int px = x0; px < x1; ++px)
                if ((fg[node_of(px, py)] != 0) == want_fg) pts.push_back(rgb(px, py));
        return pts;
    };

    const int k = cfg.geti("gmm_components");
    GmmModel fg_model = fit_gmm(collect(true), k, 10);
    GmmModel bg_model = fit_gmm(collect(false), k, 10);

    auto data_cost = [&](const GmmModel& m, int px, int py) {
        return -std::log(std::max(m.pdf(rgb(px, py)), 1e-12));
    };
    auto energy = [&]() {
        double e = 0;
        for (int py = y0; py < y1; ++py)
            for (int px = x0; px < x1; ++px)
                e += fg[node_of(px, py)] ? data_cost(fg_model, px, py)
                                         : data_cost(bg_model, px, py);
        const int dxs[4] = {1, 0, 1, -1}, dys[4] = {0, 1, 1, 1};
        for (int py = y0; py < y1; ++py)
            for (int px = x0; px < x1; ++px)
                for (int d = 0; d < 4; ++d) {
                    int qx = px + dxs[d], qy = py + dys[d];
                    if (qx < x0 || qy < y0 || qx >= x1 || qy >= y1) continue;
                    if (fg[node_of(px, py)] == fg[node_of(qx, qy)]) continue;
                    auto a = rgb(px, py), b = rgb(qx, qy);
                    double dd = 0;
                    for (int c = 0; c < 3; ++c) dd += (a[c] - b[c]) * (a[c] - b[c]);
                    double dist = (dxs[d] != 0 && dys[d] != 0) ? std::sqrt(2.0) : 1.0;
                    e += gamma * std::exp(-beta * dd) / dist;
                }
        return e;
    };

    GrabCutResult res;
    const int iters = cfg.geti("grabcut_iters");
    for (int it = 0; it < iters; ++it) {
        // refit the color models on the current assignment
        auto fg_pts = collect(true);
        auto bg_pts = collect(false);
        if (fg_pts.empty() || bg_pts.empty()) break;
        em_steps(fg_model, fg_pts, 2);
        em_steps(bg_model, bg_pts, 2);
        res.energy_trace.push_back(energy());

        // min cut: source side = foreground
        FlowNetwork net(n + 2, n, n + 1);
        for (int py = y0; py < y1; ++py)
            for (int px = x0; px < x1; ++px) {
                int u = node_of(px, py);
                if (hard_bg[u]) {
                    net.add_arc(u, n + 1, 1e9);
                    continue;
                }
                // densities exceed 1, so shift both t-links by the pixel's
                // smaller cost; the cut is unchanged and capacities stay >= 0
                double d_bg = data_cost(bg_model, px, py);
                double d_fg = data_cost(fg_model, px, py);
                double shift = std::min(d_bg, d_fg);
                net.add_arc(n, u, d_bg - shift);      // pay when background
                net.add_arc(u, n + 1, d_fg - shift);  // pay when foreground
            }
        const int dxs[4] = {1, 0, 1, -1}, dys[4] = {0, 1, 1, 1};
        for (int py = y0; py < y1; ++py)
            for (int px = x0; px < x1; ++px)
                for (int d = 0; d < 4; ++d) {
                    int qx = px + dxs[d], qy = py + dys[d];
                    if (qx < x0 || qy < y0 || qx >= x1 || qy >= y1) continue;
                    auto a = rgb(px, py), b = rgb(qx, qy);
                    double dd = 0;
                    for (int c = 0; c < 3; ++c) dd += (a[c] - b[c]) * (a[c] - b[c]);
                    double dist = (dxs[d] != 0 && dys[d] != 0) ? std::sqrt(2.0) : 1.0;
                    double w = gamma * std::exp(-beta * dd) / dist;
                    net.add_arc(node_of(px, py), node_of(qx, qy), w);
                    net.add_arc(node_of(qx, qy), node_of(px, py), w);
                }
        auto cut = max_flow(std::move(net));
        for (int u = 0; u < n; ++u) fg[u] = !cut.sink_side[u] && !hard_bg[u];
        res.energy_trace.push_back(energy());
    }

    res.mask.assign(static_cast<size_t>(W) * H, 0);
    for (int py = y0; py < y1; ++py)
        for (int px = x0; px < x1; ++px)
            if (fg[node_of(px, py)] && box.contains(px, py))
                res.mask[static_cast<size_t>(py) * W + px] = 1;
    return res;
}

// P_solid rows over the segment graph: a segment covered by any object mask
// for more than the overlap threshold becomes a solid one-hot row; everything
// else stays uniform.
struct SolidAttribute {
    std::vector<ClassDistribution> rows;
    std::vector<char> mask;  // union of accepted object masks
    int accepted_boxes = 0;
    bool flag = false;
    std::vector<std::vector<double>> energy_traces;
};

inline SolidAttribute solid_mask(const Raster& img, const std::vector<Box>& boxes,
                                 const SegmentGraph& graph, const Config& cfg = Config()) {
    SolidAttribute out;
    out.rows.assign(graph.n_segments(), ClassDistribution::uniform());
    out.mask.assign(static_cast<size_t>(img.width) * img.height, 0);
    for (const auto& box : boxes) {
        auto res = grab_cut(img, box, cfg);
        if (!res) continue;  // rejected box
        ++out.accepted_boxes;
        out.energy_traces.push_back(res->energy_trace);
        for (size_t p = 0; p < out.mask.size(); ++p) out.mask[p] |= res->mask[p];
    }
    if (out.accepted_boxes == 0) return out;
    const double overlap = cfg.get("solid_overlap");
    for (size_t s = 0; s < graph.n_segments(); ++s) {
        int inside = 0;
        for (int p : graph.nodes[s].pixels) inside += out.mask[p];
        if (inside > overlap * graph.nodes[s].area) {
            ClassDistribution row;
            row.p[static_cast<int>(GeometricClass::Solid)] = 1.0;
            out.rows[s] = row;
            out.flag = true;
        }
    }
    return out;
}

}  // namespace gal

#endif

#ifndef GAL_POROUS_HPP
#define GAL_POROUS_HPP

#include <optional>

#include "gal/evidence.hpp"
#include "gal/segmentation.hpp"

namespace gal {

// Contour randomness of a segment: normalized entropy (base-8 log) of the
// 8-bin gradient-orientation histogram over interior edge pixels. Interior
// means more than band_px away from other segments. nullopt when the segment
// has no interior edge pixels.
inline std::optional<double> contour_randomness(const Raster& img, const SegmentGraph& graph,
                                                int segment, const Raster& edge_map,
                                                double edge_threshold = 0.3, int band_px = 2) {
    const int W = graph.width, H = graph.height;
    Field gray = to_gray(img);
    Field gx, gy;
    gradients(gray, gx, gy);

    std::array<double, 8> hist{};
    double total = 0;
    for (int p : graph.nodes[segment].pixels) {
        int px = p % W, py = p / W;
        bool interior = true;
        for (int dy = -band_px; dy <= band_px && interior; ++dy)
            for (int dx = -band_px; dx <= band_px && interior; ++dx) {
                int x = px + dx, y = py + dy;
                if (x < 0 || y < 0 || x >= W || y >= H) continue;
                if (graph.ids[static_cast<size_t>(y) * W + x] != segment) interior = false;
            }
        if (!interior) continue;
        if (edge_map.data[p] <= edge_threshold) continue;
        double m = std::hypot(gx.v[p], gy.v[p]);
        if (m <= 0) continue;
        // bins centered on 0 degrees so horizontal edges do not
        // alias across the wrap-around
        double ang = std::atan2(gy.v[p], gx.v[p]) * 180.0 / M_PI;
        ang = std::fmod(ang + 180.0 + 11.25, 180.0);
        int bin = std::min(7, static_cast<int>(ang / 22.5));
        hist[bin] += 1.0;
        total += 1.0;
    }
    if (total <= 0) return std::nullopt;
    double entropy = 0;
    for (double h : hist) {
        if (h <= 0) continue;
        double p = h / total;
        entropy -= p * std::log(p);
    }
    return entropy / std::log(8.0);
}

// P_porous rows: segments whose initial argmax is porous or solid get
// 0.8*r on porous and 0.8*(1-r) on solid, the remaining 0.2 spread over all
// seven classes; everything else stays uniform.
struct PorousAttribute {
    std::vector<ClassDistribution> rows;
    std::vector<double> randomness;  // -1 where not applicable
    bool flag = false;
};

inline PorousAttribute porous_score(const Raster& img, const SegmentGraph& graph,
                                    const EvidenceMaps& ev,
                                    const std::vector<ClassDistribution>& p_initial,
                                    const Config& cfg = Config()) {
    PorousAttribute out;
    out.rows.assign(graph.n_segments(), ClassDistribution::uniform());
    out.randomness.assign(graph.n_segments(), -1.0);
    const double mass = cfg.get("porous_entropy_mass");
    for (size_t s = 0; s < graph.n_segments(); ++s) {
        int arg = p_initial[s].argmax();
        if (arg != static_cast<int>(GeometricClass::Porous) &&
            arg != static_cast<int>(GeometricClass::Solid))
            continue;
        auto r = contour_randomness(img, graph, static_cast<int>(s), ev.edge_map,
                                    cfg.get("porous_edge_threshold"),
                                    cfg.geti("porous_band_px"));
        if (!r) continue;
        out.randomness[s] = *r;
        ClassDistribution row;
        row.p.fill((1.0 - mass) / kNumClasses);
        row.p[static_cast<int>(GeometricClass::Porous)] += mass * *r;
        row.p[static_cast<int>(GeometricClass::Solid)] += mass * (1.0 - *r);
        row.validate();
        out.rows[s] = row;
        out.flag = true;
    }
    return out;
}

}  // namespace gal

#endif

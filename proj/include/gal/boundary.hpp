#ifndef GAL_BOUNDARY_HPP
#define GAL_BOUNDARY_HPP

#include "gal/config.hpp"
#include "gal/evidence.hpp"
#include "gal/ipl.hpp"

namespace gal {

// Per-column boundary between sky and the vertical region (sky kind) or
// between the vertical region and support (ground kind). Sky lines record the
// last sky row, ground lines the first support row.
struct BoundaryPolyline {
    enum class Kind { Sky, Ground };
    Kind kind = Kind::Sky;
    std::vector<int> y;
    std::vector<char> valid;
    double confidence = 0;
    bool flag = false;

    int valid_count() const {
        int n = 0;
        for (char v : valid) n += v != 0;
        return n;
    }
};

// Trace initial sky and ground lines from the per-pixel 3-class map.
// Pixels under `ignore` (detected solid objects) are skipped, closing the
// gap so lines continue behind occluders. Valid-column runs shorter than
// min_run_frac * W are dropped.
inline std::pair<BoundaryPolyline, BoundaryPolyline> trace_boundaries(
    const std::vector<int>& labels3, int W, int H, const std::vector<char>& ignore = {},
    double min_run_frac = 0.05) {
    BoundaryPolyline sky, ground;
    sky.kind = BoundaryPolyline::Kind::Sky;
    ground.kind = BoundaryPolyline::Kind::Ground;
    sky.y.assign(W, 0);
    sky.valid.assign(W, 0);
    ground.y.assign(W, 0);
    ground.valid.assign(W, 0);

    std::vector<std::pair<int, int>> column;  // (y, label) of unmasked pixels
    for (int x = 0; x < W; ++x) {
        column.clear();
        for (int yy = 0; yy < H; ++yy) {
            size_t p = static_cast<size_t>(yy) * W + x;
            if (!ignore.empty() && ignore[p]) continue;
            column.push_back({yy, labels3[p]});
        }
        // sky line: lowest pixel of the topmost sky run, if vertical follows
        for (size_t i = 0; i < column.size(); ++i) {
            if (column[i].second != kSky3) continue;
            size_t end = i;
            while (end + 1 < column.size() && column[end + 1].second == kSky3) ++end;
            if (end + 1 < column.size() && column[end + 1].second == kVertical3) {
                sky.y[x] = column[end].first;
                sky.valid[x] = 1;
            }
            break;  // only the topmost sky run counts
        }
        // ground line: first support row of the topmost vertical->support step
        for (size_t i = 0; i + 1 < column.size(); ++i) {
            if (column[i].second == kVertical3 && column[i + 1].second == kSupport3) {
                ground.y[x] = column[i + 1].first;
                ground.valid[x] = 1;
                break;
            }
        }
    }

    auto drop_short_runs = [&](BoundaryPolyline& line) {
        double min_run = min_run_frac * W;
        int x = 0;
        while (x < W) {
            if (!line.valid[x]) {
                ++x;
                continue;
            }
            int start = x;
            while (x < W && line.valid[x]) ++x;
            if (x - start < min_run)
                for (int i = start; i < x; ++i) line.valid[i] = 0;
        }
    };
    drop_short_runs(sky);
    drop_short_runs(ground);
    return {sky, ground};
}

// Validation of a traced line: per column the product of the (dilated)
// line-segment map, the edge map and the defocus-edge map along the line;
// the mean over valid columns is the confidence. The edge and defocus maps
// are NMS-thinned and the traced row rides a segmentation boundary, so each
// map is sampled with a small vertical tolerance. Accepted lines deposit
// the per-column products into the shared P_line map on both sides of the
// transition.
inline void validate_boundary(BoundaryPolyline& line, const EvidenceMaps& ev, Field& p_line,
                              const Config& cfg = Config()) {
    const int W = ev.edge_map.width, H = ev.edge_map.height;
    if (static_cast<int>(line.y.size()) != W)
        throw ParamError("validate_boundary: dimension mismatch");
    Field ls(W, H);
    for (int i = 0; i < W * H; ++i) ls.v[i] = ev.line_map.data[i];
    ls = dilate(ls, cfg.geti("boundary_dilate_px"));
    const int tol = cfg.geti("boundary_dilate_px");
    // the defocus map localizes only to its smoothing scale, so it gets a
    // wider sampling band than the thin edge maps
    const int df_tol = cfg.geti("boundary_defocus_tol_px");

    auto window_max = [&](const auto& map, int x, int y, int t) {
        double m = 0;
        for (int dy = -t; dy <= t; ++dy) {
            int yy = y + dy;
            if (yy < 0 || yy >= H) continue;
            if constexpr (std::is_same_v<std::decay_t<decltype(map)>, Field>)
                m = std::max(m, map.at(x, yy));
            else
                m = std::max(m, map.at(x, yy, 0));
        }
        return m;
    };

    std::vector<double> p(W, 0.0);
    double sum = 0;
    int count = 0;
    for (int x = 0; x < W; ++x) {
        if (!line.valid[x]) continue;
        int y = line.y[x];
        p[x] = window_max(ls, x, y, tol) * window_max(ev.edge_map, x, y, tol) *
               window_max(ev.defocus_edge_map, x, y, df_tol);
        sum += p[x];
        ++count;
    }
    line.confidence = count > 0 ? sum / count : 0.0;
    line.flag = count > 0 && line.confidence >= cfg.get("boundary_conf_threshold");
    if (!line.flag) return;
    for (int x = 0; x < W; ++x) {
        if (!line.valid[x]) continue;
        int y = line.y[x];
        int other = line.kind == BoundaryPolyline::Kind::Sky ? y + 1 : y - 1;
        p_line.at(x, y) = std::max(p_line.at(x, y), p[x]);
        if (other >= 0 && other < H)
            p_line.at(x, other) = std::max(p_line.at(x, other), p[x]);
    }
}

// Vertical-labeled connected regions strictly above the sky line or below
// the ground line; candidates for solid/porous occluders.
struct OccluderRegion {
    enum class Side { AboveSky, BelowGround };
    Side side = Side::AboveSky;
    std::vector<int> pixels;
};

inline std::vector<OccluderRegion> check_above_below(
    const std::vector<int>& labels3, int W, int H, const BoundaryPolyline& sky,
    const BoundaryPolyline& ground, double min_area_frac = 0.002) {
    auto collect = [&](const BoundaryPolyline& line, bool above, OccluderRegion::Side side,
                       std::vector<OccluderRegion>& out) {
        std::vector<int> mask(static_cast<size_t>(W) * H, 0);
        bool any = false;
        for (int x = 0; x < W; ++x) {
            if (!line.valid[x]) continue;
            int y0 = above ? 0 : line.y[x] + 1;
            int y1 = above ? line.y[x] - 1 : H - 1;
            for (int y = y0; y <= y1; ++y) {
                size_t p = static_cast<size_t>(y) * W + x;
                if (labels3[p] == kVertical3) {
                    mask[p] = 1;
                    any = true;
                }
            }
        }
        if (!any) return;
        std::vector<int> comp;
        int ncomp = connected_components(mask, W, H, comp);
        std::vector<std::vector<int>> groups(ncomp);
        for (int p = 0; p < W * H; ++p)
            if (mask[p]) groups[comp[p]].push_back(p);
        double min_area = min_area_frac * W * H;
        for (auto& g : groups)
            if (!g.empty() && static_cast<double>(g.size()) >= min_area)
                out.push_back({side, std::move(g)});
    };
    std::vector<OccluderRegion> out;
    collect(sky, true, OccluderRegion::Side::AboveSky, out);
    collect(ground, false, OccluderRegion::Side::BelowGround, out);
    return out;
}

}  // namespace gal

#endif

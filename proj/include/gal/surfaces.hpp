#ifndef GAL_SURFACES_HPP
#define GAL_SURFACES_HPP

#include "gal/horizon.hpp"

namespace gal {

// One fitted trapezoid piece of the vertical band: columns in (x0, x1),
// skyline slope s, orientation in {planar-left, -center, -right}.
struct SurfacePiece {
    double x0 = 0, x1 = 0;  // open interval in column coordinates
    double slope = 0;
    int orientation = static_cast<int>(GeometricClass::PlanarCenter);
};

inline int orientation_from_slope(double s, double flat) {
    if (s < -flat) return static_cast<int>(GeometricClass::PlanarLeft);
    if (s > flat) return static_cast<int>(GeometricClass::PlanarRight);
    return static_cast<int>(GeometricClass::PlanarCenter);
}

namespace detail {

// least-squares slope of y(x) over the given columns; 0 when underdetermined
inline double ls_slope(const std::vector<int>& xs, const std::vector<int>& ys) {
    if (xs.size() < 2) return 0.0;
    double mx = 0, my = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= xs.size();
    my /= xs.size();
    double num = 0, den = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
        num += (xs[i] - mx) * (ys[i] - my);
        den += (xs[i] - mx) * (xs[i] - mx);
    }
    return den > 0 ? num / den : 0.0;
}

}  // namespace detail

/**
 * Trapezoid fitting over the vertical band between the sky and ground lines.
 * The band splits at strong vertical segments and wherever the skyline slope
 * changes sign; each piece's orientation comes from the sign of its fitted
 * skyline slope (falling left-to-right toward a near corner reads as a
 * left-facing surface). When a piece has no usable skyline the ground line
 * substitutes with the opposite sign convention.
 */
inline std::vector<SurfacePiece> fit_trapezoids(const BoundaryPolyline& sky,
                                                const BoundaryPolyline& ground,
                                                const std::vector<LineSegment>& segments,
                                                int W, int H, const Config& cfg = Config()) {
    const double flat = cfg.get("trap_slope_flat");
    const double vtol = cfg.get("vertical_angle_tol_deg");
    auto top = [&](int x) { return sky.valid[x] ? sky.y[x] : 0; };
    auto bottom = [&](int x) { return ground.valid[x] ? ground.y[x] : H - 1; };
    auto band = [&](int x) { return sky.valid[x] || ground.valid[x]; };

    std::vector<SurfacePiece> pieces;
    int x = 0;
    while (x < W) {
        if (!band(x)) {
            ++x;
            continue;
        }
        int run_start = x;
        while (x < W && band(x)) ++x;
        int run_end = x - 1;

        std::vector<double> cuts;
        // strong vertical segments split the band
        for (const auto& s : segments) {
            if (!is_vertical(s, vtol)) continue;
            double mx = s.mid_x();
            int cx = std::clamp(static_cast<int>(std::lround(mx)), run_start, run_end);
            if (mx < run_start || mx > run_end) continue;
            double local_h = std::max(1, bottom(cx) - top(cx));
            if (s.length >= cfg.get("trap_break_len_frac") * local_h) cuts.push_back(mx);
        }
        // skyline slope sign changes split the band
        int hw = std::max(2, static_cast<int>(std::lround(0.5 * cfg.get("trap_slope_window_frac") * W)));
        std::vector<int> cls(run_end - run_start + 1, 0);
        for (int cx = run_start; cx <= run_end; ++cx) {
            std::vector<int> xs, ys;
            for (int wx = std::max(run_start, cx - hw); wx <= std::min(run_end, cx + hw); ++wx)
                if (sky.valid[wx]) {
                    xs.push_back(wx);
                    ys.push_back(sky.y[wx]);
                }
            double s = detail::ls_slope(xs, ys);
            // wider deadzone than the orientation rule: traced polylines
            // jitter by a pixel or two on flat skylines
            double dz = cfg.get("trap_split_deadzone");
            cls[cx - run_start] = s < -dz ? -1 : s > dz ? 1 : 0;
        }
        int prev_sign = 0, prev_pos = -1;
        for (int cx = run_start; cx <= run_end; ++cx) {
            int c = cls[cx - run_start];
            if (c == 0) continue;
            if (prev_sign != 0 && c != prev_sign) cuts.push_back(0.5 * (prev_pos + cx));
            prev_sign = c;
            prev_pos = cx;
        }

        // a corner often yields both a segment cut and a slope-sign cut;
        // collapse cuts closer than 3 columns into their mean
        std::sort(cuts.begin(), cuts.end());
        std::vector<double> merged;
        for (size_t c = 0; c < cuts.size();) {
            size_t e = c + 1;
            double sum = cuts[c];
            while (e < cuts.size() && cuts[e] - cuts[e - 1] < 3.0) {
                sum += cuts[e];
                ++e;
            }
            merged.push_back(sum / (e - c));
            c = e;
        }
        cuts = std::move(merged);
        cuts.push_back(run_start - 1.0);
        cuts.push_back(run_end + 1.0);
        std::sort(cuts.begin(), cuts.end());
        for (size_t c = 0; c + 1 < cuts.size(); ++c) {
            double x0 = cuts[c], x1 = cuts[c + 1];
            std::vector<int> xs, ys;
            for (int cx = run_start; cx <= run_end; ++cx)
                if (cx > x0 && cx < x1 && sky.valid[cx]) {
                    xs.push_back(cx);
                    ys.push_back(sky.y[cx]);
                }
            SurfacePiece piece;
            piece.x0 = x0;
            piece.x1 = x1;
            if (xs.size() >= 2) {
                piece.slope = detail::ls_slope(xs, ys);
                piece.orientation = orientation_from_slope(piece.slope, flat);
            } else {
                // skyline unusable: the ground line slopes the opposite way
                xs.clear();
                ys.clear();
                for (int cx = run_start; cx <= run_end; ++cx)
                    if (cx > x0 && cx < x1 && ground.valid[cx]) {
                        xs.push_back(cx);
                        ys.push_back(ground.y[cx]);
                    }
                if (xs.empty()) continue;
                piece.slope = detail::ls_slope(xs, ys);
                piece.orientation = orientation_from_slope(-piece.slope, flat);
            }
            if (x1 - x0 > 1.5) pieces.push_back(piece);
        }
    }
    return pieces;
}

// P_planar rows: 1 on the piece's orientation for segments whose centroid
// falls inside the piece and the band, 0 on the other planar labels.
inline std::vector<std::array<double, kNumClasses>> planar_rows(
    const std::vector<SurfacePiece>& pieces, const SegmentGraph& graph,
    const BoundaryPolyline& sky, const BoundaryPolyline& ground, int H) {
    std::vector<std::array<double, kNumClasses>> rows(graph.n_segments());
    for (auto& r : rows) r.fill(0.0);
    for (size_t s = 0; s < graph.n_segments(); ++s) {
        double cx = graph.nodes[s].cx, cy = graph.nodes[s].cy;
        int ix = std::clamp(static_cast<int>(std::lround(cx)), 0, graph.width - 1);
        int top = sky.valid[ix] ? sky.y[ix] : 0;
        int bottom = ground.valid[ix] ? ground.y[ix] : H - 1;
        if (cy < top || cy > bottom) continue;
        for (const auto& piece : pieces)
            if (cx > piece.x0 && cx < piece.x1) {
                rows[s][piece.orientation] = 1.0;
                break;
            }
    }
    return rows;
}

// Building evidence per segment: vertical-line score over the segment's
// pixels dilated by 5 px, spread over the planar labels in the P_verticall
// rows (b/3 each; the non-planar classes share 1-b).
struct VerticalAttribute {
    std::vector<double> b;                        // per segment
    std::vector<ClassDistribution> rows;          // P_verticall
    bool any_vertical_segments = false;
};

inline VerticalAttribute vertical_attribute(const SegmentGraph& graph,
                                            const std::vector<LineSegment>& segments,
                                            const Config& cfg = Config()) {
    const int W = graph.width, H = graph.height;
    const int r = cfg.geti("segment_dilate_px");
    const double vtol = cfg.get("vertical_angle_tol_deg");

    std::vector<LineSegment> vertical;
    for (const auto& s : segments)
        if (is_vertical(s, vtol)) vertical.push_back(s);

    VerticalAttribute out;
    out.any_vertical_segments = !vertical.empty();
    out.b.resize(graph.n_segments(), 0.0);
    out.rows.resize(graph.n_segments());

    for (size_t s = 0; s < graph.n_segments(); ++s) {
        const auto& node = graph.nodes[s];
        // dilated area via a local stamp over the padded bounding box
        int bw = node.max_x - node.min_x + 1 + 2 * r;
        int bh = node.max_y - node.min_y + 1 + 2 * r;
        std::vector<char> stamp(static_cast<size_t>(bw) * bh, 0);
        for (int p : node.pixels) {
            int px = p % W - node.min_x + r, py = p / W - node.min_y + r;
            for (int dy = -r; dy <= r; ++dy)
                for (int dx = -r; dx <= r; ++dx)
                    stamp[static_cast<size_t>(py + dy) * bw + (px + dx)] = 1;
        }
        double area = 0;
        for (int sy = 0; sy < bh; ++sy)
            for (int sx = 0; sx < bw; ++sx) {
                int ix = sx + node.min_x - r, iy = sy + node.min_y - r;
                if (ix < 0 || iy < 0 || ix >= W || iy >= H) continue;
                area += stamp[static_cast<size_t>(sy) * bw + sx];
            }

        double total = 0;
        for (const auto& v : vertical) {
            int mx = static_cast<int>(std::lround(v.mid_x()));
            int my = static_cast<int>(std::lround(v.mid_y()));
            if (mx < node.min_x - r || mx > node.max_x + r || my < node.min_y - r ||
                my > node.max_y + r)
                continue;
            int sx = mx - node.min_x + r, sy = my - node.min_y + r;
            if (stamp[static_cast<size_t>(sy) * bw + sx]) total += v.length;
        }
        double b = area > 0 ? std::min(1.0, total / std::sqrt(area)) : 0.0;
        out.b[s] = b;
        ClassDistribution row;
        for (int l : {1, 2, 3}) row.p[l] = b / 3.0;
        for (int l : {0, 4, 5, 6}) row.p[l] = (1.0 - b) / 4.0;
        row.validate();
        out.rows[s] = row;
    }
    return out;
}

// Facade orientation from vanishing points: building regions are connected
// groups of segments with b above the gate, bounded by the sky/ground lines;
// the dominant VP's horizontal position relative to the region decides the
// orientation.
struct VanishingAttribute {
    std::vector<std::array<double, kNumClasses>> rows;  // P_vanishingl, {0,1}
    std::vector<std::vector<int>> regions;              // member segment ids
    bool flag = false;
};

inline VanishingAttribute estimate_vanishing(const SegmentGraph& graph,
                                             const std::vector<LineSegment>& segments,
                                             const std::vector<double>& b_scores,
                                             const BoundaryPolyline& sky,
                                             const BoundaryPolyline& ground,
                                             const Config& cfg = Config()) {
    const int W = graph.width, H = graph.height;
    const double gate = cfg.get("b_gate");
    const double vtol = cfg.get("vertical_angle_tol_deg");

    VanishingAttribute out;
    out.rows.resize(graph.n_segments());
    for (auto& r : out.rows) r.fill(0.0);

    // connected groups over the segment graph restricted to b > gate
    std::vector<int> group(graph.n_segments(), -1);
    std::vector<std::vector<int>> adjacency(graph.n_segments());
    for (const auto& e : graph.edges) {
        adjacency[e.i].push_back(e.j);
        adjacency[e.j].push_back(e.i);
    }
    int n_groups = 0;
    for (size_t s = 0; s < graph.n_segments(); ++s) {
        if (group[s] >= 0 || b_scores[s] <= gate) continue;
        std::vector<int> stack = {static_cast<int>(s)};
        group[s] = n_groups;
        while (!stack.empty()) {
            int u = stack.back();
            stack.pop_back();
            out.regions.resize(n_groups + 1);
            out.regions[n_groups].push_back(u);
            for (int v : adjacency[u])
                if (group[v] < 0 && b_scores[v] > gate) {
                    group[v] = n_groups;
                    stack.push_back(v);
                }
        }
        ++n_groups;
    }

    std::vector<LineSegment> non_vertical;
    for (const auto& s : segments)
        if (!is_vertical(s, vtol)) non_vertical.push_back(s);

    std::mt19937 rng(static_cast<uint32_t>(cfg.geti("seed")) + 1);
    for (const auto& region : out.regions) {
        // region extent, clipped to the band between the boundary lines
        double cx = 0;
        double area = 0;
        int min_x = W, max_x = 0, min_y = H, max_y = 0;
        for (int s : region) {
            const auto& node = graph.nodes[s];
            for (int p : node.pixels) {
                int px = p % W, py = p / W;
                int top = sky.valid[px] ? sky.y[px] : 0;
                int bot = ground.valid[px] ? ground.y[px] : H - 1;
                if (py < top || py > bot) continue;
                cx += px;
                area += 1;
                min_x = std::min(min_x, px);
                max_x = std::max(max_x, px);
                min_y = std::min(min_y, py);
                max_y = std::max(max_y, py);
            }
        }
        if (area < 1) continue;
        cx /= area;

        std::vector<LineSegment> in_region;
        for (const auto& s : non_vertical) {
            double mx = s.mid_x(), my = s.mid_y();
            if (mx >= min_x - 5 && mx <= max_x + 5 && my >= min_y - 5 && my <= max_y + 5)
                in_region.push_back(s);
        }
        auto vp = ransac_vp(in_region, rng, cfg.geti("ransac_iters"),
                            cfg.get("ransac_angle_tol_deg"), cfg.geti("ransac_min_inliers"));
        int orientation = -1;
        if (vp) {
            double offset = vp->x - cx;
            if (std::abs(offset) > cfg.get("vp_parallel_frac") * W)
                orientation = static_cast<int>(GeometricClass::PlanarCenter);  // VP at infinity
            else if (std::abs(offset) < cfg.get("vp_center_frac") * W)
                orientation = static_cast<int>(GeometricClass::PlanarCenter);
            else if (offset < 0)
                orientation = static_cast<int>(GeometricClass::PlanarLeft);
            else
                orientation = static_cast<int>(GeometricClass::PlanarRight);
        } else {
            // exactly parallel lines never intersect; a large enough
            // mutually-parallel bundle still reads as fronto-parallel
            int best_bundle = 0;
            for (const auto& a : in_region) {
                int count = 0;
                for (const auto& b : in_region) {
                    double d = std::abs(a.angle - b.angle);
                    d = std::min(d, 180.0 - d);
                    if (d < cfg.get("ransac_angle_tol_deg")) ++count;
                }
                best_bundle = std::max(best_bundle, count);
            }
            if (best_bundle >= cfg.geti("ransac_min_inliers"))
                orientation = static_cast<int>(GeometricClass::PlanarCenter);
        }
        if (orientation < 0) continue;
        for (int s : region) out.rows[s][orientation] = 1.0;
        out.flag = true;
    }
    return out;
}

}  // namespace gal

#endif

#ifndef GAL_HORIZON_HPP
#define GAL_HORIZON_HPP

#include <optional>
#include <random>

#include "gal/boundary.hpp"
#include "gal/gmm.hpp"

namespace gal {

enum class SceneMode { Natural, Building };

// Building scenes announce themselves by strong vertical line segments.
inline SceneMode scene_mode(const std::vector<LineSegment>& segments, int H,
                            const Config& cfg = Config()) {
    double min_len = cfg.get("building_min_len_frac") * H;
    double tol = cfg.get("vertical_angle_tol_deg");
    double total = 0;
    for (const auto& s : segments)
        if (is_vertical(s, tol) && s.length >= min_len) total += s.length;
    return total >= cfg.get("building_total_len_frac") * H ? SceneMode::Building
                                                           : SceneMode::Natural;
}

struct VanishingPoint {
    double x = 0, y = 0;
    int inliers = 0;
};

namespace detail {

inline bool line_intersection(const LineSegment& a, const LineSegment& b, double& x,
                              double& y) {
    double d1x = a.x2 - a.x1, d1y = a.y2 - a.y1;
    double d2x = b.x2 - b.x1, d2y = b.y2 - b.y1;
    double den = d1x * d2y - d1y * d2x;
    if (std::abs(den) < 1e-9) return false;
    double t = ((b.x1 - a.x1) * d2y - (b.y1 - a.y1) * d2x) / den;
    x = a.x1 + t * d1x;
    y = a.y1 + t * d1y;
    return true;
}

// angular residual between a segment's direction and the direction from its
// midpoint to the candidate vanishing point, degrees in [0,90]
inline double vp_residual_deg(const LineSegment& s, double vx, double vy) {
    double sx = s.x2 - s.x1, sy = s.y2 - s.y1;
    double px = vx - s.mid_x(), py = vy - s.mid_y();
    double cross = sx * py - sy * px;
    double dot = sx * px + sy * py;
    double ang = std::abs(std::atan2(cross, dot)) * 180.0 / M_PI;
    return std::min(ang, 180.0 - ang);
}

}  // namespace detail

// RANSAC over pairwise intersections of the given segments.
inline std::optional<VanishingPoint> ransac_vp(const std::vector<LineSegment>& segments,
                                               std::mt19937& rng, int iters,
                                               double angle_tol_deg, int min_inliers,
                                               std::vector<char>* inlier_mask = nullptr) {
    if (segments.size() < 2) return std::nullopt;
    std::uniform_int_distribution<int> pick(0, static_cast<int>(segments.size()) - 1);
    VanishingPoint best;
    std::vector<char> best_mask;
    for (int it = 0; it < iters; ++it) {
        int i = pick(rng), j = pick(rng);
        if (i == j) continue;
        double vx, vy;
        if (!detail::line_intersection(segments[i], segments[j], vx, vy)) continue;
        int count = 0;
        std::vector<char> mask(segments.size(), 0);
        for (size_t k = 0; k < segments.size(); ++k)
            if (detail::vp_residual_deg(segments[k], vx, vy) < angle_tol_deg) {
                mask[k] = 1;
                ++count;
            }
        if (count > best.inliers) {
            best = {vx, vy, count};
            best_mask = std::move(mask);
        }
    }
    if (best.inliers < min_inliers) return std::nullopt;
    // least-squares refinement over the inlier lines (perpendicular distance)
    double a11 = 0, a12 = 0, a22 = 0, b1 = 0, b2 = 0;
    for (size_t k = 0; k < segments.size(); ++k) {
        if (!best_mask[k]) continue;
        const auto& s = segments[k];
        double nx = -(s.y2 - s.y1), ny = s.x2 - s.x1;
        double norm = std::hypot(nx, ny);
        nx /= norm;
        ny /= norm;
        double c = nx * s.x1 + ny * s.y1;
        a11 += nx * nx;
        a12 += nx * ny;
        a22 += ny * ny;
        b1 += nx * c;
        b2 += ny * c;
    }
    double det = a11 * a22 - a12 * a12;
    if (std::abs(det) > 1e-9) {
        best.x = (a22 * b1 - a12 * b2) / det;
        best.y = (a11 * b2 - a12 * b1) / det;
    }
    if (inlier_mask) *inlier_mask = best_mask;
    return best;
}

/**
 * Horizon for natural scenes: near-horizontal segments vote into row bins,
 * each pixel weighted by edge probability times a centered Gaussian location
 * prior; the answer is the vote-weighted mean row of the dominant bin.
 * Absent when no bin dominates the mean bin vote.
 */
inline std::optional<double> horizon_natural(const std::vector<LineSegment>& segments,
                                             const EvidenceMaps& ev, int H, int W,
                                             const Config& cfg = Config()) {
    const int n_bins = cfg.geti("horizon_bins");
    const double bin_h = static_cast<double>(H) / n_bins;
    const double tol = cfg.get("horizon_angle_tol_deg");
    const double sigma = cfg.get("horizon_prior_sigma_frac") * H;
    const double mu = 0.5 * H;

    std::vector<double> votes(n_bins, 0.0), row_sum(n_bins, 0.0);
    for (const auto& s : segments) {
        if (!is_near_horizontal(s, tol)) continue;
        int x1 = std::clamp(static_cast<int>(std::lround(s.x1)), 0, W - 1);
        int y1 = std::clamp(static_cast<int>(std::lround(s.y1)), 0, H - 1);
        int x2 = std::clamp(static_cast<int>(std::lround(s.x2)), 0, W - 1);
        int y2 = std::clamp(static_cast<int>(std::lround(s.y2)), 0, H - 1);
        bresenham(x1, y1, x2, y2, [&](int x, int y) {
            double prior = std::exp(-0.5 * (y - mu) * (y - mu) / (sigma * sigma));
            // the edge map is NMS-thinned; tolerate a one-row offset
            double e = ev.edge_map.at(x, y);
            if (y > 0) e = std::max(e, ev.edge_map.at(x, y - 1));
            if (y + 1 < H) e = std::max(e, ev.edge_map.at(x, y + 1));
            double w = e * prior;
            int bin = std::min(n_bins - 1, static_cast<int>(y / bin_h));
            votes[bin] += w;
            row_sum[bin] += w * y;
        });
    }
    int best = 0;
    double total = 0;
    for (int b = 0; b < n_bins; ++b) {
        total += votes[b];
        if (votes[b] > votes[best]) best = b;
    }
    if (total <= 0) return std::nullopt;
    // dominance: the winning bin must clearly exceed the mean bin vote
    if (votes[best] < cfg.get("horizon_dominance") * (total / n_bins)) return std::nullopt;
    return row_sum[best] / votes[best];
}

// Horizon for building scenes: a horizontal line through >= 2 horizontal
// vanishing points estimated by repeated RANSAC with inlier removal.
inline std::optional<double> horizon_building(const std::vector<LineSegment>& segments,
                                              const Config& cfg = Config()) {
    const double vtol = cfg.get("vertical_angle_tol_deg");
    std::vector<LineSegment> pool;
    for (const auto& s : segments)
        if (!is_vertical(s, vtol)) pool.push_back(s);

    std::mt19937 rng(static_cast<uint32_t>(cfg.geti("seed")));
    std::vector<double> vp_ys;
    for (int round = 0; round < 3 && pool.size() >= 2; ++round) {
        std::vector<char> mask;
        auto vp = ransac_vp(pool, rng, cfg.geti("ransac_iters"),
                            cfg.get("ransac_angle_tol_deg"), cfg.geti("ransac_min_inliers"),
                            &mask);
        if (!vp) break;
        vp_ys.push_back(vp->y);
        std::vector<LineSegment> rest;
        for (size_t k = 0; k < pool.size(); ++k)
            if (!mask[k]) rest.push_back(pool[k]);
        pool = std::move(rest);
    }
    if (vp_ys.size() < 2) return std::nullopt;
    double mean = 0;
    for (double y : vp_ys) mean += y;
    return mean / vp_ys.size();
}

/**
 * Horizon-driven refinement: Gaussian mixtures over the colors of the
 * confident regions (sky above the horizon, support below) re-score the
 * conflicting segments. The sky/support mass of P_initial is redistributed
 * by the two model likelihoods; the vertical classes keep their own mass.
 */
inline std::optional<std::vector<ClassDistribution>> gmm_refine(
    const Raster& img, const SegmentGraph& graph, const std::vector<int>& labels3,
    double horizon_y, const std::vector<ClassDistribution>& p_initial,
    const Config& cfg = Config()) {
    const size_t n = graph.n_segments();
    if (labels3.size() != n || p_initial.size() != n)
        throw ParamError("gmm_refine: per-segment input size mismatch");

    auto pixel_rgb = [&](int p) -> std::array<double, 3> {
        if (img.channels == 3)
            return {img.data[static_cast<size_t>(p) * 3], img.data[static_cast<size_t>(p) * 3 + 1],
                    img.data[static_cast<size_t>(p) * 3 + 2]};
        return {img.data[p], img.data[p], img.data[p]};
    };

    std::vector<std::array<double, 3>> sky_pts, support_pts;
    for (size_t s = 0; s < n; ++s) {
        for (int p : graph.nodes[s].pixels) {
            int y = p / img.width;
            if (labels3[s] == kSky3 && y < horizon_y) sky_pts.push_back(pixel_rgb(p));
            if (labels3[s] == kSupport3 && y > horizon_y) support_pts.push_back(pixel_rgb(p));
        }
    }
    if (sky_pts.empty() || support_pts.empty()) return std::nullopt;

    const int k = cfg.geti("gmm_components");
    const int iters = cfg.geti("gmm_iters");
    const double tol = cfg.get("gmm_tol");
    GmmModel sky_model = fit_gmm(sky_pts, k, iters, tol);
    GmmModel support_model = fit_gmm(support_pts, k, iters, tol);

    std::vector<ClassDistribution> rows(n, ClassDistribution::uniform());
    for (size_t s = 0; s < n; ++s) {
        if (labels3[s] == kVertical3) continue;
        bool above = graph.nodes[s].cy < horizon_y;
        bool confident = (labels3[s] == kSky3 && above) || (labels3[s] == kSupport3 && !above);
        if (confident) continue;
        double l_sky = 0, l_sup = 0;
        for (int p : graph.nodes[s].pixels) {
            auto rgb = pixel_rgb(p);
            l_sky += sky_model.pdf(rgb);
            l_sup += support_model.pdf(rgb);
        }
        l_sky /= graph.nodes[s].area;
        l_sup /= graph.nodes[s].area;
        double q = l_sky + l_sup > 0 ? l_sky / (l_sky + l_sup) : 0.5;
        const auto& init = p_initial[s];
        double kappa = init.p[static_cast<int>(GeometricClass::Support)] +
                       init.p[static_cast<int>(GeometricClass::Sky)];
        ClassDistribution row;
        row.p[static_cast<int>(GeometricClass::Sky)] = q * kappa;
        row.p[static_cast<int>(GeometricClass::Support)] = (1.0 - q) * kappa;
        for (int v = 1; v <= 5; ++v) row.p[v] = init.p[v];  // vertical mass unchanged
        row.validate();
        rows[s] = row;
    }
    return rows;
}

}  // namespace gal

#endif

#ifndef GAL_EVIDENCE_HPP
#define GAL_EVIDENCE_HPP

#include <deque>

#include "gal/config.hpp"
#include "gal/imgproc.hpp"
#include "gal/lines.hpp"

namespace gal {

// The three boundary-evidence maps of the sky/ground line validation product.
struct EvidenceMaps {
    Raster line_map;          // P_LS, binary
    Raster edge_map;          // P_SE in [0,1]
    Raster defocus_edge_map;  // P_DF in [0,1]
};

namespace detail {

// Smooth, take the gradient magnitude, suppress non-maxima along the
// gradient direction, then normalize by the 99th percentile (with an
// absolute floor so near-flat fields do not blow up) and clamp to [0,1].
inline Raster nms_normalized_gradient(const Field& src, double sigma, double floor) {
    Field sm = gaussian_blur(src, sigma);
    Field gx, gy;
    gradients(sm, gx, gy);
    const int W = src.width, H = src.height;
    Field mag(W, H);
    for (size_t p = 0; p < mag.v.size(); ++p) mag.v[p] = std::hypot(gx.v[p], gy.v[p]);

    Field nms(W, H);
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
            double m = mag.at(x, y);
            if (m <= 0) continue;
            double ang = std::atan2(gy.at(x, y), gx.at(x, y)) * 180.0 / M_PI;
            if (ang < 0) ang += 180.0;
            int dx, dy;
            if (ang < 22.5 || ang >= 157.5) {
                dx = 1;
                dy = 0;
            } else if (ang < 67.5) {
                dx = 1;
                dy = 1;
            } else if (ang < 112.5) {
                dx = 0;
                dy = 1;
            } else {
                dx = -1;
                dy = 1;
            }
            auto sample = [&](int xx, int yy) {
                if (xx < 0 || yy < 0 || xx >= W || yy >= H) return 0.0;
                return mag.at(xx, yy);
            };
            if (m >= sample(x + dx, y + dy) && m >= sample(x - dx, y - dy)) nms.at(x, y) = m;
        }

    double p99 = percentile(nms.v, 0.99);
    double norm = std::max(p99, floor);
    Raster out(W, H, 1);
    for (size_t p = 0; p < nms.v.size(); ++p)
        out.data[p] = std::clamp(nms.v[p] / norm, 0.0, 1.0);
    return out;
}

}  // namespace detail

inline Raster edge_probability(const Raster& img, const Config& cfg = Config()) {
    return detail::nms_normalized_gradient(to_gray(img), cfg.get("edge_sigma"),
                                           cfg.get("edge_norm_floor"));
}

/**
 * Defocus-edge map in the spirit of Zhuo & Sim ("Defocus map estimation from
 * a single image", Pattern Recognition 2011): re-blur the image, estimate the
 * local blur scale at edge pixels from the gradient ratio, densify by
 * nearest-edge propagation plus box smoothing, and report where the dense
 * blur estimate itself changes.
 */
inline Raster defocus_map(const Raster& img, const Config& cfg = Config()) {
    const int W = img.width, H = img.height;
    const double sigma0 = cfg.get("defocus_sigma0");
    const double max_sigma = cfg.get("defocus_max_sigma");
    const double edge_threshold = cfg.get("defocus_edge_threshold");

    Raster edges = edge_probability(img, cfg);
    Field gray = to_gray(img);
    Field mag = gradient_magnitude(gray);
    Field mag_blur = gradient_magnitude(gaussian_blur(gray, sigma0));

    std::vector<int> edge_px;
    Field raw_sigma(W, H, 0.0);
    for (int p = 0; p < W * H; ++p) {
        if (edges.data[p] <= edge_threshold) continue;
        double r = mag.v[p] / std::max(mag_blur.v[p], 1e-12);
        double s = sigma0 / std::sqrt(std::max(r * r - 1.0, 1e-6));
        raw_sigma.v[p] = std::clamp(s, 0.0, max_sigma);
        edge_px.push_back(p);
    }
    if (edge_px.empty()) return Raster(W, H, 1, 0.0);  // no edges, no defocus evidence

    // the ratio estimate is unreliable at corners and junctions; replace each
    // estimate by the median over nearby edge pixels
    Field dense(W, H, 0.0);
    std::vector<char> assigned(static_cast<size_t>(W) * H, 0);
    std::deque<int> queue;
    std::vector<double> window;
    for (int p : edge_px) {
        int px = p % W, py = p / W;
        window.clear();
        for (int dy = -3; dy <= 3; ++dy)
            for (int dx = -3; dx <= 3; ++dx) {
                int x = px + dx, y = py + dy;
                if (x < 0 || y < 0 || x >= W || y >= H) continue;
                int q = y * W + x;
                if (edges.data[q] > edge_threshold) window.push_back(raw_sigma.v[q]);
            }
        std::nth_element(window.begin(), window.begin() + window.size() / 2, window.end());
        dense.v[p] = window[window.size() / 2];
        assigned[p] = 1;
        queue.push_back(p);
    }

    // nearest-edge assignment by multi-source BFS, scan order breaking ties
    while (!queue.empty()) {
        int p = queue.front();
        queue.pop_front();
        int x = p % W, y = p / W;
        const int nx[4] = {x - 1, x + 1, x, x};
        const int ny[4] = {y, y, y - 1, y + 1};
        for (int i = 0; i < 4; ++i) {
            if (nx[i] < 0 || ny[i] < 0 || nx[i] >= W || ny[i] >= H) continue;
            int q = ny[i] * W + nx[i];
            if (assigned[q]) continue;
            assigned[q] = 1;
            dense.v[q] = dense.v[p];
            queue.push_back(q);
        }
    }
    dense = box_blur(dense, cfg.geti("defocus_box_radius"));

    return detail::nms_normalized_gradient(dense, cfg.get("edge_sigma"),
                                           cfg.get("defocus_norm_floor"));
}

// Rasterize detected segments into the binary P_LS map.
inline Raster rasterize_segments(const std::vector<LineSegment>& segments, int width,
                                 int height) {
    Raster map(width, height, 1, 0.0);
    for (const auto& s : segments) {
        int x1 = std::clamp(static_cast<int>(std::lround(s.x1)), 0, width - 1);
        int y1 = std::clamp(static_cast<int>(std::lround(s.y1)), 0, height - 1);
        int x2 = std::clamp(static_cast<int>(std::lround(s.x2)), 0, width - 1);
        int y2 = std::clamp(static_cast<int>(std::lround(s.y2)), 0, height - 1);
        bresenham(x1, y1, x2, y2, [&](int x, int y) { map.at(x, y) = 1.0; });
    }
    return map;
}

inline EvidenceMaps build_evidence(const Raster& img, const std::vector<LineSegment>& segments,
                                   const Config& cfg = Config()) {
    EvidenceMaps ev;
    ev.line_map = rasterize_segments(segments, img.width, img.height);
    ev.edge_map = edge_probability(img, cfg);
    ev.defocus_edge_map = defocus_map(img, cfg);
    return ev;
}

}  // namespace gal

#endif

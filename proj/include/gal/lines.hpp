#ifndef GAL_LINES_HPP
#define GAL_LINES_HPP

#include <unordered_set>

#include "gal/config.hpp"
#include "gal/imgproc.hpp"

namespace gal {

struct LineSegment {
    double x1 = 0, y1 = 0, x2 = 0, y2 = 0;
    double length = 0;
    double angle = 0;  // degrees in [0,180)

    double mid_x() const { return 0.5 * (x1 + x2); }
    double mid_y() const { return 0.5 * (y1 + y2); }
};

inline double segment_angle_deg(double x1, double y1, double x2, double y2) {
    double a = std::atan2(y2 - y1, x2 - x1) * 180.0 / M_PI;
    a = std::fmod(a + 360.0, 180.0);
    if (a >= 180.0) a -= 180.0;
    return a;
}

/**
 * Line segments by gradient-aligned region growing in the spirit of LSD
 * ("LSD: A Fast Line Segment Detector with a False Detection Control",
 * von Gioi et al., PAMI 2010), without the NFA validation step. Regions grow
 * over 8-neighbours whose gradient orientation (mod 180) stays within the
 * tolerance of the running region direction, then a rectangle is fitted via
 * second moments.
 */
inline std::vector<LineSegment> detect_segments(const Raster& img, const Config& cfg = Config()) {
    const double tol = cfg.get("lsd_angle_tol_deg") * M_PI / 180.0;
    const double min_length = cfg.get("lsd_min_length");
    const double grad_threshold = cfg.get("lsd_grad_threshold");
    const int W = img.width, H = img.height;

    Field gray = to_gray(img);
    Field gx, gy;
    gradients(gray, gx, gy);
    Field mag(W, H);
    std::vector<double> theta(static_cast<size_t>(W) * H);  // orientation mod pi
    for (size_t p = 0; p < mag.v.size(); ++p) {
        mag.v[p] = std::hypot(gx.v[p], gy.v[p]);
        double t = std::atan2(gy.v[p], gx.v[p]);
        if (t < 0) t += M_PI;
        if (t >= M_PI) t -= M_PI;
        theta[p] = t;
    }

    std::vector<int> order;
    order.reserve(mag.v.size());
    for (int p = 0; p < W * H; ++p)
        if (mag.v[p] > grad_threshold) order.push_back(p);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (mag.v[a] != mag.v[b]) return mag.v[a] > mag.v[b];
        return a < b;
    });

    // circular distance between orientations mod pi
    auto angle_dist = [](double a, double b) {
        double d = std::abs(a - b);
        return std::min(d, M_PI - d);
    };

    std::vector<char> used(static_cast<size_t>(W) * H, 0);
    std::vector<LineSegment> segments;
    std::vector<int> region;
    for (int seed : order) {
        if (used[seed]) continue;
        region.clear();
        region.push_back(seed);
        used[seed] = 1;
        // orientation accumulated with the angle-doubling trick (mod pi data)
        double sx = std::cos(2 * theta[seed]), sy = std::sin(2 * theta[seed]);
        double region_angle = theta[seed];
        for (size_t head = 0; head < region.size(); ++head) {
            int p = region[head];
            int px = p % W, py = p / W;
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    int x = px + dx, y = py + dy;
                    if (x < 0 || y < 0 || x >= W || y >= H) continue;
                    int q = y * W + x;
                    if (used[q] || mag.v[q] <= grad_threshold) continue;
                    if (angle_dist(theta[q], region_angle) > tol) continue;
                    used[q] = 1;
                    region.push_back(q);
                    sx += std::cos(2 * theta[q]);
                    sy += std::sin(2 * theta[q]);
                    region_angle = 0.5 * std::atan2(sy, sx);
                    if (region_angle < 0) region_angle += M_PI;
                }
        }
        if (region.size() < 5) continue;

        // rectangle fit: magnitude-weighted principal axis
        double wsum = 0, cx = 0, cy = 0;
        for (int p : region) {
            double w = mag.v[p];
            wsum += w;
            cx += w * (p % W);
            cy += w * (p / W);
        }
        cx /= wsum;
        cy /= wsum;
        double mxx = 0, mxy = 0, myy = 0;
        for (int p : region) {
            double w = mag.v[p];
            double dx = (p % W) - cx, dy = (p / W) - cy;
            mxx += w * dx * dx;
            mxy += w * dx * dy;
            myy += w * dy * dy;
        }
        // leading eigenvector of [[mxx,mxy],[mxy,myy]]
        double tr = mxx + myy;
        double det = mxx * myy - mxy * mxy;
        double l1 = 0.5 * tr + std::sqrt(std::max(0.25 * tr * tr - det, 0.0));
        double dx, dy;
        if (std::abs(mxy) > 1e-12) {
            dx = l1 - myy;
            dy = mxy;
        } else {
            dx = mxx >= myy ? 1 : 0;
            dy = mxx >= myy ? 0 : 1;
        }
        double norm = std::hypot(dx, dy);
        if (norm < 1e-12) continue;
        dx /= norm;
        dy /= norm;
        double tmin = std::numeric_limits<double>::infinity(), tmax = -tmin;
        double omin = tmin, omax = -tmin;
        for (int p : region) {
            double rx = (p % W) - cx, ry = (p / W) - cy;
            double t = rx * dx + ry * dy;
            double o = -rx * dy + ry * dx;
            tmin = std::min(tmin, t);
            tmax = std::max(tmax, t);
            omin = std::min(omin, o);
            omax = std::max(omax, o);
        }
        double length = tmax - tmin;
        double width = std::max(omax - omin, 1.0);
        if (length < min_length) continue;
        if (region.size() / (length * width) < 0.3) continue;  // not line-shaped
        if (length < 2.5 * width) continue;  // blob-shaped region, not a segment

        LineSegment s;
        s.x1 = cx + tmin * dx;
        s.y1 = cy + tmin * dy;
        s.x2 = cx + tmax * dx;
        s.y2 = cy + tmax * dy;
        if (std::tie(s.y1, s.x1) > std::tie(s.y2, s.x2)) {
            std::swap(s.x1, s.x2);
            std::swap(s.y1, s.y2);
        }
        s.length = std::hypot(s.x2 - s.x1, s.y2 - s.y1);
        s.angle = segment_angle_deg(s.x1, s.y1, s.x2, s.y2);
        segments.push_back(s);
    }
    std::sort(segments.begin(), segments.end(), [](const LineSegment& a, const LineSegment& b) {
        return std::tie(a.y1, a.x1, a.y2, a.x2) < std::tie(b.y1, b.x1, b.y2, b.x2);
    });
    return segments;
}

inline bool is_vertical(const LineSegment& s, double tol_deg) {
    return std::abs(s.angle - 90.0) <= tol_deg;
}

inline bool is_near_horizontal(const LineSegment& s, double tol_deg) {
    return s.angle <= tol_deg || s.angle >= 180.0 - tol_deg;
}

// Building evidence b(s): total vertical-segment length inside the region,
// normalized by sqrt(area) and clamped to 1.
inline double vertical_line_score(const std::vector<LineSegment>& segments,
                                  const std::vector<int>& region_pixels, int width,
                                  double angle_tol_deg = 5.0) {
    if (region_pixels.empty()) throw ParamError("vertical_line_score: empty region");
    std::unordered_set<int> in_region(region_pixels.begin(), region_pixels.end());
    double total = 0;
    for (const auto& s : segments) {
        if (!is_vertical(s, angle_tol_deg)) continue;
        int mx = static_cast<int>(std::lround(s.mid_x()));
        int my = static_cast<int>(std::lround(s.mid_y()));
        if (in_region.count(my * width + mx)) total += s.length;
    }
    return std::min(1.0, total / std::sqrt(static_cast<double>(region_pixels.size())));
}

inline void write_segments(const std::vector<LineSegment>& segments, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    for (const auto& s : segments)
        out << s.x1 << ' ' << s.y1 << ' ' << s.x2 << ' ' << s.y2 << ' ' << s.length << ' '
            << s.angle << '\n';
}

}  // namespace gal

#endif

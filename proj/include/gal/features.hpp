#ifndef GAL_FEATURES_HPP
#define GAL_FEATURES_HPP

#include "gal/imgproc.hpp"
#include "gal/segmentation.hpp"

namespace gal {

inline constexpr int kFeatureDim = 19;

// Per-segment descriptor: color mean/std (6), normalized centroid + bbox
// height (3), 8-bin gradient-orientation histogram + mean magnitude (9),
// area fraction (1).
inline std::vector<std::vector<double>> extract_features(const Raster& img,
                                                         const SegmentGraph& graph) {
    if (img.width != graph.width || img.height != graph.height)
        throw ParamError("extract_features: dimension mismatch");
    const int W = img.width, H = img.height;
    Field gray = to_gray(img);
    Field gx, gy;
    gradients(gray, gx, gy);

    std::vector<std::vector<double>> out;
    out.reserve(graph.nodes.size());
    for (const auto& node : graph.nodes) {
        std::vector<double> f(kFeatureDim, 0.0);
        std::array<double, 3> mean{}, var{};
        std::array<double, 8> hist{};
        double mag_sum = 0, hist_weight = 0;
        auto sample = [&](int p, int c) {
            return img.channels == 3 ? img.data[static_cast<size_t>(p) * 3 + c] : img.data[p];
        };
        for (int p : node.pixels) {
            for (int c = 0; c < 3; ++c) mean[c] += sample(p, c);
            double m = std::hypot(gx.v[p], gy.v[p]);
            mag_sum += m;
            if (m > 0) {
                // bins centered on 0 degrees so horizontal edges do not
                // alias across the wrap-around
                double ang = std::atan2(gy.v[p], gx.v[p]) * 180.0 / M_PI;
                ang = std::fmod(ang + 180.0 + 11.25, 180.0);
                int bin = std::min(7, static_cast<int>(ang / 22.5));
                hist[bin] += m;
                hist_weight += m;
            }
        }
        const double n = node.area;
        for (int c = 0; c < 3; ++c) mean[c] /= n;
        for (int p : node.pixels)
            for (int c = 0; c < 3; ++c) {
                double d = sample(p, c) - mean[c];
                var[c] += d * d;
            }
        for (int c = 0; c < 3; ++c) {
            f[c] = mean[c];
            f[3 + c] = std::sqrt(var[c] / n);
        }
        f[6] = (node.cx + 0.5) / W;
        f[7] = (node.cy + 0.5) / H;
        f[8] = (node.max_y - node.min_y + 1) / static_cast<double>(H);
        if (hist_weight > 0) {
            for (int b = 0; b < 8; ++b) f[9 + b] = hist[b] / hist_weight;
        } else {
            for (int b = 0; b < 8; ++b) f[9 + b] = 1.0 / 8.0;  // zero-gradient convention
        }
        f[17] = mag_sum / n;
        f[18] = n / (static_cast<double>(W) * H);
        out.push_back(std::move(f));
    }
    return out;
}

}  // namespace gal

#endif

#ifndef GAL_IMGPROC_HPP
#define GAL_IMGPROC_HPP

#include <cmath>
#include <functional>
#include <queue>
#include <vector>

#include "gal/core.hpp"

namespace gal {

// Unconstrained scalar field; working buffer for intermediate maps that are
// not restricted to [0,1] like Raster is.
struct Field {
    int width = 0;
    int height = 0;
    std::vector<double> v;

    Field() = default;
    Field(int w, int h, double fill = 0.0)
        : width(w), height(h), v(static_cast<size_t>(w) * h, fill) {}

    double& at(int x, int y) { return v[static_cast<size_t>(y) * width + x]; }
    double at(int x, int y) const { return v[static_cast<size_t>(y) * width + x]; }
};

inline Field to_gray(const Raster& img) {
    Field g(img.width, img.height);
    if (img.channels == 1) {
        for (size_t i = 0; i < img.data.size(); ++i) g.v[i] = img.data[i];
    } else {
        for (int y = 0; y < img.height; ++y)
            for (int x = 0; x < img.width; ++x)
                g.at(x, y) = 0.299 * img.at(x, y, 0) + 0.587 * img.at(x, y, 1) +
                             0.114 * img.at(x, y, 2);
    }
    return g;
}

inline std::vector<double> gaussian_kernel(double sigma) {
    int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<double> k(2 * radius + 1);
    double sum = 0;
    for (int i = -radius; i <= radius; ++i) {
        k[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));
        sum += k[i + radius];
    }
    for (double& v : k) v /= sum;
    return k;
}

// Separable Gaussian blur with edge replication.
inline Field gaussian_blur(const Field& in, double sigma) {
    if (sigma <= 0) return in;
    auto k = gaussian_kernel(sigma);
    int radius = (static_cast<int>(k.size()) - 1) / 2;
    Field tmp(in.width, in.height), out(in.width, in.height);
    for (int y = 0; y < in.height; ++y)
        for (int x = 0; x < in.width; ++x) {
            double s = 0;
            for (int i = -radius; i <= radius; ++i) {
                int xx = std::clamp(x + i, 0, in.width - 1);
                s += k[i + radius] * in.at(xx, y);
            }
            tmp.at(x, y) = s;
        }
    for (int y = 0; y < in.height; ++y)
        for (int x = 0; x < in.width; ++x) {
            double s = 0;
            for (int i = -radius; i <= radius; ++i) {
                int yy = std::clamp(y + i, 0, in.height - 1);
                s += k[i + radius] * tmp.at(x, yy);
            }
            out.at(x, y) = s;
        }
    return out;
}

inline Raster gaussian_blur(const Raster& in, double sigma) {
    Raster out = in;
    for (int c = 0; c < in.channels; ++c) {
        Field f(in.width, in.height);
        for (int y = 0; y < in.height; ++y)
            for (int x = 0; x < in.width; ++x) f.at(x, y) = in.at(x, y, c);
        f = gaussian_blur(f, sigma);
        for (int y = 0; y < in.height; ++y)
            for (int x = 0; x < in.width; ++x)
                out.at(x, y, c) = std::clamp(f.at(x, y), 0.0, 1.0);
    }
    return out;
}

// Central differences with edge replication.
inline void gradients(const Field& in, Field& gx, Field& gy) {
    gx = Field(in.width, in.height);
    gy = Field(in.width, in.height);
    for (int y = 0; y < in.height; ++y)
        for (int x = 0; x < in.width; ++x) {
            int xm = std::max(0, x - 1), xp = std::min(in.width - 1, x + 1);
            int ym = std::max(0, y - 1), yp = std::min(in.height - 1, y + 1);
            gx.at(x, y) = 0.5 * (in.at(xp, y) - in.at(xm, y));
            gy.at(x, y) = 0.5 * (in.at(x, yp) - in.at(x, ym));
        }
}

inline Field gradient_magnitude(const Field& in) {
    Field gx, gy;
    gradients(in, gx, gy);
    Field m(in.width, in.height);
    for (size_t i = 0; i < m.v.size(); ++i) m.v[i] = std::hypot(gx.v[i], gy.v[i]);
    return m;
}

// Mean filter over a (2r+1)^2 window clipped to the image.
inline Field box_blur(const Field& in, int radius) {
    Field out(in.width, in.height);
    for (int y = 0; y < in.height; ++y)
        for (int x = 0; x < in.width; ++x) {
            double s = 0;
            int n = 0;
            for (int dy = -radius; dy <= radius; ++dy)
                for (int dx = -radius; dx <= radius; ++dx) {
                    int xx = x + dx, yy = y + dy;
                    if (xx < 0 || yy < 0 || xx >= in.width || yy >= in.height) continue;
                    s += in.at(xx, yy);
                    ++n;
                }
            out.at(x, y) = s / n;
        }
    return out;
}

// Chebyshev dilation of a binary field.
inline Field dilate(const Field& in, int radius) {
    Field out(in.width, in.height);
    for (int y = 0; y < in.height; ++y)
        for (int x = 0; x < in.width; ++x) {
            if (in.at(x, y) <= 0) continue;
            for (int dy = -radius; dy <= radius; ++dy)
                for (int dx = -radius; dx <= radius; ++dx) {
                    int xx = x + dx, yy = y + dy;
                    if (xx < 0 || yy < 0 || xx >= in.width || yy >= in.height) continue;
                    out.at(xx, yy) = std::max(out.at(xx, yy), in.at(x, y));
                }
        }
    return out;
}

// Nearest-rank percentile, q in [0,1].
inline double percentile(std::vector<double> values, double q) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    size_t idx = static_cast<size_t>(std::floor(q * (values.size() - 1)));
    return values[idx];
}

// Visit the pixels of the segment (x0,y0)-(x1,y1), 1 px wide.
inline void bresenham(int x0, int y0, int x1, int y1,
                      const std::function<void(int, int)>& visit) {
    int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
    int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
    int err = dx + dy;
    int x = x0, y = y0;
    while (true) {
        visit(x, y);
        if (x == x1 && y == y1) break;
        int e2 = 2 * err;
        if (e2 >= dy) {
            err += dy;
            x += sx;
        }
        if (e2 <= dx) {
            err += dx;
            y += sy;
        }
    }
}

// 4-connected components over an integer key map: pixels join a component
// when they share the same key. Returns component ids in scan-first order
// and the component count.
inline int connected_components(const std::vector<int>& keys, int width, int height,
                                std::vector<int>& comp) {
    comp.assign(keys.size(), -1);
    int next = 0;
    std::vector<int> stack;
    for (size_t start = 0; start < keys.size(); ++start) {
        if (comp[start] >= 0) continue;
        int id = next++;
        stack.push_back(static_cast<int>(start));
        comp[start] = id;
        while (!stack.empty()) {
            int p = stack.back();
            stack.pop_back();
            int x = p % width, y = p / width;
            const int nx[4] = {x - 1, x + 1, x, x};
            const int ny[4] = {y, y, y - 1, y + 1};
            for (int i = 0; i < 4; ++i) {
                if (nx[i] < 0 || ny[i] < 0 || nx[i] >= width || ny[i] >= height) continue;
                int q = ny[i] * width + nx[i];
                if (comp[q] < 0 && keys[q] == keys[p]) {
                    comp[q] = id;
                    stack.push_back(q);
                }
            }
        }
    }
    return next;
}

}  // namespace gal

#endif

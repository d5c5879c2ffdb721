#ifndef GAL_SEGMENTATION_HPP
#define GAL_SEGMENTATION_HPP

#include <map>
#include <numeric>
#include <unordered_map>

#include "gal/core.hpp"
#include "gal/imgproc.hpp"

namespace gal {

// Partition of the image into connected segments with contiguous ids.
struct Segmentation {
    int width = 0;
    int height = 0;
    int n_segments = 0;
    std::vector<int> ids;  // per pixel, row major
    std::string method;

    int at(int x, int y) const { return ids[static_cast<size_t>(y) * width + x]; }

    void validate() const {
        if (ids.size() != static_cast<size_t>(width) * height)
            throw InternalError("segmentation: id map size mismatch");
        std::vector<char> seen(n_segments, 0);
        for (int id : ids) {
            if (id < 0 || id >= n_segments) throw InternalError("segmentation: id out of range");
            seen[id] = 1;
        }
        for (char s : seen)
            if (!s) throw InternalError("segmentation: unused id");
        std::vector<int> comp;
        if (connected_components(ids, width, height, comp) != n_segments)
            throw InternalError("segmentation: segment not 4-connected");
    }
};

namespace detail {

// relabel arbitrary per-pixel keys to contiguous ids in scan-first order
inline int compact_ids(std::vector<int>& ids) {
    std::unordered_map<int, int> remap;
    int next = 0;
    for (int& id : ids) {
        auto [it, inserted] = remap.try_emplace(id, next);
        if (inserted) ++next;
        id = it->second;
    }
    return next;
}

}  // namespace detail

/**
 * SLIC superpixels ("SLIC Superpixels Compared to State-of-the-Art Superpixel
 * Methods", Achanta et al., PAMI 2012), run directly in RGB. Color distances
 * are measured in 8-bit units so the usual compactness range applies.
 * Stray components are merged into the neighbouring segment with the closest
 * mean color.
 */
inline Segmentation slic(const Raster& img, int k, double compactness) {
    if (img.channels != 3) throw ParamError("slic: need 3 channels");
    if (k < 1) throw ParamError("slic: k must be >= 1");
    if (compactness <= 0) throw ParamError("slic: compactness must be > 0");
    const int W = img.width, H = img.height;
    const int N = W * H;
    if (k > N) throw ParamError("slic: k exceeds pixel count");

    const double step = std::sqrt(static_cast<double>(N) / k);
    int nx = std::max(1, static_cast<int>(std::lround(W / step)));
    int ny = std::max(1, static_cast<int>(std::lround(H / step)));

    struct Center {
        double x, y, r, g, b;
    };
    std::vector<Center> centers;
    centers.reserve(static_cast<size_t>(nx) * ny);
    Field grad = gradient_magnitude(to_gray(img));
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            int cx = static_cast<int>((i + 0.5) * W / nx);
            int cy = static_cast<int>((j + 0.5) * H / ny);
            // move the seed to the lowest-gradient spot in its 3x3 window
            int bx = cx, by = cy;
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    int x = cx + dx, y = cy + dy;
                    if (x < 0 || y < 0 || x >= W || y >= H) continue;
                    if (grad.at(x, y) < grad.at(bx, by)) {
                        bx = x;
                        by = y;
                    }
                }
            centers.push_back({static_cast<double>(bx), static_cast<double>(by),
                               img.at(bx, by, 0), img.at(bx, by, 1), img.at(bx, by, 2)});
        }

    const double spatial_w = compactness / step;
    std::vector<int> ids(N, 0);
    std::vector<double> best(N);
    const int window = static_cast<int>(std::ceil(2 * step));
    for (int iter = 0; iter < 10; ++iter) {
        std::fill(best.begin(), best.end(), std::numeric_limits<double>::infinity());
        for (size_t c = 0; c < centers.size(); ++c) {
            const Center& ce = centers[c];
            int x0 = std::max(0, static_cast<int>(ce.x) - window);
            int x1 = std::min(W - 1, static_cast<int>(ce.x) + window);
            int y0 = std::max(0, static_cast<int>(ce.y) - window);
            int y1 = std::min(H - 1, static_cast<int>(ce.y) + window);
            for (int y = y0; y <= y1; ++y)
                for (int x = x0; x <= x1; ++x) {
                    double dr = (img.at(x, y, 0) - ce.r) * 255.0;
                    double dg = (img.at(x, y, 1) - ce.g) * 255.0;
                    double db = (img.at(x, y, 2) - ce.b) * 255.0;
                    double dc = std::sqrt(dr * dr + dg * dg + db * db);
                    double ds = std::hypot(x - ce.x, y - ce.y);
                    double d = dc + spatial_w * ds;
                    size_t p = static_cast<size_t>(y) * W + x;
                    if (d < best[p]) {
                        best[p] = d;
                        ids[p] = static_cast<int>(c);
                    }
                }
        }
        std::vector<double> sx(centers.size(), 0), sy(centers.size(), 0), sr(centers.size(), 0),
            sg(centers.size(), 0), sb(centers.size(), 0);
        std::vector<int> cnt(centers.size(), 0);
        for (int y = 0; y < H; ++y)
            for (int x = 0; x < W; ++x) {
                int c = ids[static_cast<size_t>(y) * W + x];
                sx[c] += x;
                sy[c] += y;
                sr[c] += img.at(x, y, 0);
                sg[c] += img.at(x, y, 1);
                sb[c] += img.at(x, y, 2);
                ++cnt[c];
            }
        for (size_t c = 0; c < centers.size(); ++c) {
            if (cnt[c] == 0) continue;
            centers[c] = {sx[c] / cnt[c], sy[c] / cnt[c],
                          sr[c] / cnt[c], sg[c] / cnt[c], sb[c] / cnt[c]};
        }
    }

    // connectivity: per cluster keep the largest 4-connected component, then
    // merge every stray component into the neighbour with closest mean color
    std::vector<int> comp;
    int ncomp = connected_components(ids, W, H, comp);
    std::vector<int> area(ncomp, 0), cluster(ncomp, -1);
    std::vector<std::array<double, 3>> mean(ncomp, {0, 0, 0});
    for (int p = 0; p < N; ++p) {
        int c = comp[p];
        ++area[c];
        cluster[c] = ids[p];
        mean[c][0] += img.data[p * 3];
        mean[c][1] += img.data[p * 3 + 1];
        mean[c][2] += img.data[p * 3 + 2];
    }
    for (int c = 0; c < ncomp; ++c)
        for (auto& m : mean[c]) m /= area[c];
    std::vector<int> largest(centers.size(), -1);
    for (int c = 0; c < ncomp; ++c) {
        int& l = largest[cluster[c]];
        if (l < 0 || area[c] > area[l]) l = c;
    }
    std::vector<char> kept(ncomp, 0);
    for (size_t cl = 0; cl < centers.size(); ++cl)
        if (largest[cl] >= 0) kept[largest[cl]] = 1;

    std::vector<int> root(ncomp);
    std::iota(root.begin(), root.end(), 0);
    auto find = [&](int c) {
        while (root[c] != c) c = root[c] = root[root[c]];
        return c;
    };
    for (bool progress = true; progress;) {
        progress = false;
        // adjacency between current roots
        std::map<std::pair<int, int>, char> adj;
        for (int y = 0; y < H; ++y)
            for (int x = 0; x < W; ++x) {
                int a = find(comp[static_cast<size_t>(y) * W + x]);
                if (x + 1 < W) {
                    int b = find(comp[static_cast<size_t>(y) * W + x + 1]);
                    if (a != b) adj[{std::min(a, b), std::max(a, b)}] = 1;
                }
                if (y + 1 < H) {
                    int b = find(comp[static_cast<size_t>(y + 1) * W + x]);
                    if (a != b) adj[{std::min(a, b), std::max(a, b)}] = 1;
                }
            }
        std::vector<std::vector<int>> nbr(ncomp);
        for (const auto& [pr, _] : adj) {
            nbr[pr.first].push_back(pr.second);
            nbr[pr.second].push_back(pr.first);
        }
        bool any_orphan = false;
        for (int c = 0; c < ncomp; ++c) {
            if (find(c) != c || kept[c]) continue;
            any_orphan = true;
            int target = -1;
            double best_d = std::numeric_limits<double>::infinity();
            for (int o : nbr[c]) {
                if (!kept[o]) continue;
                double d = 0;
                for (int ch = 0; ch < 3; ++ch)
                    d += (mean[c][ch] - mean[o][ch]) * (mean[c][ch] - mean[o][ch]);
                if (d < best_d) {
                    best_d = d;
                    target = o;
                }
            }
            if (target >= 0) {
                for (int ch = 0; ch < 3; ++ch)
                    mean[target][ch] = (mean[target][ch] * area[target] +
                                        mean[c][ch] * area[c]) /
                                       (area[target] + area[c]);
                area[target] += area[c];
                root[c] = target;
                progress = true;
            }
        }
        if (any_orphan && !progress) {
            // orphan islands surrounded by orphans: attach to any neighbour
            for (int c = 0; c < ncomp; ++c) {
                if (find(c) != c || kept[c]) continue;
                if (!nbr[c].empty()) {
                    root[c] = nbr[c][0];
                    progress = true;
                    break;
                }
            }
            if (!progress) break;
        }
    }
    for (int p = 0; p < N; ++p) ids[p] = find(comp[p]);

    Segmentation seg;
    seg.width = W;
    seg.height = H;
    seg.ids = std::move(ids);
    seg.n_segments = detail::compact_ids(seg.ids);
    seg.method = "slic";
    seg.validate();
    return seg;
}

/**
 * Graph-based segmentation ("Efficient Graph-Based Image Segmentation",
 * Felzenszwalb & Huttenlocher, IJCV 2004): Kruskal-order merging with the
 * adaptive criterion w <= min(Int(C) + k/|C|), on 8-connected color edges
 * (8-bit units) after a sigma=0.8 presmooth. Components below min_size are
 * absorbed through their cheapest edge.
 */
inline Segmentation graph_segment(const Raster& img, double scale_k, int min_size) {
    if (scale_k <= 0) throw ParamError("graph_segment: scale_k must be > 0");
    if (min_size < 1) throw ParamError("graph_segment: min_size must be >= 1");
    const int W = img.width, H = img.height;
    const int N = W * H;
    Raster sm = gaussian_blur(img, 0.8);

    auto color_dist = [&](int p, int q) {
        double d = 0;
        for (int c = 0; c < sm.channels; ++c) {
            double diff = (sm.data[static_cast<size_t>(p) * sm.channels + c] -
                           sm.data[static_cast<size_t>(q) * sm.channels + c]) *
                          255.0;
            d += diff * diff;
        }
        return std::sqrt(d);
    };

    struct E {
        int a, b;
        double w;
    };
    std::vector<E> edges;
    edges.reserve(static_cast<size_t>(N) * 4);
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
            int p = y * W + x;
            if (x + 1 < W) edges.push_back({p, p + 1, color_dist(p, p + 1)});
            if (y + 1 < H) edges.push_back({p, p + W, color_dist(p, p + W)});
            if (x + 1 < W && y + 1 < H) edges.push_back({p, p + W + 1, color_dist(p, p + W + 1)});
            if (x + 1 < W && y > 0) edges.push_back({p, p - W + 1, color_dist(p, p - W + 1)});
        }
    std::sort(edges.begin(), edges.end(), [](const E& a, const E& b) {
        if (a.w != b.w) return a.w < b.w;
        if (a.a != b.a) return a.a < b.a;
        return a.b < b.b;
    });

    std::vector<int> root(N);
    std::iota(root.begin(), root.end(), 0);
    std::vector<int> size(N, 1);
    std::vector<double> thr(N, scale_k);
    auto find = [&](int p) {
        while (root[p] != p) p = root[p] = root[root[p]];
        return p;
    };
    for (const auto& e : edges) {
        int a = find(e.a), b = find(e.b);
        if (a == b) continue;
        if (e.w <= thr[a] && e.w <= thr[b]) {
            root[b] = a;
            size[a] += size[b];
            thr[a] = e.w + scale_k / size[a];
        }
    }
    for (const auto& e : edges) {
        int a = find(e.a), b = find(e.b);
        if (a == b) continue;
        if (size[a] < min_size || size[b] < min_size) {
            root[b] = a;
            size[a] += size[b];
        }
    }

    // the merge ran on 8-connected edges; re-split on 4-connectivity and
    // absorb what falls below min_size into the closest-color neighbour
    std::vector<int> raw(N);
    for (int p = 0; p < N; ++p) raw[p] = find(p);
    std::vector<int> comp;
    int ncomp = connected_components(raw, W, H, comp);
    std::vector<long> area(ncomp, 0);
    std::vector<std::array<double, 3>> mean(ncomp, {0, 0, 0});
    for (int p = 0; p < N; ++p) {
        int c = comp[p];
        ++area[c];
        for (int ch = 0; ch < img.channels; ++ch)
            mean[c][ch] += img.data[static_cast<size_t>(p) * img.channels + ch];
    }
    for (int c = 0; c < ncomp; ++c)
        for (auto& m : mean[c]) m /= area[c];
    std::vector<int> croot(ncomp);
    std::iota(croot.begin(), croot.end(), 0);
    auto cfind = [&](int c) {
        while (croot[c] != c) c = croot[c] = croot[croot[c]];
        return c;
    };
    for (bool merged = true; merged;) {
        merged = false;
        std::map<std::pair<int, int>, char> adj;
        for (int y = 0; y < H; ++y)
            for (int x = 0; x < W; ++x) {
                int a = cfind(comp[static_cast<size_t>(y) * W + x]);
                if (x + 1 < W) {
                    int b = cfind(comp[static_cast<size_t>(y) * W + x + 1]);
                    if (a != b) adj[{std::min(a, b), std::max(a, b)}] = 1;
                }
                if (y + 1 < H) {
                    int b = cfind(comp[static_cast<size_t>(y + 1) * W + x]);
                    if (a != b) adj[{std::min(a, b), std::max(a, b)}] = 1;
                }
            }
        std::vector<std::vector<int>> nbr(ncomp);
        for (const auto& [pr, _] : adj) {
            nbr[pr.first].push_back(pr.second);
            nbr[pr.second].push_back(pr.first);
        }
        for (int c = 0; c < ncomp; ++c) {
            if (cfind(c) != c || area[c] >= min_size) continue;
            int target = -1;
            double best_d = std::numeric_limits<double>::infinity();
            for (int o : nbr[c]) {
                o = cfind(o);
                if (o == c) continue;
                double d = 0;
                for (int ch = 0; ch < 3; ++ch)
                    d += (mean[c][ch] - mean[o][ch]) * (mean[c][ch] - mean[o][ch]);
                if (d < best_d || (d == best_d && o < target)) {
                    best_d = d;
                    target = o;
                }
            }
            if (target < 0) continue;
            for (int ch = 0; ch < 3; ++ch)
                mean[target][ch] = (mean[target][ch] * area[target] + mean[c][ch] * area[c]) /
                                   (area[target] + area[c]);
            area[target] += area[c];
            croot[c] = target;
            merged = true;
        }
    }

    Segmentation seg;
    seg.width = W;
    seg.height = H;
    seg.ids.resize(N);
    for (int p = 0; p < N; ++p) seg.ids[p] = cfind(comp[p]);
    seg.n_segments = detail::compact_ids(seg.ids);
    seg.method = "fh";
    seg.validate();
    return seg;
}

// Common refinement: pixels share an output id iff they share ids in every
// input and are 4-connected through such pixels.
inline Segmentation intersect_segmentations(const std::vector<Segmentation>& inputs) {
    if (inputs.size() < 2) throw ParamError("intersect: need at least 2 segmentations");
    const int W = inputs[0].width, H = inputs[0].height;
    for (const auto& s : inputs)
        if (s.width != W || s.height != H) throw ParamError("intersect: dimension mismatch");
    const size_t N = static_cast<size_t>(W) * H;
    std::vector<int64_t> key(N, 0);
    for (const auto& s : inputs)
        for (size_t p = 0; p < N; ++p) key[p] = key[p] * s.n_segments + s.ids[p];
    // densify keys so the component pass can use ints
    std::unordered_map<int64_t, int> dense;
    std::vector<int> keys(N);
    for (size_t p = 0; p < N; ++p) {
        auto [it, inserted] = dense.try_emplace(key[p], static_cast<int>(dense.size()));
        keys[p] = it->second;
    }
    Segmentation out;
    out.width = W;
    out.height = H;
    out.n_segments = connected_components(keys, W, H, out.ids);
    out.method = "intersection";
    out.validate();
    return out;
}

inline void write_segmentation_debug(const Segmentation& seg, const std::string& path) {
    // debugging aid only: ids mod 256 as a raw PGM
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << "P5\n" << seg.width << ' ' << seg.height << "\n255\n";
    for (int id : seg.ids) out.put(static_cast<char>(id % 256));
}

// Super-pixel adjacency graph: nodes carry pixel lists and geometry, edges
// carry the 4-adjacent pixel pairs of the shared boundary.
struct SegmentGraph {
    struct Node {
        std::vector<int> pixels;  // linear indices, scan order
        double cx = 0, cy = 0;
        int area = 0;
        int min_x = 0, min_y = 0, max_x = 0, max_y = 0;
    };
    struct Edge {
        int i = 0, j = 0;                            // i < j
        std::vector<std::pair<int, int>> boundary;   // (pixel in i, pixel in j)
    };

    int width = 0;
    int height = 0;
    std::vector<int> ids;
    std::vector<Node> nodes;
    std::vector<Edge> edges;

    int id_at(int x, int y) const { return ids[static_cast<size_t>(y) * width + x]; }
    size_t n_segments() const { return nodes.size(); }
};

inline SegmentGraph build_graph(const Segmentation& seg) {
    seg.validate();
    SegmentGraph g;
    g.width = seg.width;
    g.height = seg.height;
    g.ids = seg.ids;
    g.nodes.resize(seg.n_segments);
    const int W = seg.width, H = seg.height;
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
            int p = y * W + x;
            auto& n = g.nodes[seg.ids[p]];
            if (n.pixels.empty()) {
                n.min_x = n.max_x = x;
                n.min_y = n.max_y = y;
            } else {
                n.min_x = std::min(n.min_x, x);
                n.max_x = std::max(n.max_x, x);
                n.min_y = std::min(n.min_y, y);
                n.max_y = std::max(n.max_y, y);
            }
            n.pixels.push_back(p);
            n.cx += x;
            n.cy += y;
            ++n.area;
        }
    for (auto& n : g.nodes) {
        n.cx /= n.area;
        n.cy /= n.area;
    }
    std::map<std::pair<int, int>, std::vector<std::pair<int, int>>> edge_map;
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
            int p = y * W + x;
            int ip = seg.ids[p];
            if (x + 1 < W && seg.ids[p + 1] != ip) {
                int q = p + 1, iq = seg.ids[q];
                if (ip < iq) edge_map[{ip, iq}].push_back({p, q});
                else edge_map[{iq, ip}].push_back({q, p});
            }
            if (y + 1 < H && seg.ids[p + W] != ip) {
                int q = p + W, iq = seg.ids[q];
                if (ip < iq) edge_map[{ip, iq}].push_back({p, q});
                else edge_map[{iq, ip}].push_back({q, p});
            }
        }
    g.edges.reserve(edge_map.size());
    for (auto& [pr, boundary] : edge_map)
        g.edges.push_back({pr.first, pr.second, std::move(boundary)});
    return g;
}

}  // namespace gal

#endif

#ifndef GAL_FOREST_HPP
#define GAL_FOREST_HPP

#include <random>
#include <vector>

#include "gal/core.hpp"

namespace gal {

// Random forest classifier: bootstrap-sampled trees with Gini splits over
// sqrt(d) feature candidates per node, class histograms at the leaves.
struct ForestModel {
    int n_classes = 0;
    int n_features = 0;

    struct Node {
        int feature = -1;  // -1: leaf
        double threshold = 0;
        int left = -1;
        int right = -1;
        std::vector<double> hist;  // leaf class histogram, sums to 1
    };
    struct Tree {
        std::vector<Node> nodes;
    };
    std::vector<Tree> trees;

    void validate() const {
        for (const auto& t : trees)
            for (const auto& n : t.nodes) {
                if (n.feature >= n_features) throw InternalError("forest: bad split feature");
                if (n.feature < 0) {
                    double s = 0;
                    for (double h : n.hist) s += h;
                    if (std::abs(s - 1.0) > 1e-9)
                        throw InternalError("forest: leaf histogram not normalized");
                }
            }
    }
};

namespace detail {

struct TreeBuilder {
    const std::vector<std::vector<double>>& x;
    const std::vector<int>& y;
    int n_classes;
    int n_features;
    int max_depth;
    int n_candidates;
    std::mt19937& rng;
    ForestModel::Tree& tree;

    int build(std::vector<int>& idx, int depth) {
        std::vector<int> counts(n_classes, 0);
        for (int i : idx) ++counts[y[i]];
        int node_id = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();

        bool pure = std::count_if(counts.begin(), counts.end(), [](int c) { return c > 0; }) <= 1;
        if (pure || depth >= max_depth || idx.size() < 2) {
            make_leaf(node_id, counts, idx.size());
            return node_id;
        }

        double parent_gini = gini(counts, idx.size());
        std::vector<int> feats(n_features);
        std::iota(feats.begin(), feats.end(), 0);
        for (int i = 0; i < n_candidates; ++i) {
            std::uniform_int_distribution<int> pick(i, n_features - 1);
            std::swap(feats[i], feats[pick(rng)]);
        }

        int best_feature = -1;
        double best_threshold = 0, best_gain = 1e-12;
        for (int ci = 0; ci < n_candidates; ++ci) {
            int f = feats[ci];
            std::sort(idx.begin(), idx.end(), [&](int a, int b) {
                if (x[a][f] != x[b][f]) return x[a][f] < x[b][f];
                return a < b;
            });
            std::vector<int> left_counts(n_classes, 0);
            for (size_t split = 1; split < idx.size(); ++split) {
                ++left_counts[y[idx[split - 1]]];
                if (x[idx[split - 1]][f] == x[idx[split]][f]) continue;
                double nl = static_cast<double>(split);
                double nr = static_cast<double>(idx.size() - split);
                std::vector<int> right_counts(n_classes);
                for (int c = 0; c < n_classes; ++c) right_counts[c] = counts[c] - left_counts[c];
                double gain = parent_gini - (nl / idx.size()) * gini(left_counts, split) -
                              (nr / idx.size()) * gini(right_counts, idx.size() - split);
                if (gain > best_gain) {
                    best_gain = gain;
                    best_feature = f;
                    best_threshold = 0.5 * (x[idx[split - 1]][f] + x[idx[split]][f]);
                }
            }
        }
        if (best_feature < 0) {
            make_leaf(node_id, counts, idx.size());
            return node_id;
        }
        std::vector<int> left, right;
        for (int i : idx)
            (x[i][best_feature] <= best_threshold ? left : right).push_back(i);
        tree.nodes[node_id].feature = best_feature;
        tree.nodes[node_id].threshold = best_threshold;
        int l = build(left, depth + 1);
        int r = build(right, depth + 1);
        tree.nodes[node_id].left = l;
        tree.nodes[node_id].right = r;
        return node_id;
    }

    void make_leaf(int node_id, const std::vector<int>& counts, size_t n) {
        auto& node = tree.nodes[node_id];
        node.hist.resize(n_classes);
        for (int c = 0; c < n_classes; ++c) node.hist[c] = counts[c] / static_cast<double>(n);
    }

    static double gini(const std::vector<int>& counts, size_t n) {
        double g = 1.0;
        for (int c : counts) {
            double p = c / static_cast<double>(n);
            g -= p * p;
        }
        return g;
    }
};

}  // namespace detail

inline ForestModel train_forest(const std::vector<std::vector<double>>& features,
                                const std::vector<int>& labels, int n_classes, int n_trees,
                                int max_depth, uint32_t seed) {
    if (features.empty()) throw ParamError("train_forest: empty training set");
    if (features.size() != labels.size())
        throw ParamError("train_forest: feature/label count mismatch");
    if (n_trees < 1) throw ParamError("train_forest: n_trees must be >= 1");
    if (max_depth < 1) throw ParamError("train_forest: max_depth must be >= 1");
    const int d = static_cast<int>(features[0].size());
    for (const auto& f : features)
        if (static_cast<int>(f.size()) != d)
            throw ParamError("train_forest: inconsistent feature dimensionality");
    for (int l : labels)
        if (l < 0 || l >= n_classes) throw ParamError("train_forest: label out of range");

    ForestModel model;
    model.n_classes = n_classes;
    model.n_features = d;
    model.trees.resize(n_trees);
    int candidates = std::max(1, static_cast<int>(std::lround(std::sqrt(d))));
    for (int t = 0; t < n_trees; ++t) {
        std::mt19937 rng(seed + 0x9e3779b9u * t);
        std::uniform_int_distribution<int> pick(0, static_cast<int>(features.size()) - 1);
        std::vector<int> idx(features.size());
        for (auto& i : idx) i = pick(rng);
        detail::TreeBuilder builder{features, labels, n_classes, d,
                                    max_depth, candidates, rng, model.trees[t]};
        builder.build(idx, 0);
    }
    model.validate();
    return model;
}

inline std::vector<double> predict_forest(const ForestModel& model,
                                          const std::vector<double>& feature) {
    if (static_cast<int>(feature.size()) != model.n_features)
        throw ParamError("predict_forest: feature dimensionality mismatch");
    std::vector<double> out(model.n_classes, 0.0);
    for (const auto& t : model.trees) {
        int node = 0;
        while (t.nodes[node].feature >= 0)
            node = feature[t.nodes[node].feature] <= t.nodes[node].threshold
                       ? t.nodes[node].left
                       : t.nodes[node].right;
        for (int c = 0; c < model.n_classes; ++c) out[c] += t.nodes[node].hist[c];
    }
    for (double& v : out) v /= model.trees.size();
    return out;
}

}  // namespace gal

#endif

#ifndef GAL_MAXFLOW_HPP
#define GAL_MAXFLOW_HPP

#include <deque>
#include <limits>
#include <vector>

#include "gal/core.hpp"

namespace gal {

// Directed capacitated graph. Arcs are stored in sibling pairs: arc id a and
// a^1 are mutual reverses, so residual updates touch a fixed pair.
struct FlowNetwork {
    int n = 0;
    int source = 0;
    int sink = 0;

    struct Arc {
        int to = 0;
        double cap = 0;
    };
    std::vector<Arc> arcs;
    std::vector<std::vector<int>> out;

    FlowNetwork(int nodes, int s, int t) : n(nodes), source(s), sink(t), out(nodes) {
        if (nodes < 2) throw ParamError("flow network: need at least 2 nodes");
        if (s == t) throw ParamError("flow network: source equals sink");
        if (s < 0 || t < 0 || s >= nodes || t >= nodes)
            throw ParamError("flow network: terminal out of range");
    }

    void add_arc(int from, int to, double cap) {
        if (from < 0 || to < 0 || from >= n || to >= n)
            throw ParamError("flow network: arc endpoint out of range");
        if (!std::isfinite(cap) || cap < 0)
            throw ParamError("flow network: capacity must be finite and non-negative");
        out[from].push_back(static_cast<int>(arcs.size()));
        arcs.push_back({to, cap});
        out[to].push_back(static_cast<int>(arcs.size()));
        arcs.push_back({from, 0.0});
    }
};

struct MaxFlowResult {
    double value = 0;
    // true = sink side of the min cut; source side otherwise
    std::vector<bool> sink_side;
};

/**
 * Max-flow by the Boykov-Kolmogorov algorithm: two search trees rooted at the
 * terminals grown in phases of growth, augmentation and orphan adoption.
 *
 * "An Experimental Comparison of Min-Cut/Max-Flow Algorithms for Energy
 * Minimization in Vision", Boykov & Kolmogorov, PAMI 2004.
 */
inline MaxFlowResult max_flow(FlowNetwork net) {
    enum Tree : int8_t { FREE = 0, SRC = 1, SNK = 2 };
    constexpr int kNone = -1;
    constexpr int kTerminal = -2;

    const int n = net.n;
    std::vector<int8_t> tree(n, FREE);
    std::vector<int> parent(n, kNone);  // arc id toward the tree root
    std::vector<int> dist(n, 0);
    std::vector<long> ts(n, 0);
    long time = 0;
    double flow = 0;

    std::deque<int> active;
    std::deque<int> orphans;

    tree[net.source] = SRC;
    tree[net.sink] = SNK;
    parent[net.source] = kTerminal;
    parent[net.sink] = kTerminal;
    ts[net.source] = ts[net.sink] = 0;
    active.push_back(net.source);
    active.push_back(net.sink);

    // residual capacity of the arc from p toward its tree's frontier direction
    auto tree_cap = [&](int p, int a) -> double {
        return tree[p] == SRC ? net.arcs[a].cap : net.arcs[a ^ 1].cap;
    };

    // walk to the root; true when p currently reaches a terminal
    auto has_origin = [&](int p) {
        int d = 0;
        int q = p;
        while (true) {
            if (ts[q] == time) {
                d += dist[q];
                break;
            }
            int pa = parent[q];
            if (pa == kTerminal) break;
            if (pa == kNone) return false;
            ++d;
            q = tree[q] == SRC ? net.arcs[pa ^ 1].to : net.arcs[pa].to;
        }
        // cache distances along the walked path
        int q2 = p;
        while (q2 != q && ts[q2] != time) {
            ts[q2] = time;
            dist[q2] = d--;
            int pa = parent[q2];
            q2 = tree[q2] == SRC ? net.arcs[pa ^ 1].to : net.arcs[pa].to;
        }
        return true;
    };

    auto augment = [&](int s_node, int t_node, int join_arc) {
        // bottleneck over the arc chain s -> ... -> s_node -> t_node -> ... -> t
        double bottleneck = net.arcs[join_arc].cap;
        for (int p = s_node; parent[p] != kTerminal;) {
            int a = parent[p];  // arc parent->p
            bottleneck = std::min(bottleneck, net.arcs[a].cap);
            p = net.arcs[a ^ 1].to;
        }
        for (int p = t_node; parent[p] != kTerminal;) {
            int a = parent[p];  // arc p->parent
            bottleneck = std::min(bottleneck, net.arcs[a].cap);
            p = net.arcs[a].to;
        }
        net.arcs[join_arc].cap -= bottleneck;
        net.arcs[join_arc ^ 1].cap += bottleneck;
        for (int p = s_node; parent[p] != kTerminal;) {
            int a = parent[p];
            net.arcs[a].cap -= bottleneck;
            net.arcs[a ^ 1].cap += bottleneck;
            int next = net.arcs[a ^ 1].to;
            if (net.arcs[a].cap <= 0) {
                parent[p] = kNone;
                orphans.push_back(p);
            }
            p = next;
        }
        for (int p = t_node; parent[p] != kTerminal;) {
            int a = parent[p];
            net.arcs[a].cap -= bottleneck;
            net.arcs[a ^ 1].cap += bottleneck;
            int next = net.arcs[a].to;
            if (net.arcs[a].cap <= 0) {
                parent[p] = kNone;
                orphans.push_back(p);
            }
            p = next;
        }
        flow += bottleneck;
    };

    auto adopt = [&]() {
        while (!orphans.empty()) {
            int p = orphans.front();
            orphans.pop_front();
            int8_t t = tree[p];
            int found = kNone;
            for (int a : net.out[p]) {
                // arc giving p a parent q: residual q->p for SRC, p->q for SNK
                double cap = t == SRC ? net.arcs[a ^ 1].cap : net.arcs[a].cap;
                if (cap <= 0) continue;
                int q = net.arcs[a].to;
                if (tree[q] != t) continue;
                if (!has_origin(q)) continue;
                found = t == SRC ? (a ^ 1) : a;
                break;
            }
            if (found != kNone) {
                parent[p] = found;
                ts[p] = 0;  // invalidate cached distance
                continue;
            }
            // no parent: p leaves the tree, children become orphans,
            // same-tree neighbours become active again
            for (int a : net.out[p]) {
                int q = net.arcs[a].to;
                if (tree[q] != t) continue;
                int pa = parent[q];
                if (pa >= 0) {
                    int qparent = t == SRC ? net.arcs[pa ^ 1].to : net.arcs[pa].to;
                    if (qparent == p) {
                        parent[q] = kNone;
                        orphans.push_back(q);
                    }
                }
                double cap = t == SRC ? net.arcs[a ^ 1].cap : net.arcs[a].cap;
                if (cap > 0) active.push_back(q);
            }
            tree[p] = FREE;
        }
    };

    while (!active.empty()) {
        int p = active.front();
        active.pop_front();
        if (tree[p] == FREE) continue;
        bool found_path = false;
        int join_arc = kNone;
        for (int a : net.out[p]) {
            if (tree_cap(p, a) <= 0) continue;
            int q = net.arcs[a].to;
            if (tree[q] == FREE) {
                tree[q] = tree[p];
                parent[q] = tree[p] == SRC ? a : (a ^ 1);
                ts[q] = 0;
                active.push_back(q);
            } else if (tree[q] != tree[p]) {
                join_arc = tree[p] == SRC ? a : (a ^ 1);
                found_path = true;
                break;
            }
        }
        if (found_path) {
            int s_node = net.arcs[join_arc ^ 1].to;
            int t_node = net.arcs[join_arc].to;
            ++time;
            augment(s_node, t_node, join_arc);
            adopt();
            active.push_back(p);  // keep scanning this node
        }
    }

    MaxFlowResult res;
    res.value = flow;
    res.sink_side.assign(n, false);
    for (int i = 0; i < n; ++i) res.sink_side[i] = (tree[i] == SNK);
    return res;
}

}  // namespace gal

#endif

#ifndef GAL_EXPANSION_HPP
#define GAL_EXPANSION_HPP

#include <vector>

#include "gal/core.hpp"
#include "gal/maxflow.hpp"

namespace gal {

// Multi-label energy over a segment graph:
//   E(L) = sum_i psi(i, l_i) + lambda * sum_(i,j) theta_ij(l_i, l_j)
struct LabelingProblem {
    int n_nodes = 0;
    int n_labels = kNumClasses;
    std::vector<double> unary;  // n_nodes * n_labels, row major

    struct Edge {
        int i = 0;
        int j = 0;
        std::vector<double> theta;  // n_labels * n_labels, row major
    };
    std::vector<Edge> edges;
    double lambda = 0.1;

    double psi(int node, int label) const { return unary[node * n_labels + label]; }
    double& psi(int node, int label) { return unary[node * n_labels + label]; }

    void validate() const {
        if (n_nodes <= 0 || n_labels <= 0) throw ParamError("labeling problem: empty");
        if (unary.size() != static_cast<size_t>(n_nodes) * n_labels)
            throw ParamError("labeling problem: unary size mismatch");
        for (double v : unary)
            if (!std::isfinite(v) || v < 0) throw ParamError("labeling problem: bad unary cost");
        if (!std::isfinite(lambda) || lambda < 0) throw ParamError("labeling problem: bad lambda");
        for (const auto& e : edges) {
            if (e.i < 0 || e.j < 0 || e.i >= n_nodes || e.j >= n_nodes || e.i == e.j)
                throw ParamError("labeling problem: bad edge endpoints");
            if (e.theta.size() != static_cast<size_t>(n_labels) * n_labels)
                throw ParamError("labeling problem: theta size mismatch");
            for (int a = 0; a < n_labels; ++a) {
                if (e.theta[a * n_labels + a] != 0.0)
                    throw ParamError("labeling problem: theta diagonal must be 0");
                for (int b = 0; b < n_labels; ++b) {
                    double v = e.theta[a * n_labels + b];
                    if (!std::isfinite(v) || v < 0)
                        throw ParamError("labeling problem: bad theta cost");
                    if (std::abs(v - e.theta[b * n_labels + a]) > 1e-12)
                        throw ParamError("labeling problem: theta not symmetric");
                }
            }
        }
    }
};

inline double total_energy(const LabelingProblem& p, const std::vector<int>& labels) {
    if (labels.size() != static_cast<size_t>(p.n_nodes))
        throw ParamError("total_energy: labeling size mismatch");
    double e = 0;
    for (int i = 0; i < p.n_nodes; ++i) e += p.psi(i, labels[i]);
    for (const auto& ed : p.edges)
        e += p.lambda * ed.theta[labels[ed.i] * p.n_labels + labels[ed.j]];
    return e;
}

/**
 * One alpha-expansion move: minimum cut on the expansion graph decides which
 * nodes switch to label alpha. Non-submodular triples are repaired by raising
 * the two alpha-arcs until the triangle inequality holds; the move is kept
 * only when it strictly lowers the true energy.
 *
 * Construction after "Fast Approximate Energy Minimization via Graph Cuts",
 * Boykov, Veksler & Zabih, PAMI 2001.
 */
inline std::vector<int> expand(const LabelingProblem& p, const std::vector<int>& current,
                               int alpha, int* truncation_events = nullptr) {
    const int n = p.n_nodes;
    const int L = p.n_labels;
    if (alpha < 0 || alpha >= L) throw ParamError("expand: alpha out of range");

    int aux_count = 0;
    for (const auto& e : p.edges)
        if (current[e.i] != current[e.j] && current[e.i] != alpha && current[e.j] != alpha)
            ++aux_count;

    const int source = n + aux_count;
    const int sink = source + 1;
    FlowNetwork net(n + aux_count + 2, source, sink);

    // t-links; source side of the cut takes alpha, sink side keeps its label
    std::vector<double> to_alpha(n), to_keep(n);
    for (int i = 0; i < n; ++i) {
        to_alpha[i] = p.psi(i, alpha);
        to_keep[i] = p.psi(i, current[i]);
    }

    int aux = n;
    int truncations = 0;
    std::vector<std::array<double, 3>> aux_caps(aux_count);
    int aux_idx = 0;
    for (const auto& e : p.edges) {
        int li = current[e.i], lj = current[e.j];
        auto th = [&](int a, int b) { return p.lambda * e.theta[a * L + b]; };
        if (li == alpha && lj == alpha) continue;
        if (li == alpha) {
            to_keep[e.j] += th(alpha, lj);
            continue;
        }
        if (lj == alpha) {
            to_keep[e.i] += th(li, alpha);
            continue;
        }
        if (li == lj) {
            double c = th(li, alpha);
            if (c > 0) {
                net.add_arc(e.i, e.j, c);
                net.add_arc(e.j, e.i, c);
            }
            continue;
        }
        double ca = th(li, alpha), cb = th(alpha, lj), cc = th(li, lj);
        if (ca + cb < cc) {
            double deficit = cc - ca - cb;
            ca += deficit / 2;
            cb += deficit / 2;
            ++truncations;
        }
        aux_caps[aux_idx++] = {ca, cb, cc};
        ++aux;
    }

    for (int i = 0; i < n; ++i) {
        if (to_keep[i] > 0) net.add_arc(source, i, to_keep[i]);
        if (to_alpha[i] > 0) net.add_arc(i, sink, to_alpha[i]);
    }
    aux = n;
    aux_idx = 0;
    for (const auto& e : p.edges) {
        int li = current[e.i], lj = current[e.j];
        if (li == alpha || lj == alpha || li == lj) continue;
        auto [ca, cb, cc] = aux_caps[aux_idx++];
        if (ca > 0) {
            net.add_arc(e.i, aux, ca);
            net.add_arc(aux, e.i, ca);
        }
        if (cb > 0) {
            net.add_arc(aux, e.j, cb);
            net.add_arc(e.j, aux, cb);
        }
        if (cc > 0) net.add_arc(source, aux, cc);
        ++aux;
    }

    MaxFlowResult cut = max_flow(std::move(net));
    std::vector<int> candidate(current);
    for (int i = 0; i < n; ++i)
        if (!cut.sink_side[i]) candidate[i] = alpha;

    if (truncation_events) *truncation_events += truncations;
    if (total_energy(p, candidate) < total_energy(p, current)) return candidate;
    return current;
}

struct ExpansionTraceEntry {
    int cycle = 0;
    int label = 0;
    double energy = 0;
};

struct ExpansionResult {
    std::vector<int> labels;
    std::vector<ExpansionTraceEntry> trace;
    int truncation_events = 0;
};

// Cycle the labels in fixed order 0..L-1 until a full cycle changes nothing.
inline ExpansionResult alpha_expansion(const LabelingProblem& p, int max_cycles = 10) {
    p.validate();
    ExpansionResult res;
    res.labels.resize(p.n_nodes);
    for (int i = 0; i < p.n_nodes; ++i) {
        int best = 0;
        for (int l = 1; l < p.n_labels; ++l)
            if (p.psi(i, l) < p.psi(i, best)) best = l;
        res.labels[i] = best;
    }
    for (int cycle = 0; cycle < max_cycles; ++cycle) {
        bool changed = false;
        for (int alpha = 0; alpha < p.n_labels; ++alpha) {
            std::vector<int> next = expand(p, res.labels, alpha, &res.truncation_events);
            if (next != res.labels) changed = true;
            res.labels = std::move(next);
            res.trace.push_back({cycle, alpha, total_energy(p, res.labels)});
        }
        if (!changed) break;
    }
    return res;
}

inline void write_energy_trace(const ExpansionResult& res, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    for (const auto& t : res.trace)
        out << t.cycle << ' ' << t.label << ' ' << t.energy << '\n';
}

// Exact minimum by depth-first enumeration with partial-cost pruning.
// Ties resolve to the lexicographically smallest labeling.
inline std::vector<int> brute_force(const LabelingProblem& p) {
    p.validate();
    double combos = 1;
    for (int i = 0; i < p.n_nodes; ++i) {
        combos *= p.n_labels;
        if (combos > 1e7) throw SizeError("brute_force: label space exceeds 1e7");
    }
    // edges to earlier-indexed nodes, resolved when the later node is assigned
    std::vector<std::vector<std::pair<int, const LabelingProblem::Edge*>>> back(p.n_nodes);
    for (const auto& e : p.edges) {
        int lo = std::min(e.i, e.j), hi = std::max(e.i, e.j);
        back[hi].push_back({lo, &e});
    }
    std::vector<int> best, cur(p.n_nodes, 0);
    double best_cost = std::numeric_limits<double>::infinity();

    auto dfs = [&](auto&& self, int node, double cost) -> void {
        if (cost >= best_cost) return;
        if (node == p.n_nodes) {
            best_cost = cost;
            best = cur;
            return;
        }
        for (int l = 0; l < p.n_labels; ++l) {
            cur[node] = l;
            double c = cost + p.psi(node, l);
            for (auto& [other, e] : back[node]) {
                int a = e->i == other ? cur[other] : l;
                int b = e->i == other ? l : cur[other];
                c += p.lambda * e->theta[a * p.n_labels + b];
            }
            self(self, node + 1, c);
        }
    };
    dfs(dfs, 0, 0.0);
    return best;
}

}  // namespace gal

#endif

#ifndef GAL_CRF_HPP
#define GAL_CRF_HPP

#include "gal/expansion.hpp"
#include "gal/gav.hpp"

namespace gal {

struct CrfParams {
    std::array<double, 5> w = {0.2, 0.2, 0.2, 0.2, 0.2};
    double lambda = 0.1;
    double epsilon = 1e-6;  // probability floor inside the logs
    double cost_cap = 10;   // M

    void validate() const {
        double sum = 0;
        for (double v : w) {
            if (!std::isfinite(v) || v < 0) throw ParamError("crf params: bad weight");
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-6) throw ParamError("crf params: weights must sum to 1");
        if (!(lambda > 0)) throw ParamError("crf params: lambda must be > 0");
        if (!(epsilon > 0) || epsilon > 1e-3) throw ParamError("crf params: bad epsilon");
        if (cost_cap < 1) throw ParamError("crf params: cost cap must be >= 1");
    }

    static CrfParams from_config(const Config& cfg) {
        CrfParams p;
        p.lambda = cfg.get("crf_lambda");
        p.epsilon = cfg.get("crf_epsilon");
        p.cost_cap = cfg.get("crf_cost_cap");
        return p;
    }
};

inline void write_params(const CrfParams& p, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    for (double v : p.w) out << v << ' ';
    out << p.lambda << '\n';
}

inline CrfParams read_params(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    CrfParams p;
    for (double& v : p.w)
        if (!(in >> v)) throw FormatError("params file: expected `w0 w1 w2 w3 w4 lambda`");
    if (!(in >> p.lambda)) throw FormatError("params file: expected `w0 w1 w2 w3 w4 lambda`");
    p.validate();
    return p;
}

// Unary costs: the weighted average of the five component distributions,
// through a floored negative log, capped at M.
inline std::vector<double> unary_costs(const AttributeMaps& maps, const CrfParams& params) {
    maps.validate();
    params.validate();
    const size_t n = maps.n_segments();
    std::vector<double> psi(n * kNumClasses);
    for (size_t s = 0; s < n; ++s)
        for (int l = 0; l < kNumClasses; ++l) {
            double p = params.w[0] * maps.p_initial[s].p[l] +
                       params.w[1] * maps.p_porous[s].p[l] +
                       params.w[2] * maps.p_solid[s].p[l] +
                       params.w[3] * maps.p_horizon[s].p[l] +
                       params.w[4] * maps.p_verticall[s].p[l];
            psi[s * kNumClasses + l] =
                std::min(-std::log(std::max(p, params.epsilon)), params.cost_cap);
        }
    return psi;
}

/**
 * Pairwise tables: the boundary term is the floored negative log of the mean
 * P_line along the shared boundary (low evidence = strong smoothing); the
 * vanishing and planar terms penalize label pairs whose evidence difference
 * is small, and contribute only while their attribute flag is set. The sum is
 * capped, zeroed on the diagonal, and symmetrized over the label arguments.
 */
inline std::vector<LabelingProblem::Edge> pairwise_costs(const AttributeMaps& maps,
                                                         const SegmentGraph& graph,
                                                         const CrfParams& params) {
    const double eps = params.epsilon;
    const double cap = params.cost_cap;
    std::vector<LabelingProblem::Edge> edges;
    edges.reserve(graph.edges.size());
    for (const auto& ge : graph.edges) {
        double line_sum = 0;
        for (const auto& [p, q] : ge.boundary) line_sum += maps.p_line.v[p] + maps.p_line.v[q];
        double line_mean = line_sum / (2.0 * ge.boundary.size());
        double phi_s = -std::log(std::max(line_mean, eps));

        LabelingProblem::Edge e;
        e.i = ge.i;
        e.j = ge.j;
        e.theta.assign(kNumClasses * kNumClasses, 0.0);
        for (int a = 0; a < kNumClasses; ++a)
            for (int b = 0; b < kNumClasses; ++b) {
                if (a == b) continue;
                double phi_v = 0, phi_p = 0;
                if (maps.vanishing_active) {
                    double diff =
                        std::abs(maps.p_vanishing[ge.i][a] - maps.p_vanishing[ge.j][b]);
                    phi_v = -std::log(std::max(diff, eps));
                }
                if (maps.planar_active) {
                    double diff = std::abs(maps.p_planar[ge.i][a] - maps.p_planar[ge.j][b]);
                    phi_p = -std::log(std::max(diff, eps));
                }
                e.theta[a * kNumClasses + b] = std::min(phi_s + phi_v + phi_p, cap);
            }
        for (int a = 0; a < kNumClasses; ++a)
            for (int b = a + 1; b < kNumClasses; ++b) {
                double sym = 0.5 * (e.theta[a * kNumClasses + b] + e.theta[b * kNumClasses + a]);
                e.theta[a * kNumClasses + b] = sym;
                e.theta[b * kNumClasses + a] = sym;
            }
        edges.push_back(std::move(e));
    }
    return edges;
}

inline LabelingProblem build_problem(const AttributeMaps& maps, const SegmentGraph& graph,
                                     const CrfParams& params) {
    LabelingProblem p;
    p.n_nodes = static_cast<int>(maps.n_segments());
    p.n_labels = kNumClasses;
    p.unary = unary_costs(maps, params);
    p.edges = pairwise_costs(maps, graph, params);
    p.lambda = params.lambda;
    p.validate();
    return p;
}

struct RefineResult {
    LabelMap labels;                 // per pixel
    std::vector<int> segment_labels;
    ExpansionResult expansion;
};

// Final refinement: alpha-expansion over the assembled energy, painted back
// onto pixels through the segment map.
inline RefineResult refine(const AttributeMaps& maps, const SegmentGraph& graph,
                           const CrfParams& params, int max_cycles = 10) {
    LabelingProblem problem = build_problem(maps, graph, params);
    RefineResult res;
    res.expansion = alpha_expansion(problem, max_cycles);
    res.segment_labels = res.expansion.labels;
    res.labels = LabelMap(graph.width, graph.height);
    for (size_t p = 0; p < graph.ids.size(); ++p)
        res.labels.codes[p] = static_cast<uint8_t>(res.segment_labels[graph.ids[p]]);
    return res;
}

// One training image for parameter learning.
struct CrfTrainingExample {
    AttributeMaps maps;
    SegmentGraph graph;
    std::vector<int> truth;  // per segment
};

/**
 * Grid search for (w, lambda). w ranges over the step-0.1 simplex and is
 * scored by fold-averaged area-weighted log-likelihood of the ground truth;
 * lambda is then scored by held-out pixel accuracy after refinement. Ties
 * prefer larger w[0], then smaller lambda.
 */
inline CrfParams learn_params(const std::vector<CrfTrainingExample>& training,
                              const Config& cfg = Config()) {
    CrfParams best = CrfParams::from_config(cfg);
    if (training.empty()) return best;  // defaults on an empty search
    const int folds = std::min<int>(5, static_cast<int>(training.size()));

    // all compositions of 10 into 5 parts, lexicographically descending so a
    // strict improvement keeps the largest w[0] on ties
    std::vector<std::array<double, 5>> grid;
    for (int a = 10; a >= 0; --a)
        for (int b = 10 - a; b >= 0; --b)
            for (int c = 10 - a - b; c >= 0; --c)
                for (int d = 10 - a - b - c; d >= 0; --d) {
                    int e = 10 - a - b - c - d;
                    grid.push_back({a / 10.0, b / 10.0, c / 10.0, d / 10.0, e / 10.0});
                }

    auto likelihood_score = [&](const std::array<double, 5>& w) {
        double total = 0;
        for (int fold = 0; fold < folds; ++fold) {
            double fold_score = 0;
            for (size_t i = fold; i < training.size(); i += folds) {
                const auto& ex = training[i];
                for (size_t s = 0; s < ex.truth.size(); ++s) {
                    int l = ex.truth[s];
                    double p = w[0] * ex.maps.p_initial[s].p[l] +
                               w[1] * ex.maps.p_porous[s].p[l] +
                               w[2] * ex.maps.p_solid[s].p[l] +
                               w[3] * ex.maps.p_horizon[s].p[l] +
                               w[4] * ex.maps.p_verticall[s].p[l];
                    fold_score += ex.graph.nodes[s].area * std::log(std::max(p, best.epsilon));
                }
            }
            total += fold_score;
        }
        return total / folds;
    };

    double best_score = -std::numeric_limits<double>::infinity();
    for (const auto& w : grid) {
        double score = likelihood_score(w);
        if (score > best_score) {
            best_score = score;
            best.w = w;
        }
    }

    double best_acc = -1;
    for (double lambda : {0.01, 0.05, 0.1, 0.5, 1.0}) {
        CrfParams params = best;
        params.lambda = lambda;
        double acc_sum = 0;
        for (int fold = 0; fold < folds; ++fold) {
            long correct = 0, total = 0;
            for (size_t i = fold; i < training.size(); i += folds) {
                const auto& ex = training[i];
                auto res = refine(ex.maps, ex.graph, params);
                for (size_t s = 0; s < ex.truth.size(); ++s) {
                    int area = ex.graph.nodes[s].area;
                    total += area;
                    if (res.segment_labels[s] == ex.truth[s]) correct += area;
                }
            }
            acc_sum += total > 0 ? static_cast<double>(correct) / total : 0.0;
        }
        double acc = acc_sum / folds;
        if (acc > best_acc) {
            best_acc = acc;
            best.lambda = lambda;
        }
    }
    best.validate();
    return best;
}

}  // namespace gal

#endif

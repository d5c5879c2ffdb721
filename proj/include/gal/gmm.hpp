#ifndef GAL_GMM_HPP
#define GAL_GMM_HPP

#include <vector>

#include "gal/core.hpp"

namespace gal {

// Diagonal-covariance Gaussian mixture over RGB triples.
struct GmmModel {
    struct Component {
        double weight = 0;
        std::array<double, 3> mean{};
        std::array<double, 3> var{};
    };
    std::vector<Component> components;

    double pdf(const std::array<double, 3>& x) const {
        double total = 0;
        for (const auto& c : components) {
            double e = 0, norm = 1;
            for (int d = 0; d < 3; ++d) {
                double diff = x[d] - c.mean[d];
                e += diff * diff / c.var[d];
                norm *= 2.0 * M_PI * c.var[d];
            }
            total += c.weight * std::exp(-0.5 * e) / std::sqrt(norm);
        }
        return total;
    }

    void validate() const {
        double w = 0;
        for (const auto& c : components) {
            w += c.weight;
            for (double v : c.var)
                if (v < 1e-4) throw InternalError("gmm: variance below floor");
        }
        if (std::abs(w - 1.0) > 1e-6) throw InternalError("gmm: weights do not sum to 1");
    }
};

// Standard EM iterations on an existing model; the log-likelihood never
// decreases. Returns the final log-likelihood.
inline double em_steps(GmmModel& m, const std::vector<std::array<double, 3>>& pts, int iters,
                       double tol = 1e-4) {
    if (pts.empty()) throw ParamError("em_steps: no samples");
    const int k = static_cast<int>(m.components.size());
    std::vector<double> resp(pts.size() * k);
    double prev_ll = -std::numeric_limits<double>::infinity();
    double ll = prev_ll;
    for (int it = 0; it < iters; ++it) {
        ll = 0;
        for (size_t i = 0; i < pts.size(); ++i) {
            double total = 0;
            for (int c = 0; c < k; ++c) {
                const auto& comp = m.components[c];
                double e = 0, norm = 1;
                for (int d = 0; d < 3; ++d) {
                    double diff = pts[i][d] - comp.mean[d];
                    e += diff * diff / comp.var[d];
                    norm *= 2.0 * M_PI * comp.var[d];
                }
                double dens = comp.weight * std::exp(-0.5 * e) / std::sqrt(norm);
                resp[i * k + c] = dens;
                total += dens;
            }
            if (total <= 0) {
                for (int c = 0; c < k; ++c) resp[i * k + c] = 1.0 / k;
                total = 1e-300;
            } else {
                for (int c = 0; c < k; ++c) resp[i * k + c] /= total;
            }
            ll += std::log(std::max(total, 1e-300));
        }
        for (int c = 0; c < k; ++c) {
            double rsum = 0;
            std::array<double, 3> mean{}, var{};
            for (size_t i = 0; i < pts.size(); ++i) {
                double r = resp[i * k + c];
                rsum += r;
                for (int d = 0; d < 3; ++d) mean[d] += r * pts[i][d];
            }
            if (rsum < 1e-12) continue;  // dead component keeps its parameters
            for (int d = 0; d < 3; ++d) mean[d] /= rsum;
            for (size_t i = 0; i < pts.size(); ++i) {
                double r = resp[i * k + c];
                for (int d = 0; d < 3; ++d)
                    var[d] += r * (pts[i][d] - mean[d]) * (pts[i][d] - mean[d]);
            }
            for (int d = 0; d < 3; ++d) var[d] = std::max(1e-4, var[d] / rsum);
            m.components[c].weight = rsum / pts.size();
            m.components[c].mean = mean;
            m.components[c].var = var;
        }
        double wsum = 0;
        for (auto& c : m.components) wsum += c.weight;
        for (auto& c : m.components) c.weight /= wsum;
        if (std::abs(ll - prev_ll) < tol * std::max(1.0, std::abs(prev_ll))) break;
        prev_ll = ll;
    }
    return ll;
}

// EM fit with a deterministic k-means init (luminance quantile seeding).
inline GmmModel fit_gmm(const std::vector<std::array<double, 3>>& pts, int k, int iters = 50,
                        double tol = 1e-4) {
    if (pts.empty()) throw ParamError("fit_gmm: no samples");
    k = std::min<int>(k, static_cast<int>(pts.size()));

    std::vector<size_t> order(pts.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    auto luma = [&](size_t i) {
        return 0.299 * pts[i][0] + 0.587 * pts[i][1] + 0.114 * pts[i][2];
    };
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        double la = luma(a), lb = luma(b);
        if (la != lb) return la < lb;
        return a < b;
    });
    std::vector<std::array<double, 3>> centers(k);
    for (int c = 0; c < k; ++c)
        centers[c] = pts[order[(2 * c + 1) * pts.size() / (2 * k)]];

    std::vector<int> assign(pts.size(), 0);
    for (int it = 0; it < 10; ++it) {
        for (size_t i = 0; i < pts.size(); ++i) {
            int best = 0;
            double bd = std::numeric_limits<double>::infinity();
            for (int c = 0; c < k; ++c) {
                double d = 0;
                for (int ch = 0; ch < 3; ++ch)
                    d += (pts[i][ch] - centers[c][ch]) * (pts[i][ch] - centers[c][ch]);
                if (d < bd) {
                    bd = d;
                    best = c;
                }
            }
            assign[i] = best;
        }
        std::vector<std::array<double, 3>> sum(k, {0, 0, 0});
        std::vector<int> cnt(k, 0);
        for (size_t i = 0; i < pts.size(); ++i) {
            for (int ch = 0; ch < 3; ++ch) sum[assign[i]][ch] += pts[i][ch];
            ++cnt[assign[i]];
        }
        for (int c = 0; c < k; ++c)
            if (cnt[c] > 0)
                for (int ch = 0; ch < 3; ++ch) centers[c][ch] = sum[c][ch] / cnt[c];
    }

    GmmModel m;
    m.components.resize(k);
    {
        std::vector<int> cnt(k, 0);
        std::vector<std::array<double, 3>> sq(k, {0, 0, 0});
        for (size_t i = 0; i < pts.size(); ++i) ++cnt[assign[i]];
        for (int c = 0; c < k; ++c) {
            m.components[c].weight = std::max(1, cnt[c]) / static_cast<double>(pts.size());
            m.components[c].mean = centers[c];
        }
        double wsum = 0;
        for (auto& c : m.components) wsum += c.weight;
        for (auto& c : m.components) c.weight /= wsum;
        for (size_t i = 0; i < pts.size(); ++i)
            for (int ch = 0; ch < 3; ++ch) {
                double d = pts[i][ch] - centers[assign[i]][ch];
                sq[assign[i]][ch] += d * d;
            }
        for (int c = 0; c < k; ++c)
            for (int ch = 0; ch < 3; ++ch)
                m.components[c].var[ch] =
                    std::max(1e-4, cnt[c] > 0 ? sq[c][ch] / cnt[c] : 1e-2);
    }

    em_steps(m, pts, iters, tol);
    m.validate();
    return m;
}

}  // namespace gal

#endif

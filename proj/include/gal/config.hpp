#ifndef GAL_CONFIG_HPP
#define GAL_CONFIG_HPP

#include <map>
#include <sstream>
#include <string>

#include "gal/core.hpp"

namespace gal {

// Flat `key value` text configuration. Every tunable threshold in the
// pipeline lives here with its default; unknown keys in a file are an error.
class Config {
public:
    Config() : values_(defaults()) {}

    double get(const std::string& key) const {
        auto it = values_.find(key);
        if (it == values_.end()) throw ConfigError("unknown config key: " + key);
        return it->second;
    }
    int geti(const std::string& key) const {
        return static_cast<int>(std::lround(get(key)));
    }
    bool getb(const std::string& key) const { return get(key) != 0.0; }

    void set(const std::string& key, double value) {
        if (defaults().find(key) == defaults().end())
            throw ConfigError("unknown config key: " + key);
        values_[key] = value;
    }

    void load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file " + path);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            std::istringstream ls(line);
            std::string key;
            if (!(ls >> key)) continue;  // blank line
            double value;
            if (!(ls >> value))
                throw ConfigError("config " + path + ":" + std::to_string(lineno) +
                                  ": expected `key value`");
            std::string extra;
            if (ls >> extra)
                throw ConfigError("config " + path + ":" + std::to_string(lineno) +
                                  ": trailing content");
            set(key, value);
        }
    }

    void save(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw IoError("cannot write " + path);
        for (const auto& [k, v] : values_) out << k << ' ' << v << '\n';
    }

    static const std::map<std::string, double>& defaults() {
        static const std::map<std::string, double> d = {
            {"seed", 12345},

            // segmentation
            {"slic_k", 400},
            {"slic_compactness", 10},
            {"fh_scale", 100},
            {"fh_min_size", 20},
            {"fh_scale2", 400},
            {"fh_min_size2", 80},

            // line segment detection
            {"lsd_angle_tol_deg", 22.5},
            {"lsd_min_length", 15},
            {"lsd_grad_threshold", 0.02},

            // evidence maps
            {"edge_sigma", 1.0},
            {"edge_norm_floor", 0.02},
            {"defocus_edge_threshold", 0.3},
            {"defocus_sigma0", 1.0},
            {"defocus_max_sigma", 5.0},
            {"defocus_box_radius", 4},
            {"defocus_norm_floor", 0.12},

            // sky/ground boundary lines
            {"boundary_min_run_frac", 0.05},
            {"boundary_conf_threshold", 0.1},
            {"boundary_dilate_px", 2},
            {"boundary_defocus_tol_px", 10},
            {"occluder_min_area_frac", 0.002},

            // vertical lines / scene mode
            {"vertical_angle_tol_deg", 5},
            {"building_min_len_frac", 0.05},
            {"building_total_len_frac", 1.5},

            // horizon
            {"horizon_bins", 50},
            {"horizon_angle_tol_deg", 10},
            {"horizon_prior_sigma_frac", 0.2},
            {"horizon_dominance", 1.5},
            {"gmm_components", 3},
            {"gmm_iters", 50},
            {"gmm_tol", 1e-4},

            // trapezoid fitting
            {"trap_break_len_frac", 0.3},
            {"trap_slope_window_frac", 0.1},
            {"trap_slope_flat", 0.05},
            {"trap_split_deadzone", 0.08},

            // vertical-line attribute / vanishing points
            {"b_gate", 0.3},
            {"segment_dilate_px", 5},
            {"ransac_iters", 500},
            {"ransac_angle_tol_deg", 2},
            {"ransac_min_inliers", 5},
            {"vp_center_frac", 0.2},
            {"vp_parallel_frac", 5.0},

            // grab cut
            {"grabcut_iters", 5},
            {"grabcut_gamma", 50},
            {"grabcut_frame_px", 10},
            {"solid_overlap", 0.5},

            // porous
            {"porous_edge_threshold", 0.3},
            {"porous_band_px", 2},
            {"porous_entropy_mass", 0.8},

            // CRF
            {"crf_lambda", 0.1},
            {"crf_epsilon", 1e-6},
            {"crf_cost_cap", 10},
            {"expansion_max_cycles", 10},

            // built-in model training
            {"train_scenes", 12},
            {"train_width", 160},
            {"train_height", 120},
            {"forest_trees", 30},
            {"forest_max_depth", 12},

            // attribute toggles (ablation)
            {"attr_porous", 1},
            {"attr_solid", 1},
            {"attr_horizon", 1},
            {"attr_verticall", 1},
            {"attr_skyground", 1},
            {"attr_vanishing_planar", 1},
        };
        return d;
    }

private:
    std::map<std::string, double> values_;
};

}  // namespace gal

#endif

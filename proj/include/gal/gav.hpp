#ifndef GAL_GAV_HPP
#define GAL_GAV_HPP

#include "gal/grabcut.hpp"
#include "gal/porous.hpp"
#include "gal/surfaces.hpp"

namespace gal {

// Which global attributes run; ablation switches members off.
struct AttributeSet {
    bool porous = true;
    bool solid = true;
    bool horizon = true;
    bool verticall = true;
    bool skyground = true;
    bool vanishing_planar = true;

    static AttributeSet none() { return {false, false, false, false, false, false}; }

    static AttributeSet from_config(const Config& cfg) {
        AttributeSet a;
        a.porous = cfg.getb("attr_porous");
        a.solid = cfg.getb("attr_solid");
        a.horizon = cfg.getb("attr_horizon");
        a.verticall = cfg.getb("attr_verticall");
        a.skyground = cfg.getb("attr_skyground");
        a.vanishing_planar = cfg.getb("attr_vanishing_planar");
        return a;
    }
};

// Attribute order of the 7 binary flags.
enum GavIndex : int {
    kGavSkyGroundLine = 0,
    kGavHorizon = 1,
    kGavPlanarSurface = 2,
    kGavVerticalLine = 3,
    kGavVanishingLine = 4,
    kGavSolid = 5,
    kGavPorous = 6,
};

struct GlobalAttributeVector {
    std::array<int, 7> flags{};

    // payloads, present exactly when the matching flag is 1
    std::optional<std::pair<BoundaryPolyline, BoundaryPolyline>> lines;  // sky, ground
    std::vector<OccluderRegion> occluders;
    std::optional<double> horizon_y;
    std::vector<SurfacePiece> pieces;
    std::optional<std::vector<double>> b_scores;
    std::vector<std::vector<int>> building_regions;
    std::optional<std::vector<char>> solid_masks;  // union mask, image sized
    std::optional<std::vector<double>> porous_randomness;
};

// The P_k family feeding the CRF: five unary component distributions per
// segment plus the pairwise evidence. Inactive components are uniform rows.
struct AttributeMaps {
    std::vector<ClassDistribution> p_initial;
    std::vector<ClassDistribution> p_porous;
    std::vector<ClassDistribution> p_solid;
    std::vector<ClassDistribution> p_horizon;
    std::vector<ClassDistribution> p_verticall;

    Field p_line;  // boundary-line pixel map in [0,1]
    std::vector<std::array<double, kNumClasses>> p_vanishing;  // {0,1} on planar labels
    std::vector<std::array<double, kNumClasses>> p_planar;
    bool vanishing_active = false;
    bool planar_active = false;

    size_t n_segments() const { return p_initial.size(); }

    void validate() const {
        size_t n = p_initial.size();
        for (const auto* rows :
             {&p_initial, &p_porous, &p_solid, &p_horizon, &p_verticall}) {
            if (rows->size() != n) throw InternalError("attribute maps: ragged rows");
            for (const auto& r : *rows) r.validate();
        }
        if (p_vanishing.size() != n || p_planar.size() != n)
            throw InternalError("attribute maps: ragged pairwise rows");
        for (double v : p_line.v)
            if (!std::isfinite(v) || v < 0.0 || v > 1.0)
                throw InternalError("attribute maps: p_line outside [0,1]");
        for (const auto* rows : {&p_vanishing, &p_planar})
            for (const auto& r : *rows)
                for (double v : r)
                    if (v != 0.0 && v != 1.0)
                        throw InternalError("attribute maps: pairwise evidence not binary");
    }
};

// Everything the extractors produced, before assembly.
struct GaePayloads {
    std::pair<BoundaryPolyline, BoundaryPolyline> lines;
    std::vector<OccluderRegion> occluders;
    std::optional<double> horizon_y;
    std::optional<std::vector<ClassDistribution>> horizon_rows;
    std::vector<SurfacePiece> pieces;
    std::vector<std::array<double, kNumClasses>> planar;
    VerticalAttribute vertical;
    VanishingAttribute vanishing;
    SolidAttribute solid;
    PorousAttribute porous;
    Field p_line;
    AttributeSet enabled;
};

// Fold the extractor outputs into the GAV and the CRF-facing maps, enforcing
// the flag/payload consistency rules.
inline std::pair<GlobalAttributeVector, AttributeMaps> assemble_gav(
    const std::vector<ClassDistribution>& p_initial, const GaePayloads& in, int W, int H) {
    const size_t n = p_initial.size();
    GlobalAttributeVector gav;
    AttributeMaps maps;
    maps.p_initial = p_initial;
    maps.p_porous.assign(n, ClassDistribution::uniform());
    maps.p_solid.assign(n, ClassDistribution::uniform());
    maps.p_horizon.assign(n, ClassDistribution::uniform());
    maps.p_verticall.assign(n, ClassDistribution::uniform());
    maps.p_line = Field(W, H, 0.0);
    maps.p_vanishing.assign(n, {});
    maps.p_planar.assign(n, {});

    if (in.enabled.skyground && (in.lines.first.flag || in.lines.second.flag)) {
        gav.flags[kGavSkyGroundLine] = 1;
        gav.lines = in.lines;
        gav.occluders = in.occluders;
        maps.p_line = in.p_line;
    }
    if (in.enabled.horizon && in.horizon_y && in.horizon_rows) {
        gav.flags[kGavHorizon] = 1;
        gav.horizon_y = in.horizon_y;
        maps.p_horizon = *in.horizon_rows;
    }
    if (in.enabled.vanishing_planar && !in.pieces.empty()) {
        gav.flags[kGavPlanarSurface] = 1;
        gav.pieces = in.pieces;
        maps.p_planar = in.planar;
        maps.planar_active = true;
    }
    if (in.enabled.verticall && in.vertical.any_vertical_segments) {
        gav.flags[kGavVerticalLine] = 1;
        gav.b_scores = in.vertical.b;
        maps.p_verticall = in.vertical.rows;
    }
    if (in.enabled.vanishing_planar && in.vanishing.flag) {
        gav.flags[kGavVanishingLine] = 1;
        gav.building_regions = in.vanishing.regions;
        maps.p_vanishing = in.vanishing.rows;
        maps.vanishing_active = true;
    }
    if (in.enabled.solid && in.solid.flag) {
        gav.flags[kGavSolid] = 1;
        gav.solid_masks = in.solid.mask;
        maps.p_solid = in.solid.rows;
    }
    if (in.enabled.porous && in.porous.flag) {
        gav.flags[kGavPorous] = 1;
        gav.porous_randomness = in.porous.randomness;
        maps.p_porous = in.porous.rows;
    }

    maps.validate();
    // bug guard: a cleared flag must leave no payload behind
    if (!gav.flags[kGavSkyGroundLine] && gav.lines)
        throw InternalError("gav: payload present with flag 0");
    if (!gav.flags[kGavHorizon] && gav.horizon_y)
        throw InternalError("gav: payload present with flag 0");
    return {gav, maps};
}

inline void write_gav_report(const GlobalAttributeVector& gav, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    static const char* names[7] = {"sky/ground-line", "horizon",        "planar-surface",
                                   "vertical-line",   "vanishing-line", "solid",
                                   "porous"};
    for (int k = 0; k < 7; ++k) {
        out << gav.flags[k] << ' ' << names[k];
        if (!gav.flags[k]) {
            out << '\n';
            continue;
        }
        switch (k) {
            case kGavSkyGroundLine:
                out << " sky_cols=" << gav.lines->first.valid_count()
                    << " sky_conf=" << gav.lines->first.confidence
                    << " ground_cols=" << gav.lines->second.valid_count()
                    << " ground_conf=" << gav.lines->second.confidence
                    << " occluders=" << gav.occluders.size();
                break;
            case kGavHorizon:
                out << " row=" << *gav.horizon_y;
                break;
            case kGavPlanarSurface: {
                out << " pieces=";
                for (size_t i = 0; i < gav.pieces.size(); ++i)
                    out << (i ? "," : "") << class_name(gav.pieces[i].orientation);
                break;
            }
            case kGavVerticalLine: {
                double mx = 0;
                for (double b : *gav.b_scores) mx = std::max(mx, b);
                out << " max_b=" << mx;
                break;
            }
            case kGavVanishingLine:
                out << " regions=" << gav.building_regions.size();
                break;
            case kGavSolid: {
                long area = 0;
                for (char m : *gav.solid_masks) area += m;
                out << " mask_area=" << area;
                break;
            }
            case kGavPorous: {
                int scored = 0;
                for (double r : *gav.porous_randomness) scored += r >= 0;
                out << " segments=" << scored;
                break;
            }
        }
        out << '\n';
    }
}

}  // namespace gal

#endif

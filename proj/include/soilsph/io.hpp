#pragma once

#include <charconv>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "soilsph/scenario.hpp"

namespace soilsph {

constexpr int kScenarioSchemaVersion = 1;

constexpr int kExitOk = 0;
constexpr int kExitParse = 2;
constexpr int kExitDiverged = 3;

class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shortest decimal form that round-trips the exact binary64 value.
inline std::string fmt_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s, std::string_view what) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw ParseError("bad numeric value '" + std::string(s) + "' for " +
                         std::string(what));
    return v;
}

// ---------------------------------------------------------------------------
// Scenario files (JSON, versioned schema)
// ---------------------------------------------------------------------------

namespace detail_io {

using nlohmann::json;

template <class T>
T require(const json& j, const char* key, const std::string& ctx) {
    if (!j.contains(key))
        throw ParseError("missing field '" + ctx + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ParseError("bad field '" + ctx + key + "': " + e.what());
    }
}

template <class T>
T optional_or(const json& j, const char* key, T fallback, const std::string& ctx) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ParseError("bad field '" + ctx + key + "': " + e.what());
    }
}

inline WallCondition wall_from(const std::string& s, const std::string& ctx) {
    if (s == "none") return WallCondition::none;
    if (s == "free_roller") return WallCondition::free_roller;
    if (s == "full_fixity") return WallCondition::full_fixity;
    throw ParseError("unknown wall condition '" + s + "' at " + ctx);
}

inline std::string wall_to(WallCondition w) {
    switch (w) {
        case WallCondition::none: return "none";
        case WallCondition::free_roller: return "free_roller";
        case WallCondition::full_fixity: return "full_fixity";
    }
    return "none";
}

}  // namespace detail_io

inline ScenarioConfig parse_scenario_text(const std::string& text,
                                          const std::string& source = "<string>") {
    using nlohmann::json;
    using detail_io::optional_or;
    using detail_io::require;

    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError("scenario parse error in " + source + ": " + e.what());
    }

    ScenarioConfig cfg;
    cfg.schema_version = optional_or<int>(j, "schema_version", 1, "");
    if (cfg.schema_version != kScenarioSchemaVersion)
        throw ParseError("unsupported scenario schema version " +
                         std::to_string(cfg.schema_version));
    cfg.name = optional_or<std::string>(j, "name", "", "");

    const json& g = j.contains("geometry") ? j.at("geometry") : json::object();
    const std::string gtype = require<std::string>(g, "type", "geometry.");
    if (gtype == "rectangle") {
        cfg.geometry.kind = GeometryKind::rectangle;
        cfg.geometry.width = require<double>(g, "width", "geometry.");
        cfg.geometry.height = require<double>(g, "height", "geometry.");
    } else if (gtype == "polygon") {
        cfg.geometry.kind = GeometryKind::polygon;
        const auto verts = require<std::vector<std::vector<double>>>(g, "vertices", "geometry.");
        for (const auto& v : verts) {
            if (v.size() != 2) throw ParseError("geometry.vertices entries must be [x, y]");
            cfg.geometry.vertices.push_back({v[0], v[1]});
        }
    } else {
        throw ParseError("unknown geometry.type '" + gtype + "'");
    }

    cfg.spacing = require<double>(j, "spacing", "");
    cfg.h_ratio = optional_or<double>(j, "h_over_dx", 1.2, "");
    cfg.water_level = require<double>(j, "water_level", "");

    const json& m = j.contains("material") ? j.at("material") : json::object();
    cfg.material.E = require<double>(m, "E", "material.");
    cfg.material.nu = require<double>(m, "nu", "material.");
    cfg.material.gamma_sat = require<double>(m, "gamma_sat", "material.");
    cfg.material.gamma_unsat =
        optional_or<double>(m, "gamma_unsat", cfg.material.gamma_sat, "material.");
    cfg.material.gamma_w = optional_or<double>(m, "gamma_w", 9810.0, "material.");

    if (j.contains("boundaries")) {
        const json& b = j.at("boundaries");
        cfg.left = detail_io::wall_from(
            optional_or<std::string>(b, "left", "free_roller", "boundaries."), "boundaries.left");
        cfg.right = detail_io::wall_from(
            optional_or<std::string>(b, "right", "free_roller", "boundaries."),
            "boundaries.right");
        cfg.bottom = detail_io::wall_from(
            optional_or<std::string>(b, "bottom", "full_fixity", "boundaries."),
            "boundaries.bottom");
    }

    if (j.contains("loading")) {
        const json& l = j.at("loading");
        const std::string method =
            optional_or<std::string>(l, "method", "gravity_damped", "loading.");
        if (method == "k0")
            cfg.loading.method = LoadingMethod::k0;
        else if (method == "gravity_damped")
            cfg.loading.method = LoadingMethod::gravity_damped;
        else
            throw ParseError("unknown loading.method '" + method + "'");
        cfg.loading.xi = optional_or<double>(l, "xi", 0.002, "loading.");
        cfg.loading.duration = optional_or<double>(l, "duration", 4.0, "loading.");
        cfg.loading.friction_angle_deg =
            optional_or<double>(l, "friction_angle_deg", 30.0, "loading.");
    }

    if (j.contains("analysis")) {
        const json& a = j.at("analysis");
        cfg.analysis.enabled = optional_or<bool>(a, "enabled", false, "analysis.");
        cfg.analysis.duration = optional_or<double>(a, "duration", 0.0, "analysis.");
    }

    if (j.contains("numerics")) {
        const json& n = j.at("numerics");
        NumericsConfig& nc = cfg.numerics;
        nc.cfl = optional_or<double>(n, "cfl", nc.cfl, "numerics.");
        nc.skin_fraction = optional_or<double>(n, "skin_fraction", nc.skin_fraction, "numerics.");
        nc.alpha_visc = optional_or<double>(n, "alpha_visc", nc.alpha_visc, "numerics.");
        nc.beta_visc = optional_or<double>(n, "beta_visc", nc.beta_visc, "numerics.");
        nc.artificial_stress =
            optional_or<bool>(n, "artificial_stress", nc.artificial_stress, "numerics.");
        nc.eps_as = optional_or<double>(n, "eps_as", nc.eps_as, "numerics.");
        nc.n_as = optional_or<double>(n, "n_as", nc.n_as, "numerics.");
        nc.continuity = optional_or<bool>(n, "continuity", nc.continuity, "numerics.");
        nc.kernel_correction =
            optional_or<bool>(n, "kernel_correction", nc.kernel_correction, "numerics.");
        const std::string sf =
            optional_or<std::string>(n, "stress_form", "rhoab", "numerics.");
        if (sf == "rho2")
            nc.stress_form = StressForm::rho2;
        else if (sf == "rhoab")
            nc.stress_form = StressForm::rhoab;
        else
            throw ParseError("unknown numerics.stress_form '" + sf + "'");
        const std::string pf = optional_or<std::string>(n, "pwater_form",
                                                        "corrected_difference", "numerics.");
        if (pf == "conventional_sum")
            nc.pwater_form = PoreWaterForm::conventional_sum;
        else if (pf == "corrected_difference")
            nc.pwater_form = PoreWaterForm::corrected_difference;
        else
            throw ParseError("unknown numerics.pwater_form '" + pf + "'");
        nc.gravity = optional_or<double>(n, "gravity", nc.gravity, "numerics.");
        nc.deterministic = optional_or<bool>(n, "deterministic", nc.deterministic, "numerics.");
        nc.perturb_v = optional_or<double>(n, "perturb_v", nc.perturb_v, "numerics.");
        nc.seed = optional_or<std::uint64_t>(n, "seed", nc.seed, "numerics.");
        nc.dt_recompute_every =
            optional_or<int>(n, "dt_recompute_every", nc.dt_recompute_every, "numerics.");
    }

    if (j.contains("probes")) {
        for (const auto& p : j.at("probes")) {
            Probe probe;
            probe.label = require<std::string>(p, "label", "probes[].");
            probe.position = {require<double>(p, "x", "probes[]."),
                              require<double>(p, "y", "probes[].")};
            cfg.probes.push_back(std::move(probe));
        }
    }

    if (j.contains("output")) {
        const json& o = j.at("output");
        cfg.output.directory = optional_or<std::string>(o, "directory", "out", "output.");
        cfg.output.snapshot_every =
            optional_or<double>(o, "snapshot_every", cfg.output.snapshot_every, "output.");
        cfg.output.probe_every =
            optional_or<double>(o, "probe_every", cfg.output.probe_every, "output.");
        cfg.output.vtk = optional_or<bool>(o, "vtk", false, "output.");
    }
    return cfg;
}

inline nlohmann::json scenario_to_json(const ScenarioConfig& cfg) {
    using nlohmann::json;
    json g;
    if (cfg.geometry.kind == GeometryKind::rectangle) {
        g = {{"type", "rectangle"}, {"width", cfg.geometry.width},
             {"height", cfg.geometry.height}};
    } else {
        json verts = json::array();
        for (const Vec2& v : cfg.geometry.vertices) verts.push_back({v.x, v.y});
        g = {{"type", "polygon"}, {"vertices", verts}};
    }
    json probes = json::array();
    for (const Probe& p : cfg.probes)
        probes.push_back({{"label", p.label}, {"x", p.position.x}, {"y", p.position.y}});

    return json{
        {"schema_version", cfg.schema_version},
        {"name", cfg.name},
        {"geometry", g},
        {"spacing", cfg.spacing},
        {"h_over_dx", cfg.h_ratio},
        {"water_level", cfg.water_level},
        {"material",
         {{"E", cfg.material.E},
          {"nu", cfg.material.nu},
          {"gamma_sat", cfg.material.gamma_sat},
          {"gamma_unsat", cfg.material.gamma_unsat},
          {"gamma_w", cfg.material.gamma_w}}},
        {"boundaries",
         {{"left", detail_io::wall_to(cfg.left)},
          {"right", detail_io::wall_to(cfg.right)},
          {"bottom", detail_io::wall_to(cfg.bottom)}}},
        {"loading",
         {{"method", cfg.loading.method == LoadingMethod::k0 ? "k0" : "gravity_damped"},
          {"xi", cfg.loading.xi},
          {"duration", cfg.loading.duration},
          {"friction_angle_deg", cfg.loading.friction_angle_deg}}},
        {"analysis", {{"enabled", cfg.analysis.enabled}, {"duration", cfg.analysis.duration}}},
        {"numerics",
         {{"cfl", cfg.numerics.cfl},
          {"skin_fraction", cfg.numerics.skin_fraction},
          {"alpha_visc", cfg.numerics.alpha_visc},
          {"beta_visc", cfg.numerics.beta_visc},
          {"artificial_stress", cfg.numerics.artificial_stress},
          {"eps_as", cfg.numerics.eps_as},
          {"n_as", cfg.numerics.n_as},
          {"continuity", cfg.numerics.continuity},
          {"kernel_correction", cfg.numerics.kernel_correction},
          {"stress_form", cfg.numerics.stress_form == StressForm::rho2 ? "rho2" : "rhoab"},
          {"pwater_form", cfg.numerics.pwater_form == PoreWaterForm::conventional_sum
                              ? "conventional_sum"
                              : "corrected_difference"},
          {"gravity", cfg.numerics.gravity},
          {"deterministic", cfg.numerics.deterministic},
          {"perturb_v", cfg.numerics.perturb_v},
          {"seed", cfg.numerics.seed},
          {"dt_recompute_every", cfg.numerics.dt_recompute_every}}},
        {"probes", probes},
        {"output",
         {{"directory", cfg.output.directory},
          {"snapshot_every", cfg.output.snapshot_every},
          {"probe_every", cfg.output.probe_every},
          {"vtk", cfg.output.vtk}}},
    };
}

inline std::string emit_scenario(const ScenarioConfig& cfg) {
    return scenario_to_json(cfg).dump(2) + "\n";
}

inline ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open scenario file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_scenario_text(ss.str(), path);
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

struct ValidationReport {
    std::vector<std::string> errors;
    std::vector<std::string> warnings;

    bool ok() const { return errors.empty(); }
};

inline ValidationReport validate_scenario(const ScenarioConfig& cfg) {
    ValidationReport r;
    const auto err = [&r](std::string s) { r.errors.push_back(std::move(s)); };
    const auto warn = [&r](std::string s) { r.warnings.push_back(std::move(s)); };

    if (!(cfg.spacing > 0.0)) err("particle spacing must be positive");
    if (!(cfg.h_ratio > 0.0)) err("h_over_dx must be positive");
    if (!(cfg.material.E > 0.0)) err("Young's modulus must be positive");
    if (cfg.material.nu >= 0.5)
        err("Poisson ratio singular (nu >= 0.5 makes the bulk modulus infinite)");
    else if (cfg.material.nu <= -1.0)
        err("Poisson ratio must exceed -1");
    if (!(cfg.material.gamma_sat > 0.0)) err("gamma_sat must be positive");
    if (!(cfg.material.gamma_w > 0.0)) err("gamma_w must be positive");
    if (cfg.material.gamma_unsat > cfg.material.gamma_sat)
        warn("gamma_unsat exceeds gamma_sat");

    if (cfg.loading.xi < 0.0 || cfg.loading.xi > 0.01)
        err("damping coefficient xi outside [0, 0.01]");
    if (cfg.loading.xi < 0.001 || cfg.loading.xi > 0.005)
        warn("damping coefficient xi outside recommended range 0.001-0.005");
    if (cfg.loading.method == LoadingMethod::gravity_damped && !(cfg.loading.duration > 0.0))
        err("loading duration must be positive for gravity loading");
    if (cfg.analysis.enabled && !(cfg.analysis.duration > 0.0))
        warn("analysis phase enabled with non-positive duration");

    const auto poly = cfg.geometry.polygon();
    if (poly.size() < 3) {
        err("geometry is degenerate");
        return r;
    }
    double x_lo = poly[0].x, x_hi = poly[0].x, y_lo = poly[0].y, y_hi = poly[0].y;
    for (const Vec2& v : poly) {
        x_lo = std::min(x_lo, v.x);
        x_hi = std::max(x_hi, v.x);
        y_lo = std::min(y_lo, v.y);
        y_hi = std::max(y_hi, v.y);
    }
    if (!(x_hi > x_lo && y_hi > y_lo)) err("geometry is degenerate");

    if (cfg.spacing > 0.0 && cfg.h_ratio > 0.0) {
        const double band = 2.0 * cfg.h();
        if (x_hi - x_lo < 2.0 * band || y_hi - y_lo < 2.0 * band)
            warn("domain thinner than two kernel supports; boundary bands overlap");
    }
    if (cfg.water_level < y_lo) warn("water level below the soil body; pore pressures are zero");
    for (const Probe& p : cfg.probes) {
        if (p.position.x < x_lo || p.position.x > x_hi || p.position.y < y_lo ||
            p.position.y > y_hi)
            warn("probe '" + p.label + "' lies outside the geometry bounding box");
    }
    if (!(cfg.numerics.cfl > 0.0) || cfg.numerics.cfl > 1.0)
        err("cfl must lie in (0, 1]");
    return r;
}

// ---------------------------------------------------------------------------
// Snapshots (delimited text; bitwise round trip)
// ---------------------------------------------------------------------------

inline ParticleKind kind_from(std::string_view s) {
    if (s == "soil") return ParticleKind::soil;
    if (s == "ghost") return ParticleKind::ghost;
    if (s == "virtual_boundary") return ParticleKind::virtual_boundary;
    throw ParseError("unknown particle kind '" + std::string(s) + "'");
}

inline void write_snapshot(std::ostream& os, double time, std::span<const Particle> parts) {
    os << "# soilsph snapshot schema 1\n";
    os << "# time_s " << fmt_double(time) << "\n";
    os << "id\tkind\tx_m\ty_m\tvx_mps\tvy_mps\trho_kgpm3\trho0_kgpm3\tm_kg"
          "\tsxx_eff_pa\tsyy_eff_pa\tszz_eff_pa\tsxy_eff_pa\tpw_pa"
          "\tsxx_tot_pa\tsyy_tot_pa\tszz_tot_pa\tsxy_tot_pa\tmaterial\n";
    for (std::size_t i = 0; i < parts.size(); ++i) {
        const Particle& p = parts[i];
        const Sym2& s = p.sigma_eff;
        os << i << '\t' << to_string(p.kind) << '\t' << fmt_double(p.x.x) << '\t'
           << fmt_double(p.x.y) << '\t' << fmt_double(p.v.x) << '\t' << fmt_double(p.v.y)
           << '\t' << fmt_double(p.rho) << '\t' << fmt_double(p.rho0) << '\t'
           << fmt_double(p.m) << '\t' << fmt_double(s.xx) << '\t' << fmt_double(s.yy) << '\t'
           << fmt_double(s.zz) << '\t' << fmt_double(s.xy) << '\t' << fmt_double(p.p_w)
           << '\t' << fmt_double(s.xx + p.p_w) << '\t' << fmt_double(s.yy + p.p_w) << '\t'
           << fmt_double(s.zz + p.p_w) << '\t' << fmt_double(s.xy) << '\t' << p.material_id
           << '\n';
    }
}

inline void write_snapshot_file(const std::string& path, double time,
                                std::span<const Particle> parts) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write snapshot '" + path + "'");
    write_snapshot(os, time, parts);
}

struct Snapshot {
    double time = 0.0;
    std::vector<Particle> particles;
};

inline Snapshot read_snapshot(std::istream& is) {
    Snapshot snap;
    std::string line;
    std::vector<std::string> header;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream ls(line);
            std::string hash, key;
            ls >> hash >> key;
            if (key == "time_s") {
                std::string v;
                ls >> v;
                snap.time = parse_double(v, "time_s");
            }
            continue;
        }
        std::istringstream ls(line);
        std::string tok;
        std::vector<std::string> toks;
        while (std::getline(ls, tok, '\t')) toks.push_back(tok);
        if (header.empty()) {
            header = toks;
            continue;
        }
        if (toks.size() != header.size())
            throw ParseError("snapshot row has " + std::to_string(toks.size()) +
                             " fields, expected " + std::to_string(header.size()));
        Particle p;
        for (std::size_t c = 0; c < header.size(); ++c) {
            const std::string& h = header[c];
            const std::string& v = toks[c];
            if (h == "kind") p.kind = kind_from(v);
            else if (h == "x_m") p.x.x = parse_double(v, h);
            else if (h == "y_m") p.x.y = parse_double(v, h);
            else if (h == "vx_mps") p.v.x = parse_double(v, h);
            else if (h == "vy_mps") p.v.y = parse_double(v, h);
            else if (h == "rho_kgpm3") p.rho = parse_double(v, h);
            else if (h == "rho0_kgpm3") p.rho0 = parse_double(v, h);
            else if (h == "m_kg") p.m = parse_double(v, h);
            else if (h == "sxx_eff_pa") p.sigma_eff.xx = parse_double(v, h);
            else if (h == "syy_eff_pa") p.sigma_eff.yy = parse_double(v, h);
            else if (h == "szz_eff_pa") p.sigma_eff.zz = parse_double(v, h);
            else if (h == "sxy_eff_pa") p.sigma_eff.xy = parse_double(v, h);
            else if (h == "pw_pa") p.p_w = parse_double(v, h);
            else if (h == "material") p.material_id = static_cast<int>(parse_double(v, h));
            // id and derived total-stress columns are not state
        }
        snap.particles.push_back(p);
    }
    return snap;
}

inline Snapshot read_snapshot_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ParseError("cannot open snapshot '" + path + "'");
    return read_snapshot(is);
}

// ---------------------------------------------------------------------------
// Legacy VTK visualization mesh (point cloud with vertices)
// ---------------------------------------------------------------------------

inline void write_vtk(std::ostream& os, double time, std::span<const Particle> parts) {
    os << "# vtk DataFile Version 3.0\n";
    os << "soilsph particles t=" << fmt_double(time) << "\n";
    os << "ASCII\nDATASET POLYDATA\n";
    os << "POINTS " << parts.size() << " double\n";
    for (const Particle& p : parts)
        os << fmt_double(p.x.x) << ' ' << fmt_double(p.x.y) << " 0\n";
    os << "VERTICES " << parts.size() << ' ' << 2 * parts.size() << "\n";
    for (std::size_t i = 0; i < parts.size(); ++i) os << "1 " << i << "\n";
    os << "POINT_DATA " << parts.size() << "\n";
    os << "SCALARS kind int 1\nLOOKUP_TABLE default\n";
    for (const Particle& p : parts) os << int(p.kind) << "\n";
    os << "SCALARS syy_eff double 1\nLOOKUP_TABLE default\n";
    for (const Particle& p : parts) os << fmt_double(p.sigma_eff.yy) << "\n";
    os << "SCALARS syy_total double 1\nLOOKUP_TABLE default\n";
    for (const Particle& p : parts) os << fmt_double(p.sigma_eff.yy + p.p_w) << "\n";
    os << "SCALARS pw double 1\nLOOKUP_TABLE default\n";
    for (const Particle& p : parts) os << fmt_double(p.p_w) << "\n";
    os << "SCALARS rho double 1\nLOOKUP_TABLE default\n";
    for (const Particle& p : parts) os << fmt_double(p.rho) << "\n";
    os << "VECTORS velocity double\n";
    for (const Particle& p : parts)
        os << fmt_double(p.v.x) << ' ' << fmt_double(p.v.y) << " 0\n";
}

inline void write_vtk_file(const std::string& path, double time,
                           std::span<const Particle> parts) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write vtk file '" + path + "'");
    write_vtk(os, time, parts);
}

// ---------------------------------------------------------------------------
// Probes
// ---------------------------------------------------------------------------

struct ProbeSample {
    double t = 0.0;
    Sym2 sigma_eff;
    double p_w = 0.0;
    Vec2 v;
};

struct ProbeSeries {
    std::string label;
    Vec2 position;
    std::vector<ProbeSample> samples;
};

/// Shepard-normalized kernel interpolation at an arbitrary point, summing
/// over soil particles only.
inline ProbeSample sample_probe(std::span<const Particle> soil, const CubicSplineKernel& kernel,
                                const Vec2& pos, double t) {
    ProbeSample s;
    s.t = t;
    double wsum = 0.0;
    for (const Particle& p : soil) {
        const double r = (p.x - pos).norm();
        if (r >= kernel.support_radius()) continue;
        const double w = kernel.w(r) * p.m / p.rho;
        wsum += w;
        s.sigma_eff += w * p.sigma_eff;
        s.p_w += w * p.p_w;
        s.v += w * p.v;
    }
    if (wsum > 0.0) {
        const double inv = 1.0 / wsum;
        s.sigma_eff = inv * s.sigma_eff;
        s.p_w *= inv;
        s.v *= inv;
    }
    return s;
}

inline void write_probe_series(std::ostream& os, const ProbeSeries& series) {
    os << "# soilsph probe " << series.label << " x_m " << fmt_double(series.position.x)
       << " y_m " << fmt_double(series.position.y) << "\n";
    os << "t_s\tsxx_eff_pa\tsyy_eff_pa\tszz_eff_pa\tsxy_eff_pa\tpw_pa"
          "\tsxx_tot_pa\tsyy_tot_pa\tszz_tot_pa\tsxy_tot_pa\tvx_mps\tvy_mps\n";
    for (const ProbeSample& s : series.samples) {
        os << fmt_double(s.t) << '\t' << fmt_double(s.sigma_eff.xx) << '\t'
           << fmt_double(s.sigma_eff.yy) << '\t' << fmt_double(s.sigma_eff.zz) << '\t'
           << fmt_double(s.sigma_eff.xy) << '\t' << fmt_double(s.p_w) << '\t'
           << fmt_double(s.sigma_eff.xx + s.p_w) << '\t' << fmt_double(s.sigma_eff.yy + s.p_w)
           << '\t' << fmt_double(s.sigma_eff.zz + s.p_w) << '\t'
           << fmt_double(s.sigma_eff.xy) << '\t' << fmt_double(s.v.x) << '\t'
           << fmt_double(s.v.y) << '\n';
    }
}

inline void write_probe_file(const std::string& path, const ProbeSeries& series) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write probe file '" + path + "'");
    write_probe_series(os, series);
}

inline ProbeSeries read_probe_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ParseError("cannot open probe file '" + path + "'");
    ProbeSeries series;
    std::string line;
    std::vector<std::string> header;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream ls(line);
            std::string hash, proj, word;
            ls >> hash >> proj >> word;
            if (proj == "soilsph" && word == "probe") {
                std::string label, key, xv, yv;
                ls >> label >> key >> xv >> key >> yv;
                series.label = label;
                series.position = {parse_double(xv, "x_m"), parse_double(yv, "y_m")};
            }
            continue;
        }
        std::istringstream ls(line);
        std::string tok;
        std::vector<std::string> toks;
        while (std::getline(ls, tok, '\t')) toks.push_back(tok);
        if (header.empty()) {
            header = toks;
            continue;
        }
        ProbeSample s;
        for (std::size_t c = 0; c < header.size() && c < toks.size(); ++c) {
            const std::string& h = header[c];
            const std::string& v = toks[c];
            if (h == "t_s") s.t = parse_double(v, h);
            else if (h == "sxx_eff_pa") s.sigma_eff.xx = parse_double(v, h);
            else if (h == "syy_eff_pa") s.sigma_eff.yy = parse_double(v, h);
            else if (h == "szz_eff_pa") s.sigma_eff.zz = parse_double(v, h);
            else if (h == "sxy_eff_pa") s.sigma_eff.xy = parse_double(v, h);
            else if (h == "pw_pa") s.p_w = parse_double(v, h);
            else if (h == "vx_mps") s.v.x = parse_double(v, h);
            else if (h == "vy_mps") s.v.y = parse_double(v, h);
        }
        series.samples.push_back(s);
    }
    return series;
}

// ---------------------------------------------------------------------------
// Probe comparison report
// ---------------------------------------------------------------------------

struct ProbeReportRow {
    std::string probe;
    std::string quantity;
    double final_value = 0.0;
    std::optional<double> target;
    std::optional<double> rel_error;
};

/// Mean of the last `fraction` of samples (at least one sample).
inline double series_tail_mean(const ProbeSeries& s, double (*get)(const ProbeSample&),
                               double fraction = 0.1) {
    if (s.samples.empty()) return 0.0;
    const auto n = s.samples.size();
    const auto first = n - std::max<std::size_t>(1, static_cast<std::size_t>(fraction * n));
    double sum = 0.0;
    for (std::size_t i = first; i < n; ++i) sum += get(s.samples[i]);
    return sum / static_cast<double>(n - first);
}

inline std::vector<ProbeReportRow> probe_report(const ProbeSeries& series,
                                                const ScenarioConfig* cfg,
                                                bool analytic_oracle) {
    std::vector<ProbeReportRow> rows;
    const auto add = [&](const char* qty, double value, std::optional<double> target) {
        ProbeReportRow row{series.label, qty, value, target, std::nullopt};
        if (target) {
            const double denom = std::max(std::abs(*target), 1e-300);
            row.rel_error = std::abs(value - *target) / denom;
        }
        rows.push_back(std::move(row));
    };

    const double syy_eff = series_tail_mean(series, [](const ProbeSample& s) {
        return s.sigma_eff.yy;
    });
    const double pw = series_tail_mean(series, [](const ProbeSample& s) { return s.p_w; });
    const double syy_tot = series_tail_mean(series, [](const ProbeSample& s) {
        return s.sigma_eff.yy + s.p_w;
    });

    if (analytic_oracle && cfg) {
        const auto soil = build_lattice(*cfg);
        const auto poly = cfg->geometry.polygon();
        double x_lo = poly[0].x, x_hi = poly[0].x;
        for (const Vec2& v : poly) {
            x_lo = std::min(x_lo, v.x);
            x_hi = std::max(x_hi, v.x);
        }
        const SurfaceProfile surf = surface_profile(soil, x_lo, x_hi, cfg->spacing);
        const double s_elev = surf.elevation(series.position.x);
        const double y = series.position.y;
        add("syy_eff_pa", syy_eff,
            analytic_sigma_v_eff(s_elev, y, cfg->water_level, cfg->material));
        add("syy_tot_pa", syy_tot,
            analytic_sigma_v_total(s_elev, y, cfg->water_level, cfg->material));
        add("pw_pa", pw, hydrostatic_pw(y, cfg->water_level, cfg->material.gamma_w));
    } else {
        add("syy_eff_pa", syy_eff, std::nullopt);
        add("syy_tot_pa", syy_tot, std::nullopt);
        add("pw_pa", pw, std::nullopt);
    }
    return rows;
}

inline void write_probe_report(std::ostream& os, std::span<const ProbeReportRow> rows) {
    os << "probe\tquantity\tfinal\ttarget\trel_error\n";
    for (const ProbeReportRow& r : rows) {
        os << r.probe << '\t' << r.quantity << '\t' << fmt_double(r.final_value) << '\t';
        os << (r.target ? fmt_double(*r.target) : std::string()) << '\t';
        os << (r.rel_error ? fmt_double(*r.rel_error) : std::string()) << '\n';
    }
}

}  // namespace soilsph

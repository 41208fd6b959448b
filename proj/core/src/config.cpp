#include "bosejj/config.hpp"

#include "json.hpp"

#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

namespace bosejj {

namespace {

using nlohmann::json;

struct Collector {
    std::vector<std::string> errors;

    void add(const std::string& path, const std::string& what) {
        errors.push_back(path + ": " + what);
    }
};

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<const char*> allowed, Collector& errs) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* k : allowed)
            if (it.key() == k) {
                known = true;
                break;
            }
        if (!known) errs.add(path, "unknown key '" + it.key() + "'");
    }
}

double num_field(const json& obj, const std::string& path, const char* key,
                 double fallback, Collector& errs) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number()) {
        errs.add(path + "." + key, "expected a number");
        return fallback;
    }
    return v.get<double>();
}

long long int_field(const json& obj, const std::string& path, const char* key,
                    long long fallback, Collector& errs) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number_integer()) {
        errs.add(path + "." + key, "expected an integer");
        return fallback;
    }
    return v.get<long long>();
}

std::string str_field(const json& obj, const std::string& path, const char* key,
                      Collector& errs) {
    if (!obj.contains(key)) {
        errs.add(path, std::string("missing key '") + key + "'");
        return {};
    }
    const json& v = obj.at(key);
    if (!v.is_string()) {
        errs.add(path + "." + key, "expected a string");
        return {};
    }
    return v.get<std::string>();
}

std::vector<int> site_field(const json& obj, const std::string& path, const char* key,
                            Collector& errs) {
    std::vector<int> site;
    if (!obj.contains(key)) {
        errs.add(path, std::string("missing key '") + key + "'");
        return site;
    }
    const json& v = obj.at(key);
    if (!v.is_array()) {
        errs.add(path + "." + key, "expected an array of integers");
        return site;
    }
    for (const json& e : v) {
        if (!e.is_number_integer()) {
            errs.add(path + "." + key, "expected an array of integers");
            return {};
        }
        site.push_back(e.get<int>());
    }
    return site;
}

FormFactor parse_form_factor(const json& j, const std::string& path, Collector& errs) {
    if (!j.is_object()) {
        errs.add(path, "expected an object");
        return KDeltaFormFactor{};
    }
    const std::string type = str_field(j, path, "type", errs);
    if (type == "radial") {
        check_keys(j, path, {"type", "support_radius", "samples"}, errs);
        RadialFormFactor g;
        g.support_radius = num_field(j, path, "support_radius", 1.0, errs);
        if (!(g.support_radius > 0.0))
            errs.add(path + ".support_radius", "must be > 0");
        if (j.contains("samples") && j.at("samples").is_array()) {
            for (const json& e : j.at("samples")) {
                if (!e.is_number()) {
                    errs.add(path + ".samples", "expected an array of numbers");
                    break;
                }
                g.samples.push_back(e.get<double>());
            }
        } else {
            errs.add(path, "missing key 'samples'");
        }
        if (g.samples.size() < 2) errs.add(path + ".samples", "need at least two samples");
        return g;
    }
    if (type == "k_delta") {
        check_keys(j, path, {"type", "site"}, errs);
        return KDeltaFormFactor{site_field(j, path, "site", errs)};
    }
    if (type == "explicit") {
        check_keys(j, path, {"type", "entries"}, errs);
        ExplicitFormFactor f;
        if (!j.contains("entries") || !j.at("entries").is_array()) {
            errs.add(path, "missing array 'entries'");
            return f;
        }
        std::size_t i = 0;
        for (const json& e : j.at("entries")) {
            const std::string epath = path + ".entries[" + std::to_string(i++) + "]";
            if (!e.is_object()) {
                errs.add(epath, "expected an object");
                continue;
            }
            check_keys(e, epath, {"site", "re", "im"}, errs);
            const std::vector<int> site = site_field(e, epath, "site", errs);
            const double re = num_field(e, epath, "re", 0.0, errs);
            const double im = num_field(e, epath, "im", 0.0, errs);
            f.entries[site] = cdouble{re, im};
        }
        return f;
    }
    if (!type.empty()) errs.add(path + ".type", "expected one of radial, k_delta, explicit");
    return KDeltaFormFactor{};
}

PhaseFunctional parse_phase(const json& j, const std::string& path, Collector& errs) {
    if (!j.is_object()) {
        errs.add(path, "expected an object");
        return {};
    }
    const std::string type = str_field(j, path, "type", errs);
    if (type == "none") {
        check_keys(j, path, {"type"}, errs);
        return {};
    }
    if (type == "ssb") {
        check_keys(j, path, {"type", "tau", "D"}, errs);
        SsbPhase p;
        p.tau = num_field(j, path, "tau", 0.0, errs);
        p.D = num_field(j, path, "D", 1.0, errs);
        return p;
    }
    if (type == "gcs") {
        check_keys(j, path, {"type", "s1", "s2", "D"}, errs);
        GcsPhase p;
        p.s1 = num_field(j, path, "s1", 1.0, errs);
        p.s2 = num_field(j, path, "s2", 0.0, errs);
        p.D = num_field(j, path, "D", 1.0, errs);
        return p;
    }
    if (!type.empty()) errs.add(path + ".type", "expected one of none, ssb, gcs");
    return {};
}

ReservoirSpec parse_reservoir(const json& j, const std::string& path, Collector& errs) {
    ReservoirSpec r;
    if (!j.is_object()) {
        errs.add(path, "expected an object");
        return r;
    }
    check_keys(j, path, {"kind", "dim", "beta", "mu", "form_factor", "phase", "density_csv"},
               errs);
    const std::string kind = str_field(j, path, "kind", errs);
    if (kind == "continuum_rd")
        r.kind = ReservoirKind::ContinuumRd;
    else if (kind == "lattice_zd")
        r.kind = ReservoirKind::LatticeZd;
    else if (kind == "comb_zdz")
        r.kind = ReservoirKind::CombZdZ;
    else if (kind == "tabulated")
        r.kind = ReservoirKind::Tabulated;
    else if (!kind.empty())
        errs.add(path + ".kind",
                 "expected one of continuum_rd, lattice_zd, comb_zdz, tabulated");
    r.dim = static_cast<int>(int_field(j, path, "dim", 3, errs));
    r.beta = num_field(j, path, "beta", 1.0, errs);
    r.mu = num_field(j, path, "mu", 0.0, errs);
    if (j.contains("form_factor"))
        r.form_factor = parse_form_factor(j.at("form_factor"), path + ".form_factor", errs);
    else if (r.kind != ReservoirKind::Tabulated)
        errs.add(path, "missing key 'form_factor'");
    if (j.contains("phase")) r.phase = parse_phase(j.at("phase"), path + ".phase", errs);
    if (j.contains("density_csv")) {
        if (r.kind != ReservoirKind::Tabulated)
            errs.add(path + ".density_csv", "only tabulated reservoirs take a density table");
        else if (j.at("density_csv").is_string())
            r.density_csv = j.at("density_csv").get<std::string>();
        else
            errs.add(path + ".density_csv", "expected a string");
    } else if (r.kind == ReservoirKind::Tabulated) {
        errs.add(path, "missing key 'density_csv'");
    }
    return r;
}

void parse_numerics(const json& j, RunConfig& cfg, Collector& errs) {
    const std::string path = "numerics";
    if (!j.is_object()) {
        errs.add(path, "expected an object");
        return;
    }
    check_keys(j, path,
               {"grid_points", "mc_samples", "mc_sigma_frac", "eps0", "lanczos_steps",
                "seed", "threads", "modes_per_reservoir", "eta_gap_threshold",
                "channel_threshold", "zd_patch_radius", "comb_base_radius",
                "comb_tooth_length", "boundary_margin", "contour_eps0"},
               errs);
    SpectralOptions& sp = cfg.ness.spectral;
    sp.grid_points = static_cast<int>(int_field(j, path, "grid_points", sp.grid_points, errs));
    if (sp.grid_points < 2) errs.add(path + ".grid_points", "must be >= 2");
    sp.mc_samples = static_cast<long>(int_field(j, path, "mc_samples", sp.mc_samples, errs));
    if (sp.mc_samples <= 0) errs.add(path + ".mc_samples", "must be > 0");
    sp.mc_sigma_frac = num_field(j, path, "mc_sigma_frac", sp.mc_sigma_frac, errs);
    if (!(sp.mc_sigma_frac > 0.0)) errs.add(path + ".mc_sigma_frac", "must be > 0");
    sp.eps0 = num_field(j, path, "eps0", sp.eps0, errs);
    if (!(sp.eps0 > 0.0)) errs.add(path + ".eps0", "must be > 0");
    sp.lanczos_steps = static_cast<int>(int_field(j, path, "lanczos_steps", sp.lanczos_steps, errs));
    if (sp.lanczos_steps <= 0) errs.add(path + ".lanczos_steps", "must be > 0");
    if (j.contains("seed")) {
        cfg.seed_given = true;
        sp.seed = static_cast<std::uint64_t>(int_field(j, path, "seed", 1, errs));
    }
    sp.threads = static_cast<int>(int_field(j, path, "threads", sp.threads, errs));
    if (sp.threads <= 0) errs.add(path + ".threads", "must be > 0");
    cfg.modes_per_reservoir =
        static_cast<int>(int_field(j, path, "modes_per_reservoir", cfg.modes_per_reservoir, errs));
    if (cfg.modes_per_reservoir < 2) errs.add(path + ".modes_per_reservoir", "must be >= 2");
    cfg.ness.eta_gap_threshold =
        num_field(j, path, "eta_gap_threshold", cfg.ness.eta_gap_threshold, errs);
    if (!(cfg.ness.eta_gap_threshold > 0.0))
        errs.add(path + ".eta_gap_threshold", "must be > 0");
    cfg.channel_threshold = num_field(j, path, "channel_threshold", cfg.channel_threshold, errs);
    if (!(cfg.channel_threshold > 0.0)) errs.add(path + ".channel_threshold", "must be > 0");
    cfg.ness.zd_patch_radius =
        static_cast<int>(int_field(j, path, "zd_patch_radius", cfg.ness.zd_patch_radius, errs));
    if (cfg.ness.zd_patch_radius <= 0) errs.add(path + ".zd_patch_radius", "must be > 0");
    cfg.ness.comb_base_radius =
        static_cast<int>(int_field(j, path, "comb_base_radius", cfg.ness.comb_base_radius, errs));
    if (cfg.ness.comb_base_radius <= 0) errs.add(path + ".comb_base_radius", "must be > 0");
    cfg.ness.comb_tooth_length =
        static_cast<int>(int_field(j, path, "comb_tooth_length", cfg.ness.comb_tooth_length, errs));
    if (cfg.ness.comb_tooth_length <= 0) errs.add(path + ".comb_tooth_length", "must be > 0");
    cfg.ness.boundary_margin =
        static_cast<int>(int_field(j, path, "boundary_margin", cfg.ness.boundary_margin, errs));
    if (cfg.ness.boundary_margin <= 0) errs.add(path + ".boundary_margin", "must be > 0");
    cfg.contour_eps0 = num_field(j, path, "contour_eps0", cfg.contour_eps0, errs);
    if (!(cfg.contour_eps0 > 0.0)) errs.add(path + ".contour_eps0", "must be > 0");
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> list)
    : std::runtime_error([&list] {
          std::string all = "configuration invalid";
          for (const std::string& s : list) all += "\n  " + s;
          return all;
      }()),
      issues(std::move(list)) {}

RunConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError({std::string("invalid JSON: ") + e.what()});
    }
    if (!j.is_object()) throw ConfigError({"top level: expected an object"});

    Collector errs;
    RunConfig cfg;
    check_keys(j, "top level", {"system", "reservoirs", "numerics", "evolve"}, errs);

    if (j.contains("system")) {
        const json& sys = j.at("system");
        if (!sys.is_object()) {
            errs.add("system", "expected an object");
        } else {
            check_keys(sys, "system", {"omega", "lambda"}, errs);
            cfg.model.system.omega = num_field(sys, "system", "omega", 1.0, errs);
            cfg.model.system.lambda = num_field(sys, "system", "lambda", 0.1, errs);
        }
    }

    if (!j.contains("reservoirs") || !j.at("reservoirs").is_array() ||
        j.at("reservoirs").empty()) {
        errs.add("reservoirs", "expected a non-empty array");
    } else {
        std::size_t i = 0;
        for (const json& r : j.at("reservoirs"))
            cfg.model.reservoirs.push_back(
                parse_reservoir(r, "reservoirs[" + std::to_string(i++) + "]", errs));
    }

    if (j.contains("numerics")) parse_numerics(j.at("numerics"), cfg, errs);

    if (j.contains("evolve")) {
        const json& e = j.at("evolve");
        if (!e.is_object()) {
            errs.add("evolve", "expected an object");
        } else {
            check_keys(e, "evolve", {"t_max", "samples"}, errs);
            cfg.evolve_t_max = num_field(e, "evolve", "t_max", 0.0, errs);
            if (e.contains("t_max") && !(cfg.evolve_t_max > 0.0))
                errs.add("evolve.t_max", "must be > 0");
            cfg.evolve_samples =
                static_cast<int>(int_field(e, "evolve", "samples", cfg.evolve_samples, errs));
            if (cfg.evolve_samples < 2) errs.add("evolve.samples", "must be >= 2");
        }
    }

    // Model invariants; exactly zero coupling is demoted to a warning so the
    // decoupled limit stays runnable for diagnostics.
    CoupledModel checked = cfg.model;
    if (checked.system.lambda == 0.0) {
        checked.system.lambda = 1.0;
        cfg.warnings.push_back(
            "system.lambda = 0: decoupled limit, steady-state functionals are trivial");
    }
    for (const std::string& v : validate(checked)) errs.errors.push_back("model: " + v);

    bool sampled = false;
    for (const ReservoirSpec& r : cfg.model.reservoirs)
        sampled = sampled || r.kind != ReservoirKind::Tabulated;
    if (sampled && !cfg.seed_given)
        errs.add("numerics.seed", "required when reservoir densities are sampled");

    if (!errs.errors.empty()) throw ConfigError(std::move(errs.errors));
    cfg.canonical = j.dump();
    return cfg;
}

void apply_seed_override(RunConfig& cfg, std::uint64_t seed) {
    cfg.ness.spectral.seed = seed;
    cfg.seed_given = true;
    cfg.canonical += "\nseed-override=" + std::to_string(seed);
}

void apply_threads_override(RunConfig& cfg, int threads) {
    if (threads <= 0) throw ConfigError({"--threads: must be > 0"});
    cfg.ness.spectral.threads = threads;
}

std::uint64_t config_hash(const RunConfig& cfg) { return fnv1a64(cfg.canonical); }

}  // namespace bosejj

#include "netflux/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <sstream>

#include "netflux/errors.hpp"
#include "netflux/toml.hpp"

namespace netflux {

namespace {

ResolvedFunction resolve_value(const toml::Value& v, const std::string& path) {
    try {
        if (v.is_number()) return resolve(v.as_number());
        if (v.is_string()) return resolve(v.as_string());
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
    throw ConfigError(path + ": expected a number or function string");
}

double number_at(const toml::Value& v, const std::string& path) {
    if (!v.is_number()) throw ConfigError(path + ": expected a number");
    return v.as_number();
}

NewtonConfig load_newton(const toml::Value* tbl) {
    NewtonConfig n;
    if (!tbl) return n;
    if (auto* v = tbl->find("eps_abs")) n.eps_abs = number_at(*v, "time.newton.eps_abs");
    if (auto* v = tbl->find("max_iterations")) {
        n.max_iterations = static_cast<int>(number_at(*v, "time.newton.max_iterations"));
        if (n.max_iterations < 1) throw ConfigError("time.newton.max_iterations: must be >= 1");
    }
    if (auto* v = tbl->find("strategy")) {
        if (!v->is_string()) throw ConfigError("time.newton.strategy: expected a string");
        const std::string& s = v->as_string();
        if (s == "damped")
            n.strategy = NewtonConfig::Strategy::Damped;
        else if (s == "line_search")
            n.strategy = NewtonConfig::Strategy::LineSearch;
        else
            throw ConfigError("time.newton.strategy: unknown strategy '" + s + "'");
    }
    if (auto* v = tbl->find("alpha")) {
        n.alpha = number_at(*v, "time.newton.alpha");
        if (n.alpha <= 0.0 || n.alpha > 1.0) throw ConfigError("time.newton.alpha: must be in (0,1]");
    }
    if (n.eps_abs <= 0.0) throw ConfigError("time.newton.eps_abs: must be positive");
    return n;
}

BoundaryConditionConfig load_boundary_condition(const toml::Value& v, const std::string& path) {
    BoundaryConditionConfig bc;
    if (v.is_number() || v.is_string()) {
        // Shorthand: a bare value is Neumann flux data g.
        bc.g = resolve_value(v, path);
        return bc;
    }
    if (!v.is_table()) throw ConfigError(path + ": expected a table or function value");
    const auto* type = v.find("type");
    if (!type || !type->is_string()) throw ConfigError(path + ".type: required string");
    const std::string& t = type->as_string();
    if (t == "neumann") {
        bc.type = BoundaryConditionConfig::Type::Neumann;
        bc.alpha = 0.0;
        bc.beta = 1.0;
    } else if (t == "dirichlet") {
        bc.type = BoundaryConditionConfig::Type::Dirichlet;
        bc.alpha = 1.0;
        bc.beta = 0.0;
    } else if (t == "robin") {
        bc.type = BoundaryConditionConfig::Type::Robin;
        const auto* a = v.find("alpha");
        const auto* b = v.find("beta");
        if (!a || !b) throw ConfigError(path + ": robin requires alpha and beta");
        bc.alpha = number_at(*a, path + ".alpha");
        bc.beta = number_at(*b, path + ".beta");
        if (bc.alpha == 0.0 && bc.beta == 0.0)
            throw ConfigError(path + ": robin (alpha,beta) must not both be zero");
    } else {
        throw ConfigError(path + ".type: unknown boundary type '" + t + "'");
    }
    if (const auto* g = v.find("g")) bc.g = resolve_value(*g, path + ".g");
    return bc;
}

JunctionConditionConfig load_junction_condition(const toml::Value& v, const std::string& path) {
    JunctionConditionConfig jc;
    if (!v.is_table()) throw ConfigError(path + ": expected a table");
    const auto* type = v.find("type");
    if (!type || !type->is_string()) throw ConfigError(path + ".type: required string");
    const std::string& t = type->as_string();
    if (t == "continuity") {
        jc.type = JunctionConditionConfig::Type::Continuity;
    } else if (t == "kedem_katchalsky" || t == "kk") {
        jc.type = JunctionConditionConfig::Type::KedemKatchalsky;
        const auto* w = v.find("omega_kk");
        if (!w) throw ConfigError(path + ": kedem_katchalsky requires omega_kk");
        jc.omega_kk = number_at(*w, path + ".omega_kk");
        if (jc.omega_kk < 0.0) throw ConfigError(path + ".omega_kk: must be >= 0");
    } else {
        throw ConfigError(path + ".type: unknown junction type '" + t + "'");
    }
    return jc;
}

}  // namespace

std::vector<std::string> model_equation_names(const std::string& model) {
    if (model == "ks") return {"u", "phi"};
    if (model == "ooc") return {"u", "omega", "v", "phi"};
    throw ConfigError("unknown model '" + model + "' (expected \"ks\" or \"ooc\")");
}

double SimulationConfig::physical_required(const std::string& key) const {
    auto it = physical.find(key);
    if (it == physical.end()) throw ConfigError("physical." + key + ": missing required key");
    return it->second;
}

int SimulationConfig::equation_index(const std::string& name) const {
    auto it = std::find(equation_names.begin(), equation_names.end(), name);
    if (it == equation_names.end())
        throw ConfigError("unknown equation '" + name + "' for model '" + model + "'");
    return static_cast<int>(it - equation_names.begin());
}

SimulationConfig load_config(const std::string& toml_text, const std::string& model) {
    const toml::Value root = toml::parse(toml_text);

    SimulationConfig cfg;
    cfg.model = model;
    if (cfg.model.empty()) {
        const auto* m = root.find("model");
        if (!m || !m->is_string()) throw ConfigError("model: missing required key");
        cfg.model = m->as_string();
    }
    cfg.equation_names = model_equation_names(cfg.model);
    const int n_eq = cfg.n_equations();

    if (const auto* phys = root.find("physical")) {
        if (!phys->is_table()) throw ConfigError("physical: expected a table");
        for (const auto& [key, v] : phys->as_table()) {
            if (v.is_string()) {
                // sensitivity kind selector lives here
                if (key != "chi")
                    throw ConfigError("physical." + key + ": expected a number");
                cfg.chi_kind = v.as_string();
                if (cfg.chi_kind != "receptor_saturation" && cfg.chi_kind != "constant")
                    throw ConfigError("physical.chi: unknown sensitivity kind '" + cfg.chi_kind +
                                      "'");
                continue;
            }
            cfg.physical[key] = number_at(v, "physical." + key);
        }
    }

    if (const auto* time = root.find("time")) {
        if (!time->is_table()) throw ConfigError("time: expected a table");
        if (const auto* v = time->find("t_final")) cfg.time.t_final = number_at(*v, "time.t_final");
        if (const auto* v = time->find("dt_init")) cfg.time.dt_init = number_at(*v, "time.dt_init");
        if (const auto* v = time->find("adaptive")) {
            if (!v->is_bool()) throw ConfigError("time.adaptive: expected a boolean");
            cfg.time.adaptive = v->as_bool();
        }
        if (const auto* v = time->find("dt_min_factor"))
            cfg.time.dt_min_factor = number_at(*v, "time.dt_min_factor");
        if (const auto* v = time->find("dt_max_factor"))
            cfg.time.dt_max_factor = number_at(*v, "time.dt_max_factor");
        cfg.time.newton = load_newton(time->find("newton"));
    }
    if (cfg.time.t_final <= 0.0) throw ConfigError("time.t_final: must be positive");
    if (cfg.time.dt_init <= 0.0) throw ConfigError("time.dt_init: must be positive");

    cfg.tau.assign(n_eq, 1.0);
    if (const auto* disc = root.find("discretization")) {
        if (!disc->is_table()) throw ConfigError("discretization: expected a table");
        if (const auto* v = disc->find("h_target"))
            cfg.h_target = number_at(*v, "discretization.h_target");
        if (const auto* v = disc->find("tau")) {
            if (!v->is_array())
                throw ConfigError("discretization.tau: expected a per-equation list");
            const auto& arr = v->as_array();
            if (static_cast<int>(arr.size()) != n_eq)
                throw ConfigError("discretization.tau: expected " + std::to_string(n_eq) +
                                  " entries for model '" + cfg.model + "', got " +
                                  std::to_string(arr.size()));
            cfg.tau.clear();
            for (std::size_t i = 0; i < arr.size(); ++i)
                cfg.tau.push_back(number_at(arr[i], "discretization.tau[" + std::to_string(i) + "]"));
        }
    }
    if (cfg.h_target <= 0.0) throw ConfigError("discretization.h_target: must be positive");
    for (double t : cfg.tau)
        if (t <= 0.0) throw ConfigError("discretization.tau: entries must be positive");

    cfg.initial.assign(n_eq, ResolvedFunction(0.0));
    cfg.sources.assign(n_eq, ResolvedFunction(0.0));
    auto load_eq_table = [&](const char* name, std::vector<ResolvedFunction>& out) {
        const auto* tbl = root.find(name);
        if (!tbl) return;
        if (!tbl->is_table()) throw ConfigError(std::string(name) + ": expected a table");
        for (const auto& [key, v] : tbl->as_table())
            out[cfg.equation_index(key)] = resolve_value(v, std::string(name) + "." + key);
    };
    load_eq_table("initial", cfg.initial);
    load_eq_table("sources", cfg.sources);

    if (const auto* domains = root.find("domains")) {
        if (!domains->is_table()) throw ConfigError("domains: expected a table");
        for (const auto& [id_str, dom] : domains->as_table()) {
            char* end = nullptr;
            const long id = std::strtol(id_str.c_str(), &end, 10);
            if (end != id_str.c_str() + id_str.size() || id < 0)
                throw ConfigError("domains." + id_str + ": id must be a non-negative integer");
            if (!dom.is_table()) throw ConfigError("domains." + id_str + ": expected a table");
            auto load_override = [&](const char* name,
                                     std::map<int, std::map<std::string, ResolvedFunction>>& out) {
                const auto* tbl = dom.find(name);
                if (!tbl) return;
                const std::string path = "domains." + id_str + "." + name;
                if (!tbl->is_table()) throw ConfigError(path + ": expected a table");
                for (const auto& [key, v] : tbl->as_table()) {
                    cfg.equation_index(key);  // validates the name
                    out[static_cast<int>(id)][key] = resolve_value(v, path + "." + key);
                }
            };
            load_override("initial", cfg.domain_initial);
            load_override("sources", cfg.domain_sources);
        }
    }

    if (const auto* boundary = root.find("boundary")) {
        if (!boundary->is_table()) throw ConfigError("boundary: expected a table");
        for (const auto& [tag, tbl] : boundary->as_table()) {
            if (!tbl.is_table()) throw ConfigError("boundary." + tag + ": expected a table");
            for (const auto& [eq, v] : tbl.as_table()) {
                cfg.equation_index(eq);
                cfg.boundary[tag][eq] =
                    load_boundary_condition(v, "boundary." + tag + "." + eq);
            }
        }
    }

    if (const auto* junctions = root.find("junctions")) {
        if (!junctions->is_table()) throw ConfigError("junctions: expected a table");
        for (const auto& [tag, tbl] : junctions->as_table()) {
            if (!tbl.is_table()) throw ConfigError("junctions." + tag + ": expected a table");
            // Either one condition for every equation or per-equation subtables.
            if (tbl.find("type")) {
                const auto jc = load_junction_condition(tbl, "junctions." + tag);
                for (const auto& eq : cfg.equation_names) cfg.junctions[tag][eq] = jc;
            } else {
                for (const auto& [eq, v] : tbl.as_table()) {
                    cfg.equation_index(eq);
                    cfg.junctions[tag][eq] =
                        load_junction_condition(v, "junctions." + tag + "." + eq);
                }
            }
        }
    }

    if (const auto* geo = root.find("geometry")) {
        if (!geo->is_table()) throw ConfigError("geometry: expected a table");
        GeometrySource gs;
        const auto* pts = geo->find("points");
        const auto* lns = geo->find("lines");
        if (!pts || !pts->is_string()) throw ConfigError("geometry.points: required string path");
        if (!lns || !lns->is_string()) throw ConfigError("geometry.lines: required string path");
        gs.points_path = pts->as_string();
        gs.lines_path = lns->as_string();
        if (const auto* v = geo->find("length_scale"))
            gs.length_scale = number_at(*v, "geometry.length_scale");
        if (gs.length_scale <= 0.0) throw ConfigError("geometry.length_scale: must be positive");
        cfg.geometry = gs;
    }

    return cfg;
}

DomainParams apply_domain_overrides(const SimulationConfig& cfg, int domain_id, int n_domains) {
    if (domain_id < 0 || (n_domains >= 0 && domain_id >= n_domains))
        throw ConfigError("unknown domain id " + std::to_string(domain_id));
    DomainParams p;
    p.initial = cfg.initial;
    p.sources = cfg.sources;
    auto apply = [&](const std::map<int, std::map<std::string, ResolvedFunction>>& overrides,
                     std::vector<ResolvedFunction>& out) {
        auto it = overrides.find(domain_id);
        if (it == overrides.end()) return;
        for (const auto& [eq, fn] : it->second) out[cfg.equation_index(eq)] = fn;
    };
    apply(cfg.domain_initial, p.initial);
    apply(cfg.domain_sources, p.sources);
    return p;
}

std::string config_to_toml(const SimulationConfig& cfg) {
    std::ostringstream out;
    out.precision(17);
    out << "model = \"" << cfg.model << "\"\n\n[physical]\n";
    for (const auto& [k, v] : cfg.physical) out << k << " = " << v << "\n";
    out << "\n[time]\nt_final = " << cfg.time.t_final << "\ndt_init = " << cfg.time.dt_init
        << "\nadaptive = " << (cfg.time.adaptive ? "true" : "false") << "\n";
    out << "\n[time.newton]\neps_abs = " << cfg.time.newton.eps_abs
        << "\nmax_iterations = " << cfg.time.newton.max_iterations << "\nstrategy = \""
        << (cfg.time.newton.strategy == NewtonConfig::Strategy::Damped ? "damped" : "line_search")
        << "\"\nalpha = " << cfg.time.newton.alpha << "\n";
    out << "\n[discretization]\nh_target = " << cfg.h_target << "\ntau = [";
    for (std::size_t i = 0; i < cfg.tau.size(); ++i) out << (i ? ", " : "") << cfg.tau[i];
    out << "]\n\n[initial]\n";
    for (int e = 0; e < cfg.n_equations(); ++e)
        out << cfg.equation_names[e] << " = \"" << cfg.initial[e].describe() << "\"\n";
    out << "\n[sources]\n";
    for (int e = 0; e < cfg.n_equations(); ++e)
        out << cfg.equation_names[e] << " = \"" << cfg.sources[e].describe() << "\"\n";
    for (const auto& [id, tbl] : cfg.domain_initial) {
        out << "\n[domains." << id << ".initial]\n";
        for (const auto& [eq, fn] : tbl) out << eq << " = \"" << fn.describe() << "\"\n";
    }
    for (const auto& [id, tbl] : cfg.domain_sources) {
        out << "\n[domains." << id << ".sources]\n";
        for (const auto& [eq, fn] : tbl) out << eq << " = \"" << fn.describe() << "\"\n";
    }
    return out.str();
}

}  // namespace netflux

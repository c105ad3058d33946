#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "netflux/expressions.hpp"

namespace netflux {

struct NewtonConfig {
    enum class Strategy { Damped, LineSearch };

    double eps_abs = 1e-9;
    int max_iterations = 25;
    Strategy strategy = Strategy::LineSearch;
    double alpha = 1.0;  // damping factor, in (0, 1]
};

struct TimeConfig {
    double t_final = 1.0;
    double dt_init = 0.1;
    bool adaptive = false;
    NewtonConfig newton;
    double dt_min_factor = 1e-6;  // dt_min = factor * dt_init
    double dt_max_factor = 1e2;   // dt_max = factor * dt_init
};

/// Per-equation boundary condition: alpha*u + beta*D du/ds n = g(t).
struct BoundaryConditionConfig {
    enum class Type { Neumann, Dirichlet, Robin };
    Type type = Type::Neumann;
    ResolvedFunction g;  // defaults to 0
    double alpha = 0.0;
    double beta = 1.0;
};

struct JunctionConditionConfig {
    enum class Type { Continuity, KedemKatchalsky };
    Type type = Type::Continuity;
    double omega_kk = 0.0;
};

struct GeometrySource {
    std::string points_path;
    std::string lines_path;
    double length_scale = 1.0;
};

struct SimulationConfig {
    std::string model;  // "ks" | "ooc"
    std::vector<std::string> equation_names;
    std::map<std::string, double> physical;
    /// physical.chi selector: "receptor_saturation" (default) or "constant".
    std::string chi_kind = "receptor_saturation";
    TimeConfig time;
    double h_target = 1.0;
    std::vector<double> tau;  // per equation

    std::vector<ResolvedFunction> initial;  // per equation, global defaults
    std::vector<ResolvedFunction> sources;  // per equation, global defaults

    /// [domains.<id>.initial] / [domains.<id>.sources] overrides.
    std::map<int, std::map<std::string, ResolvedFunction>> domain_initial;
    std::map<int, std::map<std::string, ResolvedFunction>> domain_sources;

    /// [boundary.<TAG>.<eq>] overrides, homogeneous Neumann otherwise.
    std::map<std::string, std::map<std::string, BoundaryConditionConfig>> boundary;
    /// [junctions.<TAG>] (or per-equation subtables), trace continuity otherwise.
    std::map<std::string, std::map<std::string, JunctionConditionConfig>> junctions;

    std::optional<GeometrySource> geometry;

    double physical_or(const std::string& key, double fallback) const {
        auto it = physical.find(key);
        return it == physical.end() ? fallback : it->second;
    }
    double physical_required(const std::string& key) const;
    int equation_index(const std::string& name) const;
    int n_equations() const { return static_cast<int>(equation_names.size()); }
};

/// Effective per-domain (per-arc) functions after [domains.<id>] overrides.
struct DomainParams {
    std::vector<ResolvedFunction> initial;  // per equation
    std::vector<ResolvedFunction> sources;  // per equation
};

std::vector<std::string> model_equation_names(const std::string& model);

/// Load and validate a TOML configuration for the given model ("ks"|"ooc";
/// empty string takes the model from the file). Function-valued entries go
/// through the three-stage resolution cascade; missing optional fields get
/// defaults (zero initial data and sources, homogeneous Neumann boundaries).
SimulationConfig load_config(const std::string& toml_text, const std::string& model);

/// Override table [domains.<id>] shadows globals; unspecified fields fall
/// through. domain_id must be a valid arc index when n_domains >= 0.
DomainParams apply_domain_overrides(const SimulationConfig& config, int domain_id,
                                    int n_domains = -1);

/// TOML re-serialisation of the effective configuration (round-trip check
/// and diagnostics).
std::string config_to_toml(const SimulationConfig& config);

}  // namespace netflux

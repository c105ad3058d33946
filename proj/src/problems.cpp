#include "netflux/problems.hpp"

#include <cstring>

#include "netflux/errors.hpp"

namespace netflux {

std::pair<double, double> ChemotaxisSensitivity::eval(double phi) const {
    if (kind == Kind::Constant) return {chi0, 0.0};
    const double denom = k2 + phi;
    if (denom <= 0.0)
        throw SolverError("chemotaxis sensitivity pole crossing: k2 + phi <= 0");
    const double chi = k1 / (denom * denom);
    const double dchi = -2.0 * k1 / (denom * denom * denom);
    return {chi, dchi};
}

void ProblemSpec::reaction(int eq, const double* state, double source_value, double& value,
                           double* partials) const {
    if (eq < 0 || eq >= n_equations) throw SolverError("reaction: equation index out of range");
    std::memset(partials, 0, sizeof(double) * static_cast<std::size_t>(n_equations));
    value = source_value;
    if (model == "ks") {
        if (eq == 1) {  // phi: b u - a phi
            value += b * state[0] - a * state[1];
            partials[0] = b;
            partials[1] = -a;
        }
        return;
    }
    if (model == "ooc") {
        switch (eq) {
            case 0:  // u: chemotaxis drift assembled separately
                break;
            case 1:  // omega: -c omega + d u
                value += -c * state[1] + d * state[0];
                partials[0] = d;
                partials[1] = -c;
                break;
            case 2: {  // v: -lambda(omega) v
                const double lam = suppression.lambda(state[1]);
                value += -lam * state[2];
                partials[1] = -suppression.dlambda(state[1]) * state[2];
                partials[2] = -lam;
                break;
            }
            case 3:  // phi: -a phi + b u
                value += -a * state[3] + b * state[0];
                partials[0] = b;
                partials[3] = -a;
                break;
        }
        return;
    }
    // custom single-equation problems: pure diffusion + source
}

void ProblemSpec::reaction_eval(int eq, const std::vector<double>& state, double s, double t,
                                double& value, std::vector<double>& partials) const {
    if (static_cast<int>(state.size()) != n_equations)
        throw SolverError("reaction_eval: state size mismatch");
    partials.assign(n_equations, 0.0);
    reaction(eq, state.data(), equations[eq].source(s, t), value, partials.data());
}

namespace {

ChemotaxisSensitivity chi_from_config(const SimulationConfig& cfg) {
    ChemotaxisSensitivity chi;
    if (cfg.chi_kind == "constant") {
        chi.kind = ChemotaxisSensitivity::Kind::Constant;
        chi.chi0 = cfg.physical_or("chi0", 0.0);
    } else {
        chi.kind = ChemotaxisSensitivity::Kind::ReceptorSaturation;
        chi.k1 = cfg.physical_or("k1", 0.0);
        chi.k2 = cfg.physical_or("k2", 1.0);
        if (chi.k2 <= 0.0) throw ConfigError("physical.k2: must be positive");
    }
    return chi;
}

}  // namespace

ProblemSpec build_problem(const std::string& model, const SimulationConfig& cfg) {
    if (model != "ks" && model != "ooc") throw ConfigError("unknown model '" + model + "'");
    if (cfg.model != model)
        throw ConfigError("configuration was loaded for model '" + cfg.model + "', not '" + model +
                          "'");

    ProblemSpec p;
    p.model = model;
    p.n_equations = cfg.n_equations();
    p.a = cfg.physical_required("a");
    p.b = cfg.physical_required("b");
    p.chi = chi_from_config(cfg);

    auto make_eq = [&](const std::string& name, double diffusivity, int flux_order,
                       int index) {
        if (diffusivity <= 0.0)
            throw ConfigError("physical diffusivity for equation '" + name +
                              "' must be strictly positive");
        EquationSpec e;
        e.name = name;
        e.diffusivity = diffusivity;
        e.flux_order = flux_order;
        e.tau = cfg.tau[index];
        e.source = cfg.sources[index];
        return e;
    };

    if (model == "ks") {
        p.equations.push_back(make_eq("u", cfg.physical_required("nu"), 0, 0));
        p.equations.push_back(make_eq("phi", cfg.physical_required("mu"), 1, 1));
        p.chemo_attractant_eq = 1;
    } else {
        p.c = cfg.physical_required("c");
        p.d = cfg.physical_required("d");
        p.suppression.m1 = cfg.physical_or("m1", 0.0);
        p.suppression.m2 = cfg.physical_or("m2", 1.0);
        if (p.suppression.m2 <= 0.0) throw ConfigError("physical.m2: must be positive");
        p.equations.push_back(make_eq("u", cfg.physical_required("nu"), 0, 0));
        p.equations.push_back(make_eq("omega", cfg.physical_required("epsilon"), 1, 1));
        p.equations.push_back(make_eq("v", cfg.physical_required("sigma"), 1, 2));
        p.equations.push_back(make_eq("phi", cfg.physical_required("mu"), 1, 3));
        p.chemo_attractant_eq = 3;
    }
    if (!p.chi.active()) p.chemo_attractant_eq = -1;
    return p;
}

ProblemSpec make_diffusion_problem(double diffusivity, double tau, int flux_order) {
    if (diffusivity <= 0.0) throw ConfigError("diffusivity must be strictly positive");
    ProblemSpec p;
    p.model = "diffusion";
    p.n_equations = 1;
    EquationSpec e;
    e.name = "u";
    e.diffusivity = diffusivity;
    e.flux_order = flux_order;
    e.tau = tau;
    p.equations.push_back(e);
    return p;
}

}  // namespace netflux

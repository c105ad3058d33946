#pragma once

#include <string>
#include <vector>

#include "netflux/config.hpp"
#include "netflux/expressions.hpp"

namespace netflux {

/// Chemotactic sensitivity chi(phi) with analytic derivative.
struct ChemotaxisSensitivity {
    enum class Kind { ReceptorSaturation, Constant };
    Kind kind = Kind::Constant;
    double k1 = 0.0;  // drift velocity (receptor saturation)
    double k2 = 1.0;  // receptor dissociation constant, > 0
    double chi0 = 0.0;

    /// (chi, chi') at phi. Receptor saturation: chi = k1/(k2+phi)^2,
    /// chi' = -2 k1/(k2+phi)^3, defined for k2 + phi > 0.
    std::pair<double, double> eval(double phi) const;

    bool active() const {
        return kind == Kind::ReceptorSaturation ? k1 != 0.0 : chi0 != 0.0;
    }
};

/// Tumour suppression lambda(omega) = m1/(m2+omega); identically zero when m1 = 0.
struct TumourSuppression {
    double m1 = 0.0;
    double m2 = 1.0;

    double lambda(double omega) const { return m1 == 0.0 ? 0.0 : m1 / (m2 + omega); }
    double dlambda(double omega) const {
        return m1 == 0.0 ? 0.0 : -m1 / ((m2 + omega) * (m2 + omega));
    }
};

struct EquationSpec {
    std::string name;
    double diffusivity = 1.0;  // strictly positive
    int flux_order = 1;        // P0 for equation 0, P1 otherwise
    double tau = 1.0;          // HDG stabilisation
    ResolvedFunction source;   // f_e(s, t)
};

/// Full problem definition: equations, coupling coefficients and the
/// chemotaxis machinery. Equation ordering is fixed per model:
/// ks = (u, phi), ooc = (u, omega, v, phi).
struct ProblemSpec {
    std::string model;
    int n_equations = 0;
    std::vector<EquationSpec> equations;

    double a = 0.0;  // phi decay
    double b = 0.0;  // phi production by u
    double c = 0.0;  // omega decay (ooc)
    double d = 0.0;  // omega production by u (ooc)
    ChemotaxisSensitivity chi;
    TumourSuppression suppression;  // ooc only

    /// Chemotaxis drift acts on equation 0 along the gradient of this
    /// equation's field (1 for ks, 3 for ooc); -1 disables the drift.
    int chemo_attractant_eq = -1;

    /// Pointwise reaction R_e and exact partials d R_e / d u_{e'}.
    /// `state` holds all equations' bulk values at the point; `source_value`
    /// is f_e(s, t) evaluated by the caller (per-domain overrides apply).
    void reaction(int eq, const double* state, double source_value, double& value,
                  double* partials) const;

    /// Spec-level reaction evaluation using the problem's own sources.
    void reaction_eval(int eq, const std::vector<double>& state, double s, double t,
                       double& value, std::vector<double>& partials) const;
};

/// Build the KS or OoC problem from a loaded configuration.
ProblemSpec build_problem(const std::string& model, const SimulationConfig& config);

/// Single-equation diffusion-only problem (manufactured-solution and
/// conservation scenarios).
ProblemSpec make_diffusion_problem(double diffusivity, double tau, int flux_order = 1);

}  // namespace netflux

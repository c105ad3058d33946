#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <vector>

#include "netflux/config.hpp"
#include "netflux/discretization.hpp"
#include "netflux/elements.hpp"
#include "netflux/geometry.hpp"
#include "netflux/problems.hpp"

namespace netflux {

/// Element-interior unknowns: per element one vector holding, equation by
/// equation, the two P1 u-coefficients followed by the flux coefficients.
struct BulkState {
    std::vector<Eigen::VectorXd> elem;
    double time = 0.0;
};

/// Global iterate: trace vector over all (arc, equation, node) DOFs,
/// Lagrange multipliers, and the element bulk data.
struct SystemState {
    Eigen::VectorXd traces;
    Eigen::VectorXd multipliers;
    BulkState bulk;
    double time = 0.0;
};

/// Newton-linearised backward-Euler local blocks of one element. Interior
/// rows are the u/q equations; boundary rows are the element's endpoint
/// contributions to the flux-balance rows (2 per equation, L then R,
/// equation-major).
struct LocalBlocks {
    Eigen::MatrixXd Aii, Aib, Abi, Abb;
    Eigen::VectorXd ri, rb;
};

/// Schur complement of one element with the cached interior factorisation
/// used for bulk recovery. f-vectors follow the Newton sign convention
/// f = -r.
struct CondensedElement {
    Eigen::MatrixXd Atilde;
    Eigen::VectorXd ftilde;
    Eigen::PartialPivLU<Eigen::MatrixXd> Aii_lu;
    Eigen::MatrixXd Aib;
    Eigen::VectorXd fi;
};

/// Condensed residual and Jacobian over traces + multipliers.
struct GlobalSystem {
    Eigen::SparseMatrix<double> J;
    Eigen::VectorXd R;
};

/// Per-(connection, equation) condition, resolved from config or defaults
/// (homogeneous Neumann at boundaries, trace continuity at junctions).
struct ResolvedCondition {
    enum class Kind { Boundary, Continuity, KedemKatchalsky };
    Kind kind = Kind::Continuity;
    double alpha = 0.0;  // boundary: alpha*uhat + beta*lambda = g(t)
    double beta = 1.0;
    ResolvedFunction g;
    double omega_kk = 0.0;
};

using ConditionTable = std::vector<std::vector<ResolvedCondition>>;  // [connection][eq]

/// Default conditions, then config overrides applied by node tag.
ConditionTable resolve_conditions(const NetworkGeometry& geometry, const ProblemSpec& problem,
                                  const SimulationConfig* config = nullptr);

CondensedElement condense(const LocalBlocks& blocks);

/// Discretised HDG operator for one problem on one network. Owns the
/// geometry, discretization, conditions and per-arc override functions;
/// immutable after construction, usable from several threads.
class HdgSystem {
public:
    HdgSystem(NetworkGeometry geometry, ProblemSpec problem, double h_target,
              ConditionTable conditions, std::vector<DomainParams> arc_params);

    /// Convenience constructor with default conditions and zero data.
    HdgSystem(NetworkGeometry geometry, ProblemSpec problem, double h_target);

    const NetworkGeometry& geometry() const { return geometry_; }
    const ProblemSpec& problem() const { return problem_; }
    const Discretization& disc() const { return disc_; }
    const ConditionTable& conditions() const { return conditions_; }
    const std::vector<DomainParams>& arc_params() const { return arc_params_; }

    int interior_size() const { return interior_size_; }
    int boundary_size() const { return 2 * problem_.n_equations; }
    /// Interior offset of equation eq within the element vector.
    int eq_offset(int eq) const { return eq_offset_[eq]; }
    /// Boundary (trace) index of (eq, side) within the element, side 0=L 1=R.
    int b_index(int eq, int side) const { return 2 * eq + side; }

    /// State at time t0 with traces/bulk from the per-arc initial data and
    /// zero multipliers.
    SystemState initial_state(double t0 = 0.0) const;

    /// Element traces gathered from the global vector (equation-major L,R).
    Eigen::VectorXd gather_element_traces(const Eigen::VectorXd& traces, int elem) const;

    /// Newton-linearised backward-Euler blocks about `iterate` for the step
    /// prev.time -> t_next with dt = t_next - prev.time.
    LocalBlocks assemble_local(int elem, const BulkState& prev, const SystemState& iterate,
                               double dt, double t_next) const;

    std::vector<LocalBlocks> assemble_all_locals(const BulkState& prev,
                                                 const SystemState& iterate, double dt,
                                                 double t_next, int threads = 1) const;

    /// Condensed global system over traces + multipliers, including all
    /// boundary/junction constraint rows at t_next.
    GlobalSystem assemble_global(const std::vector<CondensedElement>& condensed,
                                 const SystemState& iterate, double t_next) const;

    /// Residual of the flux-balance and constraint rows only (raw, without
    /// interior elimination); size n_unknowns.
    Eigen::VectorXd trace_residual(const std::vector<LocalBlocks>& locals,
                                   const SystemState& iterate, double t_next) const;

    /// 2-norm of the full uncondensed residual (interior + trace +
    /// constraint rows).
    double full_residual_norm(const std::vector<LocalBlocks>& locals,
                              const SystemState& iterate, double t_next) const;

    /// Element-local Newton bulk update from the trace increment.
    static Eigen::VectorXd recover_bulk_delta(const CondensedElement& ce,
                                              const Eigen::VectorXd& delta_traces);

private:
    void append_constraints(const SystemState& iterate, double t_next,
                            std::vector<Eigen::Triplet<double>>* triplets,
                            Eigen::VectorXd& residual) const;

    NetworkGeometry geometry_;
    ProblemSpec problem_;
    Discretization disc_;
    ConditionTable conditions_;
    std::vector<DomainParams> arc_params_;
    std::vector<int> eq_offset_;
    int interior_size_ = 0;
};

}  // namespace netflux

#include "netflux/time_integration.hpp"

#include <algorithm>
#include <cmath>

#include "netflux/errors.hpp"

namespace netflux {

namespace {

constexpr double kMinLineSearchAlpha = 0x1p-20;

struct Direction {
    Eigen::VectorXd traces;
    Eigen::VectorXd multipliers;
    std::vector<Eigen::VectorXd> bulk;
};

SystemState apply_step(const SystemState& base, const Direction& dir, double alpha,
                       double t_next) {
    SystemState out = base;
    out.traces += alpha * dir.traces;
    out.multipliers += alpha * dir.multipliers;
    for (std::size_t k = 0; k < out.bulk.elem.size(); ++k)
        out.bulk.elem[k] += alpha * dir.bulk[k];
    out.time = t_next;
    out.bulk.time = t_next;
    return out;
}

}  // namespace

NewtonResult newton_solve(const HdgSystem& sys, const BulkState& prev, SystemState& state,
                          double t_next, const NewtonConfig& cfg, int threads) {
    const double dt = t_next - prev.time;
    if (dt <= 0.0) throw SolverError("newton_solve: t_next must exceed the previous time");
    const int n_traces = sys.disc().n_traces;
    const int n_mult = sys.disc().n_multipliers;

    auto locals = sys.assemble_all_locals(prev, state, dt, t_next, threads);
    double rnorm = sys.full_residual_norm(locals, state, t_next);

    for (int it = 0; it < cfg.max_iterations; ++it) {
        if (rnorm <= cfg.eps_abs) {
            state.time = t_next;
            state.bulk.time = t_next;
            return {true, it, rnorm};
        }

        std::vector<CondensedElement> cond(locals.size());
        for (std::size_t k = 0; k < locals.size(); ++k) cond[k] = condense(locals[k]);
        const GlobalSystem gs = sys.assemble_global(cond, state, t_next);

        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
        lu.compute(gs.J);
        if (lu.info() != Eigen::Success)
            throw SolverError("linear solve failed: condensed Jacobian factorisation");
        const Eigen::VectorXd delta = lu.solve(-gs.R);
        if (lu.info() != Eigen::Success)
            throw SolverError("linear solve failed: condensed Jacobian back-substitution");

        Direction dir;
        dir.traces = delta.head(n_traces);
        dir.multipliers = delta.tail(n_mult);
        dir.bulk.resize(cond.size());
        for (std::size_t k = 0; k < cond.size(); ++k) {
            const Eigen::VectorXd du =
                sys.gather_element_traces(dir.traces, static_cast<int>(k));
            dir.bulk[k] = HdgSystem::recover_bulk_delta(cond[k], du);
        }

        if (cfg.strategy == NewtonConfig::Strategy::Damped) {
            state = apply_step(state, dir, cfg.alpha, t_next);
            locals = sys.assemble_all_locals(prev, state, dt, t_next, threads);
            rnorm = sys.full_residual_norm(locals, state, t_next);
            continue;
        }

        // Backtracking line search on the full residual norm.
        double alpha = 1.0;
        bool accepted = false;
        while (alpha >= kMinLineSearchAlpha) {
            SystemState trial = apply_step(state, dir, alpha, t_next);
            auto trial_locals = sys.assemble_all_locals(prev, trial, dt, t_next, threads);
            const double trial_norm = sys.full_residual_norm(trial_locals, trial, t_next);
            if (trial_norm < rnorm) {
                state = std::move(trial);
                locals = std::move(trial_locals);
                rnorm = trial_norm;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) return {false, it + 1, rnorm};
    }

    if (rnorm <= cfg.eps_abs) {
        state.time = t_next;
        state.bulk.time = t_next;
        return {true, cfg.max_iterations, rnorm};
    }
    return {false, cfg.max_iterations, rnorm};
}

double adapt_dt(double dt, bool converged, int newton_iterations, double dt_min, double dt_max) {
    if (!converged) {
        const double next = 0.5 * dt;
        if (next < dt_min)
            throw SolverError("time step underflow: dt fell below dt_min after a rejected step");
        return next;
    }
    double factor = 1.0;
    if (newton_iterations <= 8)
        factor = 1.2;
    else if (newton_iterations > 14)
        factor = 0.8;
    return std::clamp(dt * factor, dt_min, dt_max);
}

std::vector<StepRecord> advance_fixed(const HdgSystem& sys, SystemState& state, double dt,
                                      int n_steps, const NewtonConfig& cfg, int threads,
                                      const StepCallback& on_step) {
    if (dt <= 0.0) throw SolverError("advance_fixed: dt must be positive");
    if (n_steps < 0) throw SolverError("advance_fixed: n_steps must be non-negative");
    std::vector<StepRecord> records;
    records.reserve(static_cast<std::size_t>(n_steps));
    const double t0 = state.time;
    for (int i = 0; i < n_steps; ++i) {
        const double t_next = t0 + dt * (i + 1);
        const BulkState prev = state.bulk;
        const NewtonResult nr = newton_solve(sys, prev, state, t_next, cfg, threads);
        records.push_back({i, t_next, dt, nr.iterations, nr.converged});
        if (!nr.converged)
            throw SolverError("Newton failed to converge at step " + std::to_string(i + 1) +
                              " (t = " + std::to_string(t_next) +
                              ", residual = " + std::to_string(nr.residual_norm) + ")");
        if (on_step) on_step(state, records.back());
    }
    return records;
}

std::vector<StepRecord> advance_adaptive(const HdgSystem& sys, SystemState& state,
                                         const TimeConfig& time, int threads,
                                         const StepCallback& on_step) {
    if (time.dt_init <= 0.0) throw SolverError("advance_adaptive: dt_init must be positive");
    if (time.t_final <= state.time)
        throw SolverError("advance_adaptive: t_final must exceed the start time");
    const double dt_min = time.dt_min_factor * time.dt_init;
    const double dt_max = time.dt_max_factor * time.dt_init;
    const double t_eps = 1e-12 * std::max(1.0, std::abs(time.t_final));

    std::vector<StepRecord> records;
    double dt = time.dt_init;
    int step = 0;
    while (state.time < time.t_final - t_eps) {
        const double dt_try = std::min(dt, time.t_final - state.time);
        const double t_next = state.time + dt_try;
        SystemState trial = state;
        const BulkState prev = state.bulk;
        const NewtonResult nr = newton_solve(sys, prev, trial, t_next, time.newton, threads);
        records.push_back({step++, t_next, dt_try, nr.iterations, nr.converged});
        if (nr.converged) {
            state = std::move(trial);
            if (on_step) on_step(state, records.back());
        }
        dt = adapt_dt(dt_try, nr.converged, nr.iterations, dt_min, dt_max);
    }
    return records;
}

}  // namespace netflux

#pragma once

#include <functional>
#include <vector>

#include "netflux/config.hpp"
#include "netflux/hdg.hpp"

namespace netflux {

struct NewtonResult {
    bool converged = false;
    int iterations = 0;
    double residual_norm = 0.0;
};

/// One backward-Euler step prev.time -> t_next solved by damped or
/// line-search Newton on the statically condensed system. Convergence and
/// line-search acceptance use the full uncondensed residual norm. `state`
/// is updated in place only by accepted iterations; on non-convergence it
/// holds the last iterate. `prev` must not alias `state.bulk`. Throws
/// SolverError when the sparse LU factorisation fails or a local block is
/// singular.
NewtonResult newton_solve(const HdgSystem& sys, const BulkState& prev, SystemState& state,
                          double t_next, const NewtonConfig& cfg, int threads = 1);

/// Iteration-count time step controller:
///   rejected step        -> dt * 0.5 (SolverError below dt_min)
///   converged, n <= 8    -> dt * 1.2
///   converged, 9..14     -> dt unchanged
///   converged, n > 14    -> dt * 0.8
/// then clamped to [dt_min, dt_max].
double adapt_dt(double dt, bool converged, int newton_iterations, double dt_min, double dt_max);

struct StepRecord {
    int step = 0;       // index of the attempted step
    double time = 0.0;  // target time of the attempt
    double dt = 0.0;
    int newton_iterations = 0;
    bool accepted = false;
};

using StepCallback = std::function<void(const SystemState&, const StepRecord&)>;

/// March `n_steps` equal steps of size dt from state.time. Throws
/// SolverError if any step fails to converge.
std::vector<StepRecord> advance_fixed(const HdgSystem& sys, SystemState& state, double dt,
                                      int n_steps, const NewtonConfig& cfg, int threads = 1,
                                      const StepCallback& on_step = {});

/// Adaptive march to time.t_final with the controller above; the final
/// step is shortened to land exactly. Rejected attempts restart from the
/// unchanged previous state and are recorded with accepted = false.
std::vector<StepRecord> advance_adaptive(const HdgSystem& sys, SystemState& state,
                                         const TimeConfig& time, int threads = 1,
                                         const StepCallback& on_step = {});

}  // namespace netflux

#pragma once

#include "nmpc/dynamics.hpp"

#include <optional>
#include <vector>

namespace nmpc {

struct SolverOptions {
    double gradient_tolerance = 1e-8;  ///< infinity norm of the (projected) gradient
    int max_iterations = 500;
    double armijo = 1e-4;
    double backtrack = 0.5;
    int max_backtracks = 60;
    double fd_relative_step = 1e-6;  ///< central difference step h = rel * max(1, |u_k|)
};

struct SolverReport {
    int iterations = 0;
    double gradient_norm = 0.0;
    bool converged = false;
    long cost_evaluations = 0;
};

struct RolloutResult {
    StateTrajectory trajectory;  ///< x(0..|u|)
    std::vector<double> stage_costs;
    double total_cost = 0.0;
};

/// Open-loop solution of one finite-horizon problem J_N(x0, .).
struct OcpSolution {
    Vector initial_state;
    int horizon = 0;
    ControlSequence controls;     ///< u(0..N-1)
    StateTrajectory trajectory;   ///< x(0..N), x(k+1) = step(x(k), u(k))
    std::vector<double> stage_costs;
    double value = 0.0;           ///< sum of stage_costs
    SolverReport report;
};

/// Simulates `controls` from x0. DivergenceError::stage() carries the failing index.
RolloutResult rollout(const ControlSystem& sys, const Vector& x0, const ControlSequence& controls);

/// Wraps a rollout of `controls` as an OcpSolution (horizon = controls.size()).
OcpSolution evaluate_controls(const ControlSystem& sys, const Vector& x0, ControlSequence controls,
                              SolverReport report = {});

/**
 * Direct single shooting: BFGS over the stacked controls with Armijo
 * backtracking and central finite-difference gradients. Box bounds are
 * handled by projecting every iterate. Starts from `warm_start` when given
 * (the returned value never exceeds its cost), otherwise from u* repeated.
 * Non-convergence is reported through `report.converged`, never thrown.
 */
OcpSolution solve(const ControlSystem& sys, const Vector& x0, int horizon,
                  const std::optional<ControlSequence>& warm_start = std::nullopt,
                  const SolverOptions& options = {});

/// V_N(x0) minus the first j stage costs, i.e. V_{N-j} at x(j) by the principle of optimality.
double tail_value(const OcpSolution& sol, int j);

/// Drops the first m controls and pads with m copies of the last one.
ControlSequence shift_warm_start(const OcpSolution& prev, int m);

}  // namespace nmpc

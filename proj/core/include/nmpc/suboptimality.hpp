#pragma once

#include "nmpc/ocp.hpp"

#include <span>
#include <vector>

namespace nmpc {

/// Stage-cost sums at or below this are treated as "at the equilibrium".
inline constexpr double kCostFloor = 1e-12;
/// Relative slack applied to every runtime inequality.
inline constexpr double kRelativeSlack = 1e-9;

inline double inequality_slack(double scale) { return kRelativeSlack * std::max(1.0, std::abs(scale)); }

/// Outcome of one runtime inequality, always normalised to `lhs <= rhs`.
struct AlphaCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    double alpha_local = 0.0;  ///< unclipped
    bool satisfied = false;    ///< lhs <= rhs + slack_used
    double slack_used = 0.0;
};

struct SpliceResult {
    ControlSequence new_controls;
    int update_index = 0;
    std::vector<double> old_tail_costs;  ///< old.stage_costs[j, m)
    std::vector<double> new_tail_costs;  ///< resolved.stage_costs[0, m - j)
};

/// (V_now - V_next) / cost_sum, or 1 when cost_sum <= kCostFloor.
double local_alpha(double V_now, double V_next, double cost_sum);

/**
 * Relaxed Lyapunov inequality over m steps:
 *   V_now >= V_next + alpha_bar * sum_{k<m} stage_costs[k].
 * Reported as lhs = V_next + alpha_bar * sum, rhs = V_now; alpha_local is the
 * largest alpha for which it would hold.
 */
AlphaCheck check_mstep(double V_now, std::span<const double> stage_costs, double V_next, int m, double alpha_bar);
AlphaCheck check_mstep(const OcpSolution& sol_now, double V_next, int m, double alpha_bar);

/// Keeps old.controls[0, j) and continues with resolved.controls; `m` selects the tail cost windows.
SpliceResult splice(const OcpSolution& old, const OcpSolution& resolved, int j, int m);

/**
 * First update condition at index j of an m-step block:
 *   V_end_new - V_{N-j}(x(j)) <= (1 - a) sum_{k<j} l_old(k) - a sum_{k=j}^{m-1} l_new(k - j)
 * with V_{N-j}(x(j)) = V_now - sum_{k<j} l_old(k) (the tail value). V_now is
 * the value the block was certified against and stays fixed while the block
 * is updated iteratively; for an untouched solution it is old.value.
 * alpha_local is the largest alpha for which the inequality holds.
 */
AlphaCheck check_update_A(double V_now, const OcpSolution& old, const OcpSolution& resolved, double V_end_new,
                          int j, int m, double alpha_bar);

/**
 * Second update condition:
 *   V_end_new - V_end_old <= a * sum_k (old_tail(k) - new_tail(k)).
 * alpha_local is the threshold (V_end_new - V_end_old) / sum(old - new), or
 * NaN when the tails carry identical cost.
 */
AlphaCheck check_update_B(double V_end_new, double V_end_old, std::span<const double> old_tail_costs,
                          std::span<const double> new_tail_costs, double alpha_bar);

}  // namespace nmpc

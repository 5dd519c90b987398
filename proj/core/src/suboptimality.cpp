#include "nmpc/suboptimality.hpp"

#include "nmpc/errors.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace nmpc {

namespace {

void require_alpha(double alpha_bar) {
    if (!(alpha_bar > 0.0 && alpha_bar <= 1.0)) {
        throw InputError("performance bound alpha_bar must lie in (0, 1], got " + std::to_string(alpha_bar));
    }
}

double sum(std::span<const double> values) { return std::accumulate(values.begin(), values.end(), 0.0); }

}  // namespace

double local_alpha(double V_now, double V_next, double cost_sum) {
    if (cost_sum <= kCostFloor) return 1.0;
    return (V_now - V_next) / cost_sum;
}

AlphaCheck check_mstep(double V_now, std::span<const double> stage_costs, double V_next, int m, double alpha_bar) {
    require_alpha(alpha_bar);
    if (m < 1 || m > static_cast<int>(stage_costs.size())) {
        throw InputError("m = " + std::to_string(m) + " outside [1, " + std::to_string(stage_costs.size()) + "]");
    }
    const double cost_sum = sum(stage_costs.first(m));
    AlphaCheck out;
    out.lhs = V_next + alpha_bar * cost_sum;
    out.rhs = V_now;
    out.alpha_local = local_alpha(V_now, V_next, cost_sum);
    out.slack_used = inequality_slack(V_now);
    out.satisfied = out.lhs <= out.rhs + out.slack_used;
    return out;
}

AlphaCheck check_mstep(const OcpSolution& sol_now, double V_next, int m, double alpha_bar) {
    if (m > sol_now.horizon - 1) {
        throw InputError("m = " + std::to_string(m) + " exceeds N - 1 = " + std::to_string(sol_now.horizon - 1));
    }
    return check_mstep(sol_now.value, sol_now.stage_costs, V_next, m, alpha_bar);
}

SpliceResult splice(const OcpSolution& old, const OcpSolution& resolved, int j, int m) {
    const int N = old.horizon;
    if (j < 1 || j > N - 1) {
        throw InputError("splice index j = " + std::to_string(j) + " outside [1, " + std::to_string(N - 1) + "]");
    }
    if (m <= j || m > N) {
        throw InputError("splice window m = " + std::to_string(m) + " must satisfy j < m <= N");
    }
    if (resolved.horizon != N) throw InputError("resolved solution has a different horizon");
    if ((resolved.initial_state - old.trajectory[j]).lpNorm<Eigen::Infinity>() > 1e-12) {
        throw ConsistencyError("resolved solution does not start at the old open-loop state x(" + std::to_string(j) +
                               ")");
    }

    SpliceResult out;
    out.update_index = j;
    out.new_controls.reserve(N);
    out.new_controls.insert(out.new_controls.end(), old.controls.begin(), old.controls.begin() + j);
    out.new_controls.insert(out.new_controls.end(), resolved.controls.begin(), resolved.controls.begin() + (N - j));
    out.old_tail_costs.assign(old.stage_costs.begin() + j, old.stage_costs.begin() + m);
    out.new_tail_costs.assign(resolved.stage_costs.begin(), resolved.stage_costs.begin() + (m - j));
    return out;
}

AlphaCheck check_update_A(double V_now, const OcpSolution& old, const OcpSolution& resolved, double V_end_new,
                          int j, int m, double alpha_bar) {
    require_alpha(alpha_bar);
    const int N = old.horizon;
    if (!(1 <= j && j <= m - 1 && m - 1 <= N - 2)) {
        throw InputError("update condition A requires 1 <= j <= m - 1 <= N - 2 (j = " + std::to_string(j) +
                         ", m = " + std::to_string(m) + ", N = " + std::to_string(N) + ")");
    }
    if (static_cast<int>(resolved.stage_costs.size()) < m - j) {
        throw InputError("resolved solution is shorter than the update window");
    }
    const std::span<const double> old_costs(old.stage_costs);
    const double head = sum(old_costs.first(j));
    const double tail = V_now - head;
    const double fresh = sum(std::span<const double>(resolved.stage_costs).first(m - j));

    AlphaCheck out;
    out.lhs = V_end_new - tail;
    out.rhs = (1.0 - alpha_bar) * head - alpha_bar * fresh;
    out.alpha_local = local_alpha(V_now, V_end_new, head + fresh);
    out.slack_used = inequality_slack(V_now);
    out.satisfied = out.lhs <= out.rhs + out.slack_used;
    return out;
}

AlphaCheck check_update_B(double V_end_new, double V_end_old, std::span<const double> old_tail_costs,
                          std::span<const double> new_tail_costs, double alpha_bar) {
    require_alpha(alpha_bar);
    if (old_tail_costs.empty() || old_tail_costs.size() != new_tail_costs.size()) {
        throw InputError("update condition B needs equally long, nonempty tail cost windows");
    }
    double difference = 0.0;
    for (std::size_t k = 0; k < old_tail_costs.size(); ++k) difference += old_tail_costs[k] - new_tail_costs[k];

    AlphaCheck out;
    out.lhs = V_end_new - V_end_old;
    out.rhs = alpha_bar * difference;
    out.alpha_local =
        difference == 0.0 ? std::numeric_limits<double>::quiet_NaN() : out.lhs / difference;
    out.slack_used = inequality_slack(V_end_old);
    out.satisfied = out.lhs <= out.rhs + out.slack_used;
    return out;
}

}  // namespace nmpc

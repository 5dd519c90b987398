#include "nmpc/mpc_loop.hpp"

#include "nmpc/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <set>
#include <utility>

namespace nmpc {

namespace {

constexpr const char* kDivergenceWarning = "Solution may diverge";
constexpr const char* kRemedy = " (consider prolonging the prediction horizon)";

class TimedSolver {
public:
    TimedSolver(const ControlSystem& sys, int horizon, const SolverOptions& options, ExecutionTotals& totals)
        : sys_(sys), horizon_(horizon), options_(options), totals_(totals) {}

    OcpSolution operator()(const Vector& x, std::optional<ControlSequence> warm = std::nullopt) {
        const auto t0 = std::chrono::steady_clock::now();
        OcpSolution sol = solve(sys_, x, horizon_, warm, options_);
        totals_.solve_seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        ++totals_.solver_calls;
        if (!sol.report.converged) unconverged_ = true;
        return sol;
    }

    /// True if any solve since the last call did not converge.
    bool take_unconverged() { return std::exchange(unconverged_, false); }

private:
    const ControlSystem& sys_;
    int horizon_;
    const SolverOptions& options_;
    ExecutionTotals& totals_;
    bool unconverged_ = false;
};

std::vector<double> window(const std::vector<double>& v, int first, int last) {
    return {v.begin() + first, v.begin() + last};
}

}  // namespace

std::string_view to_string(Algorithm algorithm) {
    switch (algorithm) {
        case Algorithm::classical: return "classical";
        case Algorithm::basic: return "basic";
        case Algorithm::update_a: return "update_a";
        case Algorithm::update_b: return "update_b";
    }
    return "unknown";
}

std::optional<Algorithm> parse_algorithm(std::string_view name) {
    for (Algorithm a : {Algorithm::classical, Algorithm::basic, Algorithm::update_a, Algorithm::update_b}) {
        if (to_string(a) == name) return a;
    }
    return std::nullopt;
}

std::vector<int> UpdateSchedule::gaps() const {
    std::vector<int> out;
    for (std::size_t n = 1; n < events_.size(); ++n) out.push_back(events_[n] - events_[n - 1]);
    return out;
}

bool UpdateSchedule::is_valid(int horizon) const {
    if (events_.empty() || events_.front() != 0) return false;
    for (int gap : gaps()) {
        if (gap < 1 || gap > horizon - 1) return false;
    }
    return true;
}

std::vector<int> ExecutionLog::update_instants() const {
    std::set<int> instants(schedule.events().begin(), schedule.events().end());
    for (const EventRecord& ev : events) {
        for (const UpdateAttempt& u : ev.updates) {
            if (u.applied) instants.insert(ev.start + u.j);
        }
    }
    return {instants.begin(), instants.end()};
}

int ExecutionLog::warning_count() const {
    return static_cast<int>(std::count_if(events.begin(), events.end(), [](const auto& e) { return e.warning; }));
}

int ExecutionLog::violation_count() const {
    return static_cast<int>(std::count_if(events.begin(), events.end(), [](const auto& e) { return e.violation; }));
}

int ExecutionLog::splice_count() const {
    int count = 0;
    for (const EventRecord& ev : events) {
        count += static_cast<int>(
            std::count_if(ev.updates.begin(), ev.updates.end(), [](const auto& u) { return u.applied; }));
    }
    return count;
}

double ExecutionLog::final_error() const {
    return (final_state - equilibrium_state).lpNorm<Eigen::Infinity>();
}

ExecutionLog run(Algorithm algorithm, const ControlSystem& sys, const Vector& x0, int horizon, double alpha_bar,
                 const RunOptions& options) {
    if (horizon < 2) throw InputError("prediction horizon N must be at least 2");
    if (!(alpha_bar > 0.0 && alpha_bar < 1.0)) throw InputError("alpha_bar must lie in (0, 1)");
    if (options.steps < 1) throw InputError("steps must be at least 1");
    if (x0.size() != sys.state_dim()) throw InputError("initial state dimension mismatch");

    ExecutionLog log;
    log.algorithm = algorithm;
    log.system_name = sys.name();
    log.horizon = horizon;
    log.alpha_bar = alpha_bar;
    log.sampling_period = sys.sampling_period();
    log.equilibrium_state = sys.equilibrium_state();
    log.final_state = x0;

    TimedSolver solver(sys, horizon, options.solver, log.totals);
    const bool splicing = algorithm == Algorithm::update_a || algorithm == Algorithm::update_b;
    const auto settled = [&](const Vector& x) {
        return options.stop_tolerance &&
               (x - sys.equilibrium_state()).lpNorm<Eigen::Infinity>() <= *options.stop_tolerance;
    };

    try {
        OcpSolution current = solver(x0);
        log.initial_value = current.value;
        log.final_value = current.value;
        Vector x = x0;
        int t = 0;
        double accumulated = 0.0;

        while (t < options.steps && !settled(x)) {
            EventRecord ev;
            ev.index = static_cast<int>(log.events.size());
            ev.start = t;
            ev.value_before = current.value;

            // (1) choose m_n: probes[j-1] is the solve at x_{u_N}(j; x)
            std::vector<OcpSolution> probes;
            int m = 1;
            const int last_j = algorithm == Algorithm::classical ? 1 : horizon - 1;
            for (int j = 1; j <= last_j; ++j) {
                probes.push_back(solver(current.trajectory[j], shift_warm_start(current, j)));
                const AlphaCheck chk = check_mstep(current, probes.back().value, j, alpha_bar);
                ev.alphas.push_back(chk.alpha_local);
                if (j == 1) ev.violation = !chk.satisfied;
                if (chk.satisfied) {
                    m = j;
                    break;
                }
                if (algorithm != Algorithm::classical && j == horizon - 1) {
                    ev.warning = true;
                    ev.note = std::string(kDivergenceWarning) + kRemedy;
                    m = 1;
                }
            }

            // (2) apply m_n controls, splicing where an update condition allows
            OcpSolution working = current;
            OcpSolution endpoint = probes[m - 1];
            const double anchor = current.value;
            bool touched = false;
            if (splicing && m >= 2) {
                for (int j = 1; j <= m - 1; ++j) {
                    OcpSolution resolved =
                        touched ? solver(working.trajectory[j], shift_warm_start(working, j)) : probes[j - 1];
                    OcpSolution candidate = solver(resolved.trajectory[m - j], shift_warm_start(resolved, m - j));

                    UpdateAttempt attempt;
                    attempt.j = j;
                    attempt.V_end_old = endpoint.value;
                    attempt.V_end_new = candidate.value;
                    if (algorithm == Algorithm::update_a) {
                        attempt.condition = UpdateCondition::A;
                        attempt.check = check_update_A(anchor, working, resolved, candidate.value, j, m, alpha_bar);
                    } else {
                        attempt.condition = UpdateCondition::B;
                        attempt.check = check_update_B(candidate.value, endpoint.value,
                                                       window(working.stage_costs, j, m),
                                                       window(resolved.stage_costs, 0, m - j), alpha_bar);
                    }
                    attempt.applied = attempt.check.satisfied;
                    ev.updates.push_back(attempt);
                    if (attempt.applied) {
                        SpliceResult sp = splice(working, resolved, j, m);
                        working = evaluate_controls(sys, x, std::move(sp.new_controls));
                        endpoint = std::move(candidate);
                        touched = true;
                    }
                }
            }

            const AlphaCheck cert = check_mstep(anchor, working.stage_costs, endpoint.value, m, alpha_bar);
            ev.certified = cert.satisfied;
            ev.certified_alpha = cert.alpha_local;
            ev.m = m;
            for (int k = 0; k < m; ++k) {
                log.steps.push_back({t + k, working.trajectory[k], working.controls[k], working.stage_costs[k]});
                ev.block_cost += working.stage_costs[k];
                accumulated += working.stage_costs[k];
            }
            ev.accumulated_cost = accumulated;
            ev.value_after = endpoint.value;
            ev.unconverged_solve = solver.take_unconverged();
            log.events.push_back(std::move(ev));
            log.schedule.append(m);

            // (3) advance
            t += m;
            x = working.trajectory[m];
            current = std::move(endpoint);
            log.final_state = x;
            log.final_value = current.value;
        }
    } catch (const DivergenceError& e) {
        log.aborted = true;
        log.abort_reason = e.what();
    } catch (const ConsistencyError& e) {
        log.aborted = true;
        log.abort_reason = e.what();
    }

    log.totals.closed_loop_cost = closed_loop_cost(log);
    return log;
}

ExecutionLog run_basic(const ControlSystem& sys, const Vector& x0, int horizon, double alpha_bar,
                       const RunOptions& options) {
    return run(Algorithm::basic, sys, x0, horizon, alpha_bar, options);
}

ExecutionLog run_update_A(const ControlSystem& sys, const Vector& x0, int horizon, double alpha_bar,
                          const RunOptions& options) {
    return run(Algorithm::update_a, sys, x0, horizon, alpha_bar, options);
}

ExecutionLog run_update_B(const ControlSystem& sys, const Vector& x0, int horizon, double alpha_bar,
                          const RunOptions& options) {
    return run(Algorithm::update_b, sys, x0, horizon, alpha_bar, options);
}

ExecutionLog run_classical(const ControlSystem& sys, const Vector& x0, int horizon, double alpha_bar,
                           const RunOptions& options) {
    return run(Algorithm::classical, sys, x0, horizon, alpha_bar, options);
}

double closed_loop_cost(const ExecutionLog& log) {
    double total = 0.0;
    for (const StepRecord& row : log.steps) total += row.stage_cost;
    return total;
}

TelescopingCheck telescoping_certificate(const ExecutionLog& log) {
    TelescopingCheck out;
    const double scale = std::max(1.0, std::abs(log.initial_value));
    double certified_cost = 0.0;
    for (std::size_t n = 0; n < log.events.size(); ++n) {
        const EventRecord& ev = log.events[n];
        if (ev.certified) certified_cost += ev.block_cost;
        const double lhs = log.alpha_bar * certified_cost;
        const double rhs = log.initial_value - ev.value_after + kRelativeSlack * static_cast<double>(n + 1) * scale;
        const double margin = rhs - lhs;
        if (out.worst_prefix < 0 || margin < out.worst_margin) {
            out.worst_margin = margin;
            out.worst_prefix = static_cast<int>(n);
        }
        if (margin < 0.0) out.holds = false;
    }
    return out;
}

}  // namespace nmpc

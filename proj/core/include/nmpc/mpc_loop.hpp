#pragma once

#include "nmpc/dynamics.hpp"
#include "nmpc/ocp.hpp"
#include "nmpc/suboptimality.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace nmpc {

enum class Algorithm {
    classical,  ///< one control per event, alpha monitored only
    basic,      ///< adaptive m_n from the m-step inequality
    update_a,   ///< basic + splices certified by the first update condition
    update_b,   ///< basic + splices certified by the second update condition
};

std::string_view to_string(Algorithm algorithm);
std::optional<Algorithm> parse_algorithm(std::string_view name);

struct RunOptions {
    int steps = 100;                              ///< minimum number of sampling instants to simulate
    std::optional<double> stop_tolerance = 1e-4;  ///< stop once |x - x*|_inf <= tol
    SolverOptions solver;
};

/// Ascending re-optimisation instants S = (s(0) = 0, s(1), ...).
class UpdateSchedule {
public:
    UpdateSchedule() : events_{0} {}
    explicit UpdateSchedule(std::vector<int> events) : events_(std::move(events)) {}

    void append(int m) { events_.push_back(events_.back() + m); }
    int back() const { return events_.back(); }
    const std::vector<int>& events() const noexcept { return events_; }
    /// m_n = s(n+1) - s(n)
    std::vector<int> gaps() const;
    /// strictly ascending, starts at 0, every gap in [1, N-1]
    bool is_valid(int horizon) const;

    friend bool operator==(const UpdateSchedule&, const UpdateSchedule&) = default;

private:
    std::vector<int> events_;
};

enum class UpdateCondition { A, B };

struct UpdateAttempt {
    int j = 0;
    UpdateCondition condition = UpdateCondition::A;
    AlphaCheck check;
    bool applied = false;
    double V_end_old = 0.0;  ///< V_N at the block end before the splice
    double V_end_new = 0.0;  ///< V_N at the spliced block end
};

struct EventRecord {
    int index = 0;
    int start = 0;  ///< s(n)
    int m = 1;      ///< m_n
    std::vector<double> alphas;  ///< step (1) local alpha for j = 1, 2, ...
    bool violation = false;      ///< the one-step inequality failed at this event
    bool warning = false;        ///< step (1d) reached: "Solution may diverge"
    std::string note;
    std::vector<UpdateAttempt> updates;
    double value_before = 0.0;  ///< V_N(x_n)
    double value_after = 0.0;   ///< V_N at the realised block end
    double block_cost = 0.0;
    double accumulated_cost = 0.0;
    bool certified = false;         ///< realised block satisfies the m-step inequality
    double certified_alpha = 0.0;   ///< local alpha of the realised block
    bool unconverged_solve = false; ///< some solve feeding this event hit the iteration cap
};

struct StepRecord {
    int step = 0;
    Vector state;
    Vector control;
    double stage_cost = 0.0;
};

struct ExecutionTotals {
    double closed_loop_cost = 0.0;
    long solver_calls = 0;
    double solve_seconds = 0.0;  ///< wall clock spent inside solve()
};

struct ExecutionLog {
    Algorithm algorithm = Algorithm::basic;
    std::string system_name;
    int horizon = 0;
    double alpha_bar = 0.0;
    double sampling_period = 1.0;
    Vector equilibrium_state;
    std::vector<StepRecord> steps;
    std::vector<EventRecord> events;
    UpdateSchedule schedule;
    ExecutionTotals totals;
    Vector final_state;
    double initial_value = 0.0;  ///< V_N(x_0)
    double final_value = 0.0;    ///< V_N(x_final)
    bool aborted = false;
    std::string abort_reason;

    /// S with the splice instants s(n) + j inserted.
    std::vector<int> update_instants() const;
    int warning_count() const;
    int violation_count() const;
    int splice_count() const;
    double final_error() const;  ///< |x_final - x*|_inf
};

/// Runs one closed loop with the chosen algorithm. Solver divergence ends the
/// run early with `aborted` set and the partial log kept.
ExecutionLog run(Algorithm algorithm, const ControlSystem& sys, const Vector& x0, int horizon, double alpha_bar,
                 const RunOptions& options = {});

ExecutionLog run_basic(const ControlSystem& sys, const Vector& x0, int horizon, double alpha_bar,
                       const RunOptions& options = {});
ExecutionLog run_update_A(const ControlSystem& sys, const Vector& x0, int horizon, double alpha_bar,
                          const RunOptions& options = {});
ExecutionLog run_update_B(const ControlSystem& sys, const Vector& x0, int horizon, double alpha_bar,
                          const RunOptions& options = {});
ExecutionLog run_classical(const ControlSystem& sys, const Vector& x0, int horizon, double alpha_bar,
                           const RunOptions& options = {});

/// Sum of the logged stage costs.
double closed_loop_cost(const ExecutionLog& log);

struct TelescopingCheck {
    bool holds = true;
    double worst_margin = 0.0;  ///< min over prefixes of rhs - lhs
    int worst_prefix = -1;
};

/// For every prefix of events: alpha_bar * sum of certified block costs <=
/// V_N(x_0) - V_N(x_last) + 1e-9 * (#events) * max(1, V_N(x_0)).
TelescopingCheck telescoping_certificate(const ExecutionLog& log);

}  // namespace nmpc

#pragma once

#include "nmpc/mpc_loop.hpp"
#include "nmpc_tools/scenario.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace nmpc::tools {

/// Exit codes of the command-line front end.
enum ExitCode : int { kExitOk = 0, kExitError = 1, kExitWarning = 2 };

struct RunSummary {
    UpdateSchedule schedule;
    std::vector<int> update_instants;
    int violations = 0;
    int warnings = 0;
    int splices = 0;
    std::vector<double> event_alphas;
    double closed_loop_cost = 0.0;
    double initial_value = 0.0;
    double final_error = 0.0;
    double solve_seconds = 0.0;
    long solver_calls = 0;
    bool certificate_holds = false;
    bool aborted = false;
    std::string abort_reason;
};

RunSummary summarize(const ExecutionLog& log);
std::string format_summary(const RunSummary& summary, const ScenarioConfig& config);

/// Output path after applying the NMPC_OUTPUT_DIR override to relative paths.
std::string resolve_output_path(const std::string& path);

/// Runs one scenario, writes the CSV trace and `<output>.summary.txt`.
int cmd_run(const ScenarioConfig& config, std::ostream& out, std::ostream& err);

/// Writes the alpha_{N,m} grid (columns N,m,alpha) for 2 <= N <= N_max.
int cmd_alpha_table(double C, double sigma, int N_max, const std::string& output,
                    std::optional<double> alpha_bar, std::ostream& out, std::ostream& err);

struct ComparisonReport {
    RunSummary a;
    RunSummary b;
    double cost_ratio = 0.0;  ///< b / a
    double time_ratio = 0.0;  ///< b / a, solve time only
    bool identical_schedules = false;
    bool b_refines_a = false;
    std::string text;
};

/// Every block start of `coarse` (within the common time span) is an update
/// instant of `fine`, or falls inside a `fine` block that applied a splice.
bool schedule_refines(const ExecutionLog& coarse, const ExecutionLog& fine);

ComparisonReport compare_runs(const ExecutionLog& a, const ExecutionLog& b, const ScenarioConfig& config_a,
                              const ScenarioConfig& config_b);

/// Runs both scenarios (concurrently unless `serial`) and prints a side-by-side report.
int cmd_compare(const ScenarioConfig& config_a, const ScenarioConfig& config_b, bool serial,
                const std::optional<std::string>& report_path, std::ostream& out, std::ostream& err);

}  // namespace nmpc::tools

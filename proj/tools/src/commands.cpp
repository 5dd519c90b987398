#include "nmpc_tools/commands.hpp"

#include "nmpc/alpha_table.hpp"
#include "nmpc/errors.hpp"
#include "nmpc_tools/trace_csv.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <future>
#include <ostream>
#include <set>
#include <sstream>

namespace nmpc::tools {

namespace {

std::string fmt(const char* format, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, format, v);
    return buf;
}

std::string join(const std::vector<int>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) out += (i ? " " : "") + std::to_string(values[i]);
    return out;
}

struct LqChain {
    double V_inf = 0.0;
    double V_N = 0.0;
    bool holds = false;
    std::string text;
};

// alpha_bar V_inf <= alpha_bar J <= V_N <= V_inf, relative slack 1e-6
LqChain lq_chain(const ExecutionLog& log, const ScenarioConfig& config) {
    LqChain c;
    const double x0 = initial_state(config)[0];
    c.V_inf = lq_infinite_value_coefficient(config.a, config.b, config.q, config.r) * x0 * x0;
    c.V_N = log.initial_value;
    const double J = closed_loop_cost(log);
    const double ab = log.alpha_bar;
    const double tol = 1e-6 * std::max(1.0, c.V_inf);
    const double chain[4] = {ab * c.V_inf, ab * J, c.V_N, c.V_inf};
    c.holds = chain[0] <= chain[1] + tol && chain[1] <= chain[2] + tol && chain[2] <= chain[3] + tol;
    c.text = "  certificate chain  alpha_bar*V_inf = " + fmt("%.9g", chain[0]) + " <= alpha_bar*J = " +
             fmt("%.9g", chain[1]) + " <= V_N(x0) = " + fmt("%.9g", chain[2]) + " <= V_inf(x0) = " +
             fmt("%.9g", chain[3]) + (c.holds ? "  [holds]\n" : "  [VIOLATED]\n");
    return c;
}

ExecutionLog execute(const ScenarioConfig& config) {
    validate(config);
    return run(config.algorithm, make_system(config), initial_state(config), config.N, config.alpha_bar,
               run_options(config));
}

std::string describe_system(const ScenarioConfig& c) {
    if (c.system == SystemKind::syncgen) return "syncgen";
    std::ostringstream s;
    s << "linear_scalar(a=" << c.a << ", b=" << c.b << ", q=" << c.q << ", r=" << c.r << ")";
    return s.str();
}

bool same_system(const ScenarioConfig& a, const ScenarioConfig& b) {
    if (a.system != b.system) return false;
    if (a.system == SystemKind::linear_scalar) return a.a == b.a && a.b == b.b && a.q == b.q && a.r == b.r;
    return a.T == b.T && a.lambda == b.lambda;
}

}  // namespace

RunSummary summarize(const ExecutionLog& log) {
    RunSummary s;
    s.schedule = log.schedule;
    s.update_instants = log.update_instants();
    s.violations = log.violation_count();
    s.warnings = log.warning_count();
    s.splices = log.splice_count();
    for (const EventRecord& ev : log.events) s.event_alphas.push_back(ev.certified_alpha);
    s.closed_loop_cost = closed_loop_cost(log);
    s.initial_value = log.initial_value;
    s.final_error = log.final_error();
    s.solve_seconds = log.totals.solve_seconds;
    s.solver_calls = log.totals.solver_calls;
    s.certificate_holds = telescoping_certificate(log).holds;
    s.aborted = log.aborted;
    s.abort_reason = log.abort_reason;
    return s;
}

std::string format_summary(const RunSummary& s, const ScenarioConfig& config) {
    std::ostringstream out;
    out << "system      " << describe_system(config) << "\n";
    out << "algorithm   " << to_string(config.algorithm) << "  N=" << config.N << "  alpha_bar=" << config.alpha_bar
        << "\n";
    out << "events      " << s.event_alphas.size() << "  block lengths " << join(s.schedule.gaps()) << "\n";
    out << "schedule    " << join(s.schedule.events()) << "\n";
    if (s.splices > 0) out << "updates     " << join(s.update_instants) << "  (" << s.splices << " splices)\n";
    out << "violations  " << s.violations << "\n";
    out << "warnings    " << s.warnings << "\n";
    out << "alphas     ";
    for (double a : s.event_alphas) out << " " << fmt("%.4g", a);
    out << "\n";
    out << "cost        J = " << fmt("%.12g", s.closed_loop_cost) << "  V_N(x0) = " << fmt("%.12g", s.initial_value)
        << "\n";
    out << "final err   " << fmt("%.3e", s.final_error) << "\n";
    out << "solver      " << s.solver_calls << " calls, " << fmt("%.3f", s.solve_seconds) << " s\n";
    out << "telescoping " << (s.certificate_holds ? "holds" : "fails") << "\n";
    if (s.aborted) out << "ABORTED     " << s.abort_reason << "\n";
    return out.str();
}

std::string resolve_output_path(const std::string& path) {
    const char* dir = std::getenv("NMPC_OUTPUT_DIR");
    if (!dir || !*dir) return path;
    const std::filesystem::path p(path);
    if (p.is_absolute()) return path;
    return (std::filesystem::path(dir) / p).string();
}

int cmd_run(const ScenarioConfig& config, std::ostream& out, std::ostream& err) {
    ExecutionLog log;
    try {
        log = execute(config);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return kExitError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitError;
    }

    const std::string csv_path = resolve_output_path(config.output);
    RunSummary summary = summarize(log);
    std::string text = format_summary(summary, config);
    bool chain_ok = true;
    if (config.system == SystemKind::linear_scalar && !log.aborted) {
        const LqChain chain = lq_chain(log, config);
        chain_ok = chain.holds;
        text += chain.text;
    }
    try {
        write_file_atomic(csv_path, trace_csv(log));
        write_file_atomic(csv_path + ".summary.txt", text);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitError;
    }
    out << text;
    out << "trace       " << csv_path << "\n";

    if (log.aborted) {
        err << "error: run aborted: " << log.abort_reason << " (partial trace kept)\n";
        return kExitError;
    }
    for (const EventRecord& ev : log.events) {
        if (ev.warning) err << "warning: Solution may diverge (event at step " << ev.start << ")\n";
    }
    if (!chain_ok) err << "warning: certificate chain violated\n";
    return summary.warnings > 0 ? kExitWarning : kExitOk;
}

int cmd_alpha_table(double C, double sigma, int N_max, const std::string& output, std::optional<double> alpha_bar,
                    std::ostream& out, std::ostream& err) {
    try {
        if (N_max < 2) throw UsageError("N_max", "must be at least 2");
        if (alpha_bar && !(*alpha_bar > 0.0 && *alpha_bar < 1.0)) throw UsageError("alpha_bar", "must lie in (0, 1)");
        std::unique_ptr<ExpoControllability> ec;
        try {
            ec = std::make_unique<ExpoControllability>(C, sigma);
        } catch (const InputError& e) {
            throw UsageError(C < 1.0 || !std::isfinite(C) ? "C" : "sigma", e.what());
        }

        std::string csv = "N,m,alpha\n";
        char buf[96];
        for (int N = 2; N <= N_max; ++N) {
            for (int m = 1; m <= N - 1; ++m) {
                std::snprintf(buf, sizeof buf, "%d,%d,%.17g\n", N, m, alpha_nm(N, m, *ec));
                csv += buf;
            }
        }
        const std::string path = resolve_output_path(output);
        write_file_atomic(path, csv);
        out << "alpha table C=" << C << " sigma=" << sigma << " N<=" << N_max << " -> " << path << "\n";

        if (alpha_bar) {
            for (const auto& [label, policy] : {std::pair<const char*, ControlHorizonPolicy>{"m=1", FixedControlHorizon{1}},
                                                {"m=floor(N/2)", HalfHorizon{}}}) {
                out << "min N for alpha >= " << *alpha_bar << " with " << label << ": ";
                try {
                    out << min_horizon(*alpha_bar, policy, *ec) << "\n";
                } catch (const NotFoundError&) {
                    out << "none up to 1000\n";
                }
            }
        }
        return kExitOk;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
    }
    return kExitError;
}

bool schedule_refines(const ExecutionLog& coarse, const ExecutionLog& fine) {
    const std::vector<int> instants = fine.update_instants();
    const std::set<int> fine_instants(instants.begin(), instants.end());
    const int span = std::min(coarse.steps.size(), fine.steps.size());
    for (int s : coarse.schedule.events()) {
        if (s >= span) break;
        if (fine_instants.count(s)) continue;
        bool explained = false;
        for (const EventRecord& ev : fine.events) {
            if (s > ev.start && s < ev.start + ev.m) {
                explained = std::any_of(ev.updates.begin(), ev.updates.end(), [](const auto& u) { return u.applied; });
                break;
            }
        }
        if (!explained) return false;
    }
    return true;
}

ComparisonReport compare_runs(const ExecutionLog& a, const ExecutionLog& b, const ScenarioConfig& config_a,
                              const ScenarioConfig& config_b) {
    ComparisonReport r;
    r.a = summarize(a);
    r.b = summarize(b);
    r.cost_ratio = r.b.closed_loop_cost / r.a.closed_loop_cost;
    r.time_ratio = r.a.solve_seconds > 0.0 ? r.b.solve_seconds / r.a.solve_seconds : std::nan("");
    r.identical_schedules = a.schedule == b.schedule && a.update_instants() == b.update_instants();
    r.b_refines_a = schedule_refines(a, b);

    std::ostringstream out;
    auto side = [&](const char* label, const RunSummary& s, const ScenarioConfig& c) {
        out << label << ": " << to_string(c.algorithm) << " N=" << c.N << " alpha_bar=" << c.alpha_bar << "\n";
        out << "  schedule   " << join(s.schedule.events()) << "\n";
        out << "  updates    " << join(s.update_instants) << "\n";
        out << "  cost       " << fmt("%.12g", s.closed_loop_cost) << "\n";
        out << "  violations " << s.violations << "  warnings " << s.warnings << "  splices " << s.splices << "\n";
        out << "  solve time " << fmt("%.3f", s.solve_seconds) << " s (" << s.solver_calls << " calls)\n";
    };
    out << "system " << describe_system(config_a) << "\n";
    side("A", r.a, config_a);
    side("B", r.b, config_b);
    out << "cost ratio B/A  " << fmt("%.6f", r.cost_ratio) << "\n";
    out << "time ratio B/A  " << fmt("%.3f", r.time_ratio) << "\n";
    out << "schedules       " << (r.identical_schedules ? "identical" : "differ") << "\n";
    out << "B refines A     " << (r.b_refines_a ? "yes" : "no") << "\n";
    r.text = out.str();
    return r;
}

int cmd_compare(const ScenarioConfig& config_a, const ScenarioConfig& config_b, bool serial,
                const std::optional<std::string>& report_path, std::ostream& out, std::ostream& err) {
    try {
        validate(config_a);
        validate(config_b);
        if (!same_system(config_a, config_b)) throw UsageError("system", "compared runs must use the same system");
        const Vector xa = initial_state(config_a);
        const Vector xb = initial_state(config_b);
        if (xa.size() != xb.size() || xa != xb) throw UsageError("x0", "compared runs must start from the same x0");

        ExecutionLog la, lb;
        if (serial) {
            la = execute(config_a);
            lb = execute(config_b);
        } else {
            auto fa = std::async(std::launch::async, execute, std::cref(config_a));
            auto fb = std::async(std::launch::async, execute, std::cref(config_b));
            la = fa.get();
            lb = fb.get();
        }
        const ComparisonReport report = compare_runs(la, lb, config_a, config_b);
        out << report.text;
        if (report_path) write_file_atomic(resolve_output_path(*report_path), report.text);
        if (la.aborted || lb.aborted) {
            err << "error: a compared run aborted\n";
            return kExitError;
        }
        return (report.a.warnings + report.b.warnings) > 0 ? kExitWarning : kExitOk;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
    }
    return kExitError;
}

}  // namespace nmpc::tools

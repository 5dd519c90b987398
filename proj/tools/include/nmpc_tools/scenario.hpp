#pragma once

#include "nmpc/mpc_loop.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace nmpc::tools {

/// Invalid configuration; `field()` names the offending key.
class UsageError : public std::invalid_argument {
public:
    UsageError(std::string field, const std::string& message)
        : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

enum class SystemKind { syncgen, linear_scalar };

struct ScenarioConfig {
    SystemKind system = SystemKind::syncgen;
    double a = 2.0, b = 1.0, q = 1.0, r = 1.0;  ///< linear_scalar coefficients
    std::optional<std::vector<double>> x0;     ///< defaults: syncgen (1.02, 0.1, 1.014), linear_scalar 1
    int N = 19;
    double alpha_bar = 0.1;
    Algorithm algorithm = Algorithm::basic;
    int steps = 100;
    double T = 0.1;
    double lambda = 1e-6;
    std::string output = "trace.csv";
    int substeps = 10;
    double grad_tol = 1e-8;
    int max_iter = 500;
    std::optional<double> stop_tol = 1e-4;
};

/// Sets one key (underscores or dashes) from its textual value.
void apply_setting(ScenarioConfig& config, std::string_view key, std::string_view value);

/// Flat `key = value` text, `#` starts a comment.
ScenarioConfig parse_config_text(std::string_view text, ScenarioConfig base = {});
ScenarioConfig load_config_file(const std::string& path, ScenarioConfig base = {});

/// Checks every field against the run preconditions; throws UsageError.
void validate(const ScenarioConfig& config);

ControlSystem make_system(const ScenarioConfig& config);
Vector initial_state(const ScenarioConfig& config);
RunOptions run_options(const ScenarioConfig& config);
std::string_view to_string(SystemKind kind);

/// Infinite-horizon LQ value coefficient P with V_inf(x) = P x^2 (Riccati fixed point).
double lq_infinite_value_coefficient(double a, double b, double q, double r);
/// N-stage value coefficient P_N with V_N(x) = P_N x^2.
double lq_finite_value_coefficient(double a, double b, double q, double r, int N);

}  // namespace nmpc::tools

#include "nmpc_tools/commands.hpp"
#include "nmpc_tools/scenario.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <iostream>
#include <map>

namespace {

using nmpc::tools::ScenarioConfig;

// Scenario keys exposed as flags; values are parsed by apply_setting so that flags
// and config files share one grammar.
const char* const kScenarioKeys[] = {"system", "x0",    "N",      "alpha_bar", "algorithm", "steps",
                                     "T",      "lambda", "output", "substeps",  "grad_tol",  "max_iter",
                                     "stop_tol", "a",    "b",      "q",         "r"};

struct ScenarioFlags {
    std::string config_path;
    std::map<std::string, std::string> values;
};

void add_scenario_flags(CLI::App& cmd, ScenarioFlags& flags) {
    cmd.add_option("--config", flags.config_path, "key = value scenario file; flags override it");
    for (const char* key : kScenarioKeys) {
        std::string flag = key;
        std::replace(flag.begin(), flag.end(), '_', '-');
        cmd.add_option("--" + flag, flags.values[key]);
    }
}

ScenarioConfig build(const ScenarioFlags& flags, const CLI::App& cmd, std::vector<std::string> extra = {}) {
    ScenarioConfig config;
    if (!flags.config_path.empty()) config = nmpc::tools::load_config_file(flags.config_path);
    for (const auto& [key, value] : flags.values) {
        std::string flag = key;
        std::replace(flag.begin(), flag.end(), '_', '-');
        if (cmd.count("--" + flag) > 0) nmpc::tools::apply_setting(config, key, value);
    }
    for (const std::string& kv : extra) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw nmpc::tools::UsageError(kv, "expected key=value");
        nmpc::tools::apply_setting(config, kv.substr(0, eq), kv.substr(eq + 1));
    }
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Receding-horizon control with runtime suboptimality certification"};
    app.require_subcommand(1);

    ScenarioFlags run_flags;
    CLI::App* run = app.add_subcommand("run", "simulate one closed loop and write its CSV trace");
    add_scenario_flags(*run, run_flags);

    double C = 4.0, sigma = 0.6;
    int N_max = 30;
    std::string table_output = "alpha_table.csv";
    std::optional<double> table_alpha_bar;
    CLI::App* table = app.add_subcommand("alpha-table", "write the alpha_{N,m} grid as CSV");
    table->add_option("--C", C);
    table->add_option("--sigma", sigma);
    table->add_option("--N-max", N_max);
    table->add_option("--output", table_output);
    table->add_option("--alpha-bar", table_alpha_bar, "also report the smallest certifying horizons");

    std::string config_a, config_b;
    std::vector<std::string> set_a, set_b;
    bool serial = false;
    std::optional<std::string> report_path;
    CLI::App* compare = app.add_subcommand("compare", "run two scenarios and compare cost and solve time");
    compare->add_option("--config-a", config_a);
    compare->add_option("--config-b", config_b);
    compare->add_option("--set-a", set_a, "key=value override for scenario A")->take_all();
    compare->add_option("--set-b", set_b, "key=value override for scenario B")->take_all();
    compare->add_flag("--serial", serial, "run the scenarios one after the other");
    compare->add_option("--report", report_path);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // --help and friends keep CLI11's exit status; anything else is a usage error
        const int code = app.exit(e);
        return code == 0 ? 0 : nmpc::tools::kExitError;
    }

    try {
        if (run->parsed()) {
            return nmpc::tools::cmd_run(build(run_flags, *run), std::cout, std::cerr);
        }
        if (table->parsed()) {
            return nmpc::tools::cmd_alpha_table(C, sigma, N_max, table_output, table_alpha_bar, std::cout, std::cerr);
        }
        ScenarioFlags fa{config_a, {}}, fb{config_b, {}};
        const ScenarioConfig a = build(fa, *compare, set_a);
        const ScenarioConfig b = build(fb, *compare, set_b);
        return nmpc::tools::cmd_compare(a, b, serial, report_path, std::cout, std::cerr);
    } catch (const nmpc::tools::UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
    }
    return nmpc::tools::kExitError;
}

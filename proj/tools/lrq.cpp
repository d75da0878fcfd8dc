// lrq -- Lewis-Riesenfeld invariant workflows for time-dependent two-level
// multiphoton Jaynes-Cummings drives, spin models and photon transport in a
// curved optical fiber. Batch front end: scenario configs in, deterministic
// CSV reports out.
//
// Exit codes: 0 all configured tolerances pass, 1 tolerance failure,
//             2 config/usage error, 3 numerical failure.

#include "lrq/config.hpp"
#include "lrq/scenario.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

std::filesystem::path resolve_out_dir(const std::string& cli_out, const std::string& config_out) {
    if (!cli_out.empty()) return cli_out;
    if (!config_out.empty()) return config_out;
    if (const char* env = std::getenv("LRQ_OUT_DIR"); env && *env) return env;
    return "out";
}

void print_summary(const lrq::ScenarioResult& result, bool quiet) {
    if (quiet) return;
    for (const auto& [k, v] : result.summary) std::cout << k << " = " << v << '\n';
}

std::vector<std::string> split_tokens(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream ss(text);
    for (std::string tok; ss >> tok;) out.push_back(tok);
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Lewis-Riesenfeld invariant scenarios: exact propagators, phases and "
                 "brute-force cross-checks"};
    app.require_subcommand(1);

    std::string config_path, out_dir, sweep_key, sweep_values;
    int steps_override = 0;
    bool quiet = false;
    int m_max = 5, k_max = 4;

    auto* verify = app.add_subcommand("verify-algebra", "check the generator algebras");
    verify->add_option("--m-max", m_max, "largest photon label m");
    verify->add_option("--k-max", k_max, "largest photons-per-transition k");
    verify->add_option("--out", out_dir, "directory for the relation report CSV");
    verify->add_flag("--quiet", quiet, "suppress the report on stdout");

    auto* run = app.add_subcommand("run", "run one scenario config");
    run->add_option("--config", config_path, "scenario config file")->required();
    run->add_option("--out", out_dir, "output directory (overrides config and LRQ_OUT_DIR)");
    run->add_option("--steps", steps_override, "override grid.n_steps");
    run->add_flag("--quiet", quiet, "suppress the summary on stdout");

    auto* sweep = app.add_subcommand("sweep", "run a scenario once per swept value");
    sweep->add_option("--config", config_path, "base scenario config file")->required();
    sweep->add_option("--key", sweep_key, "config key to substitute (default from sweep.key)");
    sweep->add_option("--values", sweep_values,
                      "space-separated value tokens (default from sweep.values)");
    sweep->add_option("--out", out_dir, "output directory");
    sweep->add_option("--steps", steps_override, "override grid.n_steps");
    sweep->add_flag("--quiet", quiet, "suppress per-point lines on stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (verify->parsed()) {
            const lrq::AlgebraVerification report = lrq::verify_algebra(m_max, k_max);
            if (!out_dir.empty()) {
                std::filesystem::create_directories(out_dir);
                std::ofstream csv(std::filesystem::path(out_dir) / "algebra_report.csv",
                                  std::ios::binary | std::ios::trunc);
                csv << "m,k,relation,residual,pass\n";
                for (const auto& line : report.lines) csv << line << '\n';
            }
            if (!quiet) {
                std::cout << "m,k,relation,residual,pass\n";
                for (const auto& line : report.lines) std::cout << line << '\n';
                std::cout << (report.all_pass ? "all " : "FAILURES among ")
                          << report.relations_checked << " relation checks\n";
            }
            return report.all_pass ? 0 : 1;
        }

        if (run->parsed()) {
            lrq::RawConfig raw = lrq::parse_config_file(config_path);
            if (steps_override > 0)
                raw.set("grid.n_steps", std::to_string(steps_override));
            const lrq::ScenarioConfig cfg = lrq::load_scenario(raw);
            const auto dir = resolve_out_dir(out_dir, cfg.out.directory);
            const lrq::ScenarioResult result = lrq::run_scenario(cfg, dir);
            print_summary(result, quiet);
            if (!quiet) std::cout << "reports written to " << dir.string() << '\n';
            return result.exit_code;
        }

        // sweep
        lrq::RawConfig raw = lrq::parse_config_file(config_path);
        if (steps_override > 0) raw.set("grid.n_steps", std::to_string(steps_override));
        std::string key = sweep_key;
        std::vector<std::string> values = split_tokens(sweep_values);
        lrq::ConfigView peek(raw);
        if (key.empty()) {
            if (!peek.has("sweep.key"))
                throw lrq::config_error("sweep needs --key or a sweep.key entry in the config");
            key = peek.get_string("sweep.key");
        } else {
            peek.get_string("sweep.key", ""); // consumed if present; CLI flag wins
        }
        if (values.empty()) values = split_tokens(peek.get_string("sweep.values", ""));
        if (values.empty())
            throw lrq::config_error("sweep needs --values or a sweep.values entry in the config");
        raw.entries.erase("sweep.key");
        raw.entries.erase("sweep.values");

        const auto dir = resolve_out_dir(out_dir, "");
        const lrq::SweepResult result = lrq::run_sweep(raw, key, values, dir);
        if (!quiet) {
            for (std::size_t i = 0; i < result.points.size(); ++i)
                std::cout << "point " << i << ": " << key << " = " << result.points[i].value
                          << " -> exit " << result.points[i].exit_code << '\n';
            std::cout << "sweep reports written to " << dir.string() << '\n';
        }
        return result.exit_code;
    } catch (const lrq::config_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const lrq::numerical_error& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}

// Command-line front end for the bias-control simulator.

#include "mzmbias/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Mach-Zehnder modulator bias-control simulator"};
    app.require_subcommand(1);

    mzmbias::SimulateOptions simulate;
    std::uint64_t simulate_seed = 0;
    auto* sim_cmd = app.add_subcommand("simulate", "Run one scenario and write a CSV trace");
    sim_cmd->add_option("--scenario", simulate.scenario, "Scenario JSON file")->required();
    sim_cmd->add_option("--out", simulate.out, "Output CSV path")->required();
    auto* sim_seed = sim_cmd->add_option("--seed", simulate_seed, "Override the scenario seed");
    sim_cmd->add_flag("--open-loop", simulate.open_loop, "Bypass the controller");

    mzmbias::CompareOptions compare;
    std::uint64_t compare_seed = 0;
    auto* cmp_cmd = app.add_subcommand("compare", "Run open and closed loop with one seed");
    cmp_cmd->add_option("--scenario", compare.scenario, "Scenario JSON file")->required();
    cmp_cmd->add_option("--out", compare.out_dir, "Output directory")->required();
    auto* cmp_seed = cmp_cmd->add_option("--seed", compare_seed, "Override the scenario seed");

    mzmbias::CalibrateOptions calibrate;
    auto* cal_cmd = app.add_subcommand("calibrate", "Sweep the bias and estimate Vpi, quadrature and extinction");
    cal_cmd->add_option("--scenario", calibrate.scenario, "Scenario JSON file")->required();
    cal_cmd->add_option("--step", calibrate.sweep_step, "Sweep step in volts")->capture_default_str();

    std::filesystem::path metrics_csv;
    auto* met_cmd = app.add_subcommand("metrics", "Power statistics of a trace CSV");
    met_cmd->add_option("csv", metrics_csv, "Trace CSV file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return mzmbias::kExitValidation;
    }

    if (*sim_cmd) {
        if (*sim_seed) {
            simulate.seed = simulate_seed;
        }
        return mzmbias::cmd_simulate(simulate, std::cout, std::cerr);
    }
    if (*cmp_cmd) {
        if (*cmp_seed) {
            compare.seed = compare_seed;
        }
        return mzmbias::cmd_compare(compare, std::cout, std::cerr);
    }
    if (*cal_cmd) {
        return mzmbias::cmd_calibrate(calibrate, std::cout, std::cerr);
    }
    return mzmbias::cmd_metrics(metrics_csv, std::cout, std::cerr);
}

#include "mzmbias/commands.hpp"

#include "mzmbias/calibration.hpp"
#include "mzmbias/errors.hpp"
#include "mzmbias/scenario.hpp"
#include "mzmbias/trace_io.hpp"

#include <ostream>
#include <sstream>

namespace mzmbias {

namespace {

// Maps the project's exception types onto exit codes.
template <typename Body>
int guarded(std::ostream& err, Body&& body) {
    try {
        return body();
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kExitIo;
    }
}

std::string summary_line(const Metrics& m, const SimTrace& trace) {
    std::ostringstream line;
    line << "fluctuation_db=" << format_number(m.fluctuation_db)
         << " max_percent_deviation=" << format_number(m.max_percent_deviation)
         << " faulted=" << (trace.faulted ? "true" : "false");
    return line.str();
}

std::string optional_number(const std::optional<double>& value) {
    return value ? format_number(*value) : "n/a";
}

std::string metrics_block(const std::string& prefix, const Metrics& m, const SimTrace& trace) {
    std::ostringstream out;
    out << prefix << "fluctuation_db=" << format_number(m.fluctuation_db) << '\n'
        << prefix << "max_percent_deviation=" << format_number(m.max_percent_deviation) << '\n'
        << prefix << "settling_time_s=" << optional_number(m.settling_time) << '\n'
        << prefix << "residual_phase_rms_rad=" << optional_number(m.residual_phase_rms) << '\n'
        << prefix << "faulted=" << (trace.faulted ? "true" : "false") << '\n';
    return out.str();
}

}  // namespace

int cmd_simulate(const SimulateOptions& options, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        Scenario scenario = load_scenario(options.scenario);
        if (options.seed) {
            scenario.sim.seed = *options.seed;
        }
        if (options.open_loop) {
            scenario.sim.open_loop = true;
        }
        const SimTrace trace = run(scenario.drift, scenario.mzm, scenario.chain, scenario.controller, scenario.sim);
        write_file_atomic(options.out, trace_to_csv(trace));
        out << summary_line(metrics(trace), trace) << '\n';
        return kExitOk;
    });
}

int cmd_compare(const CompareOptions& options, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        Scenario scenario = load_scenario(options.scenario);
        if (options.seed) {
            scenario.sim.seed = *options.seed;
        }
        std::filesystem::create_directories(options.out_dir);

        SimConfig open = scenario.sim;
        open.open_loop = true;
        SimConfig closed = scenario.sim;
        closed.open_loop = false;
        const SimTrace open_trace = run(scenario.drift, scenario.mzm, scenario.chain, scenario.controller, open);
        const SimTrace closed_trace = run(scenario.drift, scenario.mzm, scenario.chain, scenario.controller, closed);
        const Metrics open_m = metrics(open_trace);
        const Metrics closed_m = metrics(closed_trace);

        write_file_atomic(options.out_dir / "open_loop.csv", trace_to_csv(open_trace));
        write_file_atomic(options.out_dir / "closed_loop.csv", trace_to_csv(closed_trace));

        std::ostringstream summary;
        summary << "seed=" << scenario.sim.seed << '\n'
                << metrics_block("open.", open_m, open_trace) << metrics_block("closed.", closed_m, closed_trace);
        const std::string ratio = open_m.fluctuation_db > 0.0
                                      ? format_number(closed_m.fluctuation_db / open_m.fluctuation_db)
                                      : std::string("n/a");
        summary << "fluctuation_ratio_closed_over_open=" << ratio << '\n';
        write_file_atomic(options.out_dir / "summary.txt", summary.str());

        out << "open:   " << summary_line(open_m, open_trace) << '\n'
            << "closed: " << summary_line(closed_m, closed_trace) << '\n'
            << "fluctuation_ratio_closed_over_open=" << ratio << '\n';
        return kExitOk;
    });
}

int cmd_calibrate(const CalibrateOptions& options, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const Scenario scenario = load_scenario(options.scenario);
        const CalibrationReport report = calibrate(scenario, options.sweep_step);
        out << "v_pi_estimate_v=" << format_number(report.v_pi_estimate) << '\n'
            << "quadrature_v=" << format_number(report.quadrature_voltage) << '\n'
            << "extinction_ratio=" << format_number(report.extinction_ratio) << '\n'
            << "min_v=" << format_number(report.min_voltage) << '\n'
            << "max_v=" << format_number(report.max_voltage) << '\n'
            << "sweep_step_v=" << format_number(report.sweep_step) << '\n'
            << "dac_lsb_v=" << format_number(report.dac_lsb) << '\n';
        return kExitOk;
    });
}

int cmd_metrics(const std::filesystem::path& csv, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const SimTrace trace = read_trace_csv(csv);
        out << summary_line(metrics(trace), trace) << '\n';
        return kExitOk;
    });
}

}  // namespace mzmbias

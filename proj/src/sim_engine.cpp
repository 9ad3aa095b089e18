#include "mzmbias/sim_engine.hpp"

#include "mzmbias/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace mzmbias {

namespace {

// Number of whole `period`s in `span`; throws if span is not a multiple.
long whole_periods(double span, double period, const char* field) {
    const double ratio = span / period;
    const double rounded = std::round(ratio);
    if (std::abs(ratio - rounded) > 1e-6 * std::max(1.0, rounded)) {
        throw ConfigError(field, "must be an integer multiple of sim.control_period");
    }
    return static_cast<long>(rounded);
}

double to_dbm_or_floor(double power_mw) {
    return power_mw > 0.0 ? mw_to_dbm(power_mw) : -std::numeric_limits<double>::infinity();
}

std::optional<double> first_step_event(const DriftScenario& scenario, double duration) {
    std::optional<double> first;
    for (const auto& component : scenario.components) {
        if (const auto* step = std::get_if<StepEvent>(&component)) {
            if (step->at >= 0.0 && step->at <= duration && (!first || step->at < *first)) {
                first = step->at;
            }
        }
    }
    return first;
}

}  // namespace

void validate(const SimConfig& sim) {
    if (!(sim.duration > 0.0) || !std::isfinite(sim.duration)) {
        throw ConfigError("duration", "must be a finite value > 0");
    }
    if (!(sim.control_period > 0.0)) {
        throw ConfigError("control_period", "must be > 0");
    }
    if (!(sim.sample_period > 0.0)) {
        throw ConfigError("sample_period", "must be > 0");
    }
    if (sim.sample_period > sim.duration) {
        throw ConfigError("sample_period", "must not exceed duration");
    }
    if (!std::isfinite(sim.initial_bias)) {
        throw ConfigError("initial_bias", "must be finite");
    }
    if (!(sim.settle_tolerance > 0.0)) {
        throw ConfigError("settle_tolerance", "must be > 0");
    }
}

RunOutputs run_detailed(const DriftScenario& scenario, const MzmParams& mzm, const SignalChainConfig& chain,
                        const ControllerConfig& ctrl, const SimConfig& sim) {
    validate(scenario);
    validate_section(mzm, "mzm");
    validate_section(chain, "chain");
    validate_section(ctrl, "controller");
    validate_section(sim, "sim");
    if (sim.duration > scenario.duration) {
        throw ConfigError("sim.duration", "exceeds drift.duration");
    }
    const long steps = whole_periods(sim.duration, sim.control_period, "sim.duration");
    const long stride = whole_periods(sim.sample_period, sim.control_period, "sim.sample_period");

    RunOutputs out;
    SimTrace& trace = out.trace;
    trace.step_event_time = first_step_event(scenario, sim.duration);
    trace.settle_tolerance = sim.settle_tolerance;
    trace.records.reserve(static_cast<std::size_t>(steps / stride + 1));

    // Drift and detector noise use separate streams so that open- and
    // closed-loop runs with one seed see the same drift realisation.
    DriftEvaluator drift(scenario, derive_seed(sim.seed, 0));
    GaussianStream detector_rng(derive_seed(sim.seed, 1));

    bool closed = !sim.open_loop;
    double applied = dac_write(chain, sim.initial_bias);
    ControllerState state = initial_state(ctrl, sim.initial_bias);
    bool read_requested = false;
    double captured_read = 0.0;
    double reference_theta = 0.0;

    for (long k = 0; k <= steps; ++k) {
        const double t = std::min(static_cast<double>(k) * sim.control_period, sim.duration);
        const double drift_phase = drift.phase_at(t);
        const double power = mzm_transmission(mzm, applied, drift_phase);
        const TapOutputs split = tap(chain, power);
        double read = 0.0;
        if (sim.ideal_reads) {
            read = detect_ideal(chain, split.monitor);
        } else {
            read = adc_read(chain, detect(chain, split.monitor, detector_rng));
        }

        const double theta = operating_phase(mzm, applied, drift_phase);
        if (k == 0) {
            reference_theta = theta;
        }
        const double bias_at_sample = applied;

        std::string tag;
        if (closed) {
            const std::optional<double> input =
                read_requested ? std::optional<double>(captured_read) : std::nullopt;
            read_requested = false;
            const long cycles_before = state.cycles_completed;
            auto [next, act] = controller_step(std::move(state), ctrl, input);
            state = std::move(next);
            tag = action_tag(act);

            if (const auto* set = std::get_if<action::SetBias>(&act)) {
                applied = dac_write(chain, set->volts);
            } else if (std::holds_alternative<action::ReadMonitor>(act)) {
                read_requested = true;
                captured_read = read;
            } else if (const auto* comp = std::get_if<action::ApplyCompensation>(&act)) {
                applied = dac_write(chain, comp->bias);
            } else if (const auto* f = std::get_if<action::Fault>(&act)) {
                closed = false;
                trace.faulted = true;
                trace.fault_time = t;
                trace.fault_reason = f->reason;
                applied = dac_write(chain, state.base_bias);
            }

            std::optional<DriftDirection> direction;
            if (state.cycles_completed != cycles_before) {
                direction = state.last_direction;
            }
            out.actions.push_back(ActionLogEntry{t, std::move(act), direction});
        } else if (trace.faulted) {
            tag = "open_loop";
        }

        if (k % stride == 0) {
            TraceRecord rec;
            rec.t = t;
            rec.drift_phase = drift_phase;
            rec.bias_voltage = bias_at_sample;
            rec.output_power_dbm = to_dbm_or_floor(split.through);
            rec.monitor_voltage = read;
            rec.residual_phase = std::remainder(theta - reference_theta, 2.0 * std::numbers::pi);
            if (!sim.open_loop) {
                rec.d11 = state.d11;
                rec.d2 = state.d2;
                rec.r = state.r2 ? state.r2 : state.r1;
            }
            rec.last_action = std::move(tag);
            trace.records.push_back(std::move(rec));
        }
    }
    return out;
}

SimTrace run(const DriftScenario& scenario, const MzmParams& mzm, const SignalChainConfig& chain,
             const ControllerConfig& ctrl, const SimConfig& sim) {
    return run_detailed(scenario, mzm, chain, ctrl, sim).trace;
}

Metrics metrics(const SimTrace& trace) {
    if (trace.records.empty()) {
        throw DomainError("metrics: trace is empty");
    }
    Metrics m;
    const auto [lo, hi] = std::minmax_element(
        trace.records.begin(), trace.records.end(),
        [](const TraceRecord& a, const TraceRecord& b) { return a.output_power_dbm < b.output_power_dbm; });
    m.fluctuation_db = hi->output_power_dbm - lo->output_power_dbm;

    const double reference = dbm_to_mw(trace.records.front().output_power_dbm);
    double worst = 0.0;
    for (const auto& rec : trace.records) {
        worst = std::max(worst, std::abs(dbm_to_mw(rec.output_power_dbm) - reference) / reference);
    }
    m.max_percent_deviation = 100.0 * worst;

    if (trace.has_residual_phase) {
        double sum_sq = 0.0;
        for (const auto& rec : trace.records) {
            sum_sq += rec.residual_phase * rec.residual_phase;
        }
        m.residual_phase_rms = std::sqrt(sum_sq / static_cast<double>(trace.records.size()));

        if (trace.step_event_time) {
            const double step_at = *trace.step_event_time;
            std::optional<double> settled_at;
            for (const auto& rec : trace.records) {
                if (rec.t < step_at) {
                    continue;
                }
                if (std::abs(rec.residual_phase) > trace.settle_tolerance) {
                    settled_at.reset();
                } else if (!settled_at) {
                    settled_at = rec.t;
                }
            }
            m.settling_time =
                settled_at ? *settled_at - step_at : std::numeric_limits<double>::infinity();
        }
    }
    return m;
}

}  // namespace mzmbias

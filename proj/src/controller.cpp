#include "mzmbias/controller.hpp"

#include "mzmbias/errors.hpp"

#include <cmath>

namespace mzmbias {

namespace {

constexpr int kMaxGuardTrips = 8;

using Step = std::pair<ControllerState, ControlAction>;

Step fault(ControllerState state, std::string reason) {
    state.fsm_position = FsmPosition::Faulted;
    state.awaiting_read = false;
    state.fault_reason = reason;
    return {std::move(state), action::Fault{std::move(reason)}};
}

// Command a bias and park in the read position that will sample it.
Step command_bias(ControllerState state, const ControllerConfig& cfg, FsmPosition next, double volts) {
    state.fsm_position = next;
    state.awaiting_read = false;
    state.discards_remaining = cfg.settle_reads;
    return {std::move(state), action::SetBias{volts}};
}

bool is_read_position(FsmPosition p) {
    switch (p) {
        case FsmPosition::RefReadVg1:
        case FsmPosition::RefReadVg2:
        case FsmPosition::RefReadVg4:
        case FsmPosition::TrackReadVg5:
        case FsmPosition::TrackReadVg6:
        case FsmPosition::TrackReadHigh:
        case FsmPosition::ExReadBase:
        case FsmPosition::ExReadVg2:
            return true;
        default:
            return false;
    }
}

FsmPosition start_position(const ControllerConfig& cfg) {
    return cfg.mode == ControlMode::CotangentTracking ? FsmPosition::RefSetBase : FsmPosition::ExSetBase;
}

// Guard failure: retry the cycle that produced it until the trip budget is spent.
Step guard_trip(ControllerState state, const ControllerConfig& cfg, FsmPosition retry_from) {
    if (++state.guard_trips > kMaxGuardTrips) {
        return fault(std::move(state), "slope below singularity guard on consecutive cycles");
    }
    const FsmPosition read_pos =
        retry_from == FsmPosition::RefSetBase ? FsmPosition::RefReadVg1 : FsmPosition::TrackReadVg5;
    return command_bias(std::move(state), cfg, read_pos, state.base_bias);
}

// Outcome of one measurement cycle: either an in-tolerance cycle or a
// compensation step folded into the base bias.
Step finish_cycle(ControllerState state, const ControllerConfig& cfg, double magnitude, DriftDirection direction,
                  FsmPosition restart, FsmPosition restart_read) {
    state.last_direction = direction;
    ++state.cycles_completed;
    if (direction == DriftDirection::None) {
        state.iteration_count = 0;
        ++state.in_tolerance_streak;
        if (state.in_tolerance_streak == cfg.converged_cycles) {
            state.fsm_position = restart;
            state.awaiting_read = false;
            return {std::move(state), action::Done{true}};
        }
        return command_bias(std::move(state), cfg, restart_read, state.base_bias);
    }

    state.in_tolerance_streak = 0;
    if (++state.iteration_count > cfg.max_iterations) {
        return fault(std::move(state), "no convergence within max_iterations compensation cycles");
    }
    const double delta = compensation_voltage(cfg, magnitude, direction);
    state.base_bias += delta;
    // The compensation itself moves the bias to the new base, so the next
    // cycle can sample it directly.
    state.fsm_position = restart_read;
    state.awaiting_read = false;
    state.discards_remaining = cfg.settle_reads;
    const double bias = state.base_bias;
    return {std::move(state), action::ApplyCompensation{delta, bias}};
}

Step consume_reading(ControllerState state, const ControllerConfig& cfg, double reading) {
    const double dV = cfg.probe_step_dV;
    switch (state.fsm_position) {
        case FsmPosition::RefReadVg1:
            state.vg1 = reading;
            return command_bias(std::move(state), cfg, FsmPosition::RefReadVg2, state.base_bias + dV);

        case FsmPosition::RefReadVg2:
            state.vg2 = reading;
            state.d11 = slope(*state.vg2, *state.vg1, dV);
            return command_bias(std::move(state), cfg, FsmPosition::RefReadVg4, state.base_bias + 2.0 * dV);

        case FsmPosition::RefReadVg4: {
            state.vg4 = reading;
            state.d13 = slope(*state.vg4, *state.vg2, dV);
            state.d2 = second_derivative(*state.d11, *state.d13, dV);
            if (std::abs(*state.d11) < cfg.min_slope_guard) {
                return guard_trip(std::move(state), cfg, FsmPosition::RefSetBase);
            }
            state.guard_trips = 0;
            state.r1 = cotangent_ratio(*state.d11, *state.d2, cfg.min_slope_guard);
            return command_bias(std::move(state), cfg, FsmPosition::TrackReadVg5, state.base_bias);
        }

        case FsmPosition::TrackReadVg5:
            state.vg5 = reading;
            return command_bias(std::move(state), cfg, FsmPosition::TrackReadVg6, state.base_bias + dV);

        case FsmPosition::TrackReadVg6:
            state.vg6 = reading;
            state.d11 = slope(*state.vg6, *state.vg5, dV);
            return command_bias(std::move(state), cfg, FsmPosition::TrackReadHigh, state.base_bias + 2.0 * dV);

        case FsmPosition::TrackReadHigh: {
            state.vg4 = reading;
            state.d13 = slope(*state.vg4, *state.vg6, dV);
            state.d2 = second_derivative(*state.d11, *state.d13, dV);
            if (std::abs(*state.d11) < cfg.min_slope_guard) {
                return guard_trip(std::move(state), cfg, FsmPosition::TrackSetBase);
            }
            state.guard_trips = 0;
            state.r2 = cotangent_ratio(*state.d11, *state.d2, cfg.min_slope_guard);
            const DriftDirection direction = classify_drift(*state.r1, *state.r2, cfg.ratio_tolerance_epsR);
            return finish_cycle(std::move(state), cfg, std::abs(*state.r2 - *state.r1), direction,
                                FsmPosition::TrackSetBase, FsmPosition::TrackReadVg5);
        }

        case FsmPosition::ExReadBase:
            // First cycle stores Vg1; later cycles re-read the base as Vg3.
            if (state.vg1) {
                state.vg3 = reading;
            } else {
                state.vg1 = reading;
            }
            return command_bias(std::move(state), cfg, FsmPosition::ExReadVg2, state.base_bias + dV);

        case FsmPosition::ExReadVg2: {
            state.vg2 = reading;
            const double base_read = state.vg3 ? *state.vg3 : *state.vg1;
            const double d12 = slope(*state.vg2, base_read, dV);
            state.d12 = d12;
            DriftDirection direction = DriftDirection::None;
            if (std::abs(d12) > cfg.slope_tolerance_epsD) {
                // Positive slope beyond a minimum (or before a maximum) means
                // the extremum lies at lower bias.
                const bool extremum_below = (d12 > 0.0) == (cfg.extremum == ExtremumKind::Minimum);
                direction = extremum_below ? DriftDirection::Right : DriftDirection::Left;
            }
            return finish_cycle(std::move(state), cfg, std::abs(d12), direction, FsmPosition::ExSetBase,
                                FsmPosition::ExReadBase);
        }

        default:
            return fault(std::move(state), "reading delivered outside a read position");
    }
}

}  // namespace

void validate(const ControllerConfig& cfg) {
    if (!(cfg.probe_step_dV > 0.0) || !std::isfinite(cfg.probe_step_dV)) {
        throw ConfigError("probe_step_dV", "must be a finite value > 0");
    }
    if (!(cfg.ratio_tolerance_epsR > 0.0)) {
        throw ConfigError("ratio_tolerance_epsR", "must be > 0");
    }
    if (!(cfg.slope_tolerance_epsD > 0.0)) {
        throw ConfigError("slope_tolerance_epsD", "must be > 0");
    }
    if (!(cfg.min_slope_guard > 0.0)) {
        throw ConfigError("min_slope_guard", "must be > 0");
    }
    if (cfg.compensation_schedule.empty()) {
        throw ConfigError("compensation_schedule", "must contain at least one entry");
    }
    for (std::size_t i = 0; i < cfg.compensation_schedule.size(); ++i) {
        const auto& entry = cfg.compensation_schedule[i];
        const std::string where = "compensation_schedule[" + std::to_string(i) + "]";
        if (!(entry.step >= 0.0) || !std::isfinite(entry.step)) {
            throw ConfigError(where, "step must be a finite value >= 0");
        }
        if (!(entry.threshold >= 0.0)) {
            throw ConfigError(where, "threshold must be >= 0");
        }
        if (i > 0 && !(entry.threshold > cfg.compensation_schedule[i - 1].threshold)) {
            throw ConfigError(where, "thresholds must be strictly increasing");
        }
    }
    if (cfg.max_iterations < 1) {
        throw ConfigError("max_iterations", "must be >= 1");
    }
    if (cfg.settle_reads < 0) {
        throw ConfigError("settle_reads", "must be >= 0");
    }
    if (cfg.converged_cycles < 1) {
        throw ConfigError("converged_cycles", "must be >= 1");
    }
}

const char* to_string(FsmPosition position) {
    switch (position) {
        case FsmPosition::RefSetBase: return "ref_set_base";
        case FsmPosition::RefReadVg1: return "ref_read_vg1";
        case FsmPosition::RefReadVg2: return "ref_read_vg2";
        case FsmPosition::RefReadVg4: return "ref_read_vg4";
        case FsmPosition::TrackSetBase: return "track_set_base";
        case FsmPosition::TrackReadVg5: return "track_read_vg5";
        case FsmPosition::TrackReadVg6: return "track_read_vg6";
        case FsmPosition::TrackReadHigh: return "track_read_high";
        case FsmPosition::ExSetBase: return "ex_set_base";
        case FsmPosition::ExReadBase: return "ex_read_base";
        case FsmPosition::ExReadVg2: return "ex_read_vg2";
        case FsmPosition::Faulted: return "faulted";
    }
    return "unknown";
}

const char* to_string(DriftDirection direction) {
    switch (direction) {
        case DriftDirection::Left: return "left";
        case DriftDirection::Right: return "right";
        case DriftDirection::None: return "none";
    }
    return "unknown";
}

const char* action_tag(const ControlAction& a) {
    struct Visitor {
        const char* operator()(const action::SetBias&) const { return "set_bias"; }
        const char* operator()(const action::ReadMonitor&) const { return "read"; }
        const char* operator()(const action::ApplyCompensation&) const { return "compensate"; }
        const char* operator()(const action::Done&) const { return "done"; }
        const char* operator()(const action::Fault&) const { return "fault"; }
    };
    return std::visit(Visitor{}, a);
}

ControllerState initial_state(const ControllerConfig& cfg, double base_bias) {
    ControllerState state;
    state.fsm_position = start_position(cfg);
    state.base_bias = base_bias;
    return state;
}

double slope(double v_later, double v_earlier, double dV) {
    if (dV == 0.0) {
        throw DomainError("slope: probe step must be nonzero");
    }
    return (v_later - v_earlier) / dV;
}

double second_derivative(double d11, double d13, double dV) {
    if (dV == 0.0) {
        throw DomainError("second_derivative: probe step must be nonzero");
    }
    return (d13 - d11) / dV;
}

double cotangent_ratio(double d1, double d2, double guard) {
    if (!(std::abs(d1) >= guard)) {
        throw DomainError("cotangent_ratio: |d1| below singularity guard");
    }
    return d2 / d1;
}

DriftDirection classify_drift(double r1, double r2, double epsR) {
    if (r2 - r1 > epsR) {
        return DriftDirection::Left;
    }
    if (r1 - r2 > epsR) {
        return DriftDirection::Right;
    }
    return DriftDirection::None;
}

double compensation_voltage(const ControllerConfig& cfg, double magnitude, DriftDirection direction) {
    const auto& schedule = cfg.compensation_schedule;
    if (schedule.empty()) {
        throw ConfigError("compensation_schedule", "must contain at least one entry");
    }
    if (direction == DriftDirection::None) {
        return 0.0;
    }
    double step = schedule.back().step;
    for (const auto& entry : schedule) {
        if (entry.threshold >= magnitude) {
            step = entry.step;
            break;
        }
    }
    return direction == DriftDirection::Left ? step : -step;
}

std::pair<ControllerState, ControlAction> controller_step(ControllerState state, const ControllerConfig& cfg,
                                                          std::optional<double> latest_read) {
    if (state.fsm_position == FsmPosition::Faulted) {
        const std::string reason = state.fault_reason.empty() ? "controller faulted" : state.fault_reason;
        return {std::move(state), action::Fault{reason}};
    }
    if (latest_read.has_value() != state.awaiting_read) {
        return fault(std::move(state), latest_read ? "reading supplied without a ReadMonitor request"
                                                   : "requested reading was not supplied");
    }

    if (!state.awaiting_read) {
        switch (state.fsm_position) {
            case FsmPosition::RefSetBase:
                return command_bias(std::move(state), cfg, FsmPosition::RefReadVg1, state.base_bias);
            case FsmPosition::TrackSetBase:
                return command_bias(std::move(state), cfg, FsmPosition::TrackReadVg5, state.base_bias);
            case FsmPosition::ExSetBase:
                return command_bias(std::move(state), cfg, FsmPosition::ExReadBase, state.base_bias);
            default:
                if (!is_read_position(state.fsm_position)) {
                    return fault(std::move(state), "unreachable controller position");
                }
                state.awaiting_read = true;
                return {std::move(state), action::ReadMonitor{}};
        }
    }

    if (!std::isfinite(*latest_read)) {
        return fault(std::move(state), "non-finite monitor reading");
    }
    state.awaiting_read = false;
    if (state.discards_remaining > 0) {
        --state.discards_remaining;
        state.awaiting_read = true;
        return {std::move(state), action::ReadMonitor{}};
    }
    return consume_reading(std::move(state), cfg, *latest_read);
}

}  // namespace mzmbias

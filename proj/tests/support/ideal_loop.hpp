#pragma once

// Noiseless plant wrapped around the pure controller: reads are
// gain * tap * P(bias, drift) with no noise and no converters. Shared by the
// unit tests and the acceptance runner.

#include "mzmbias/controller.hpp"
#include "mzmbias/device_model.hpp"

#include <optional>
#include <variant>
#include <vector>

namespace mzmbias::testing {

struct IdealLoop {
    MzmParams mzm;
    ControllerConfig cfg;
    double read_scale = 0.2;  // detector gain * monitor fraction
    double drift = 0.0;
    double bias = 0.0;
    ControllerState state;
    std::optional<double> pending;

    IdealLoop(MzmParams m, ControllerConfig c, double initial_bias)
        : mzm(m), cfg(std::move(c)), bias(initial_bias), state(initial_state(cfg, initial_bias)) {}

    [[nodiscard]] double read() const { return read_scale * mzm_transmission(mzm, bias, drift); }

    /// Phase offset from the curve position at `reference_bias` with no drift.
    [[nodiscard]] double phase_error(double reference_bias) const {
        return operating_phase(mzm, bias, drift) - operating_phase(mzm, reference_bias, 0.0);
    }

    /// The base bias the controller currently holds, expressed the same way.
    [[nodiscard]] double base_phase_error(double reference_bias) const {
        return operating_phase(mzm, state.base_bias, drift) - operating_phase(mzm, reference_bias, 0.0);
    }

    ControlAction step() {
        auto [next, act] = controller_step(std::move(state), cfg, pending);
        state = std::move(next);
        pending.reset();
        if (const auto* s = std::get_if<action::SetBias>(&act)) {
            bias = s->volts;
        } else if (const auto* c = std::get_if<action::ApplyCompensation>(&act)) {
            bias = c->bias;
        } else if (std::holds_alternative<action::ReadMonitor>(act)) {
            pending = read();
        }
        return act;
    }

    /// Step until the first cycle-completing action (compensation or Done).
    ControlAction run_to_decision(int limit = 100000) {
        for (int i = 0; i < limit; ++i) {
            ControlAction a = step();
            if (std::holds_alternative<action::ApplyCompensation>(a) || std::holds_alternative<action::Done>(a) ||
                std::holds_alternative<action::Fault>(a)) {
                return a;
            }
        }
        return action::Fault{"no decision"};
    }

    /// Step until the reference ratio has been captured.
    void run_reference(int limit = 1000) {
        for (int i = 0; i < limit && !state.r1; ++i) step();
    }
};

}  // namespace mzmbias::testing

#pragma once

// Fixed-step closed/open-loop simulation of modulator, drift, monitoring
// chain and controller, plus the stability statistics derived from a trace.

#include "mzmbias/controller.hpp"
#include "mzmbias/device_model.hpp"
#include "mzmbias/drift_models.hpp"
#include "mzmbias/signal_chain.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mzmbias {

struct SimConfig {
    double duration = 3600.0;      ///< s
    double control_period = 0.1;   ///< s between controller actions
    double sample_period = 60.0;   ///< s between trace records
    std::uint64_t seed = 1;
    bool open_loop = false;
    double initial_bias = 1.9;          ///< V, requested through the DAC at t = 0
    double settle_tolerance = 0.05;     ///< rad, band used for settling_time
    /// Controller sees gain * P exactly: no detector noise, no ADC.
    bool ideal_reads = false;
};

void validate(const SimConfig& sim);

struct TraceRecord {
    double t = 0.0;
    double drift_phase = 0.0;
    double bias_voltage = 0.0;     ///< applied (DAC output)
    double output_power_dbm = 0.0; ///< link-side (through) power
    double monitor_voltage = 0.0;  ///< controller-visible read at this step
    /// Operating phase minus its value at t = 0, wrapped to (-pi, pi].
    double residual_phase = 0.0;
    std::optional<double> d11, d2, r;
    std::string last_action;       ///< empty in open loop
};

struct SimTrace {
    std::vector<TraceRecord> records;
    /// Time of the first StepEvent inside the run, if any.
    std::optional<double> step_event_time;
    double settle_tolerance = 0.05;
    /// False for traces read back from CSV, which carry no residual phase.
    bool has_residual_phase = true;
    bool faulted = false;
    std::optional<double> fault_time;
    std::string fault_reason;
};

/// Every action the controller emitted, with its time; lets callers compare
/// decision sequences between runs.
struct ActionLogEntry {
    double t = 0.0;
    ControlAction action;
    std::optional<DriftDirection> direction;  ///< set on cycle-completing actions
};

struct RunOutputs {
    SimTrace trace;
    std::vector<ActionLogEntry> actions;
};

/// Run the loop on the control grid t_k = k * control_period. Each step
/// evaluates the drift, the plant at the currently applied bias, and the read
/// chain; a ReadMonitor action samples that read and the controller receives
/// it on the next step. Bias commands take effect from the following step.
/// A controller Fault is recorded and the loop continues open-loop at the
/// controller's base bias.
[[nodiscard]] RunOutputs run_detailed(const DriftScenario& scenario, const MzmParams& mzm,
                                      const SignalChainConfig& chain, const ControllerConfig& ctrl,
                                      const SimConfig& sim);

[[nodiscard]] SimTrace run(const DriftScenario& scenario, const MzmParams& mzm, const SignalChainConfig& chain,
                           const ControllerConfig& ctrl, const SimConfig& sim);

struct Metrics {
    double fluctuation_db = 0.0;
    double max_percent_deviation = 0.0;
    /// Seconds from the step event until the residual phase stays inside the
    /// tolerance; empty without a step event, +inf if it never settles.
    std::optional<double> settling_time;
    /// Empty when the trace carries no phase information (parsed from CSV).
    std::optional<double> residual_phase_rms;
};

/// Throws DomainError on an empty trace.
[[nodiscard]] Metrics metrics(const SimTrace& trace);

}  // namespace mzmbias

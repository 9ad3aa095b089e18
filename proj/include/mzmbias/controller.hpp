#pragma once

// Composite slope / cotangent bias controller.
//
// The controller never touches the plant. Each call to controller_step
// consumes at most one monitor reading and emits exactly one action; the
// caller (simulation engine or a hardware shim) performs the action and, when
// the action was ReadMonitor, supplies the reading on the next call.
//
// CotangentTracking holds the operating point at the curve position where it
// started. A reference cycle probes base, base+dV and base+2dV (Vg1, Vg2,
// Vg4) and stores R1 = d2 / d11. Every later cycle repeats the probe (Vg5,
// Vg6 and a fresh base+2dV read kept in the vg4 slot) to obtain R2, compares
// it with R1 and folds a scheduled compensation step into the base bias.
//
// On a curve P ~ 1 + m cos(theta), theta = pi V / Vpi + phase, the ratio
// d2/d1 tends to (pi / Vpi) cot(theta): it is independent of optical power
// and detector gain, and it decreases as theta increases. R2 > R1 therefore
// means theta has fallen (operating point shifted left) and the bias must
// rise.
//
// ExtremumNulling holds a transmission extremum by probing base and base+dV
// (Vg1, then Vg3 on later cycles, and Vg2) and driving d12 towards zero.

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace mzmbias {

enum class ControlMode { CotangentTracking, ExtremumNulling };
enum class ExtremumKind { Minimum, Maximum };
enum class DriftDirection { Left, Right, None };

struct ScheduleEntry {
    double threshold = 0.0;  ///< upper edge of the |R2 - R1| (or |d12|) bucket
    double step = 0.0;       ///< compensation magnitude, V
};

struct ControllerConfig {
    double probe_step_dV = 0.02;
    ControlMode mode = ControlMode::CotangentTracking;
    double ratio_tolerance_epsR = 0.02;   ///< 1/V
    double slope_tolerance_epsD = 0.005;  ///< V/V
    double min_slope_guard = 1e-3;        ///< V/V; smaller |d11| makes R undefined
    std::vector<ScheduleEntry> compensation_schedule = {{0.05, 0.010}, {0.2, 0.025}, {1e300, 0.050}};
    int max_iterations = 1000;  ///< consecutive compensating cycles before Fault
    int settle_reads = 0;       ///< reads discarded after every bias change
    int converged_cycles = 2;   ///< consecutive in-tolerance cycles that declare Done
    ExtremumKind extremum = ExtremumKind::Minimum;
};

void validate(const ControllerConfig& cfg);

enum class FsmPosition {
    RefSetBase,
    RefReadVg1,
    RefReadVg2,
    RefReadVg4,
    TrackSetBase,
    TrackReadVg5,
    TrackReadVg6,
    TrackReadHigh,
    ExSetBase,
    ExReadBase,
    ExReadVg2,
    Faulted,
};

[[nodiscard]] const char* to_string(FsmPosition position);
[[nodiscard]] const char* to_string(DriftDirection direction);

struct ControllerState {
    FsmPosition fsm_position = FsmPosition::RefSetBase;
    double base_bias = 0.0;
    bool awaiting_read = false;
    int discards_remaining = 0;

    std::optional<double> vg1, vg2, vg3, vg4, vg5, vg6;
    std::optional<double> d11, d12, d13, d2, r1, r2;
    std::optional<DriftDirection> last_direction;

    int iteration_count = 0;
    int in_tolerance_streak = 0;
    int guard_trips = 0;
    long cycles_completed = 0;  ///< measurement cycles that reached a decision
    std::string fault_reason;
};

/// Fresh state positioned at the first flowchart node of the configured mode.
[[nodiscard]] ControllerState initial_state(const ControllerConfig& cfg, double base_bias);

namespace action {
struct SetBias {
    double volts = 0.0;
    bool operator==(const SetBias&) const = default;
};
struct ReadMonitor {
    bool operator==(const ReadMonitor&) const = default;
};
/// Base bias moved by `delta`; `bias` is the new base to apply.
struct ApplyCompensation {
    double delta = 0.0;
    double bias = 0.0;
    bool operator==(const ApplyCompensation&) const = default;
};
struct Done {
    bool converged = true;
    bool operator==(const Done&) const = default;
};
struct Fault {
    std::string reason;
    bool operator==(const Fault&) const = default;
};
}  // namespace action

using ControlAction =
    std::variant<action::SetBias, action::ReadMonitor, action::ApplyCompensation, action::Done, action::Fault>;

/// Short lowercase tag used in trace files.
[[nodiscard]] const char* action_tag(const ControlAction& a);

/// (later - earlier) / dV. Throws DomainError for dV == 0.
[[nodiscard]] double slope(double v_later, double v_earlier, double dV);

/// (d13 - d11) / dV. Throws DomainError for dV == 0.
[[nodiscard]] double second_derivative(double d11, double d13, double dV);

/// d2 / d1. Throws DomainError when |d1| < guard.
[[nodiscard]] double cotangent_ratio(double d1, double d2, double guard);

/// Left if r2 exceeds r1 by more than epsR, Right for the mirror case.
[[nodiscard]] DriftDirection classify_drift(double r1, double r2, double epsR);

/// Signed step from the first schedule bucket whose threshold covers
/// `magnitude` (the last bucket catches everything larger). Left raises the
/// bias, Right lowers it, None yields 0. Throws ConfigError on an empty
/// schedule.
[[nodiscard]] double compensation_voltage(const ControllerConfig& cfg, double magnitude, DriftDirection direction);

/// Advance the state machine by one action. Supplying a reading when none was
/// requested (or omitting a requested one) is a protocol violation and moves
/// the controller to the Faulted position.
[[nodiscard]] std::pair<ControllerState, ControlAction> controller_step(ControllerState state,
                                                                       const ControllerConfig& cfg,
                                                                       std::optional<double> latest_read);

}  // namespace mzmbias

#pragma once

// Sources of bias-phase drift in a lithium niobate modulator: the buffer-layer
// equivalent circuit, mobile-ion and photorefractive relaxation, thermo-optic
// index change, scripted events and residual random walk. Also hosts the
// graded-index waveguide descriptors used to reason about thermal
// sensitivity.

#include "mzmbias/random.hpp"

#include <cstdint>
#include <utility>
#include <variant>
#include <vector>

namespace mzmbias {

/// Buffer-layer / waveguide equivalent circuit. r1,c1 and r2,c2 are the
/// transverse and longitudinal buffer branches, r3,c3 the waveguide itself.
/// c1 is part of the circuit but drops out of the closed-form step response;
/// it is kept so a parsed circuit round-trips.
struct CircuitParams {
    double r1 = 1.0;
    double r2 = 1.0;
    double r3 = 1.0;
    double c1 = 0.0;
    double c2 = 1.0;
    double c3 = 0.0;
    double v0 = 1.0;  ///< applied step amplitude, V
};

/// Gaussian-diffused channel waveguide (index peak ns at the surface, substrate
/// nb, cladding nc above the surface).
struct WaveguideProfile {
    double cladding_index_nc = 1.0;
    double substrate_index_nb = 2.138;
    double surface_index_ns = 2.148;
    double depth_dx = 3.57e-6;
    double depth_dy = 2.0e-6;
    double wavenumber_k0 = 4.053667940115862e6;  // 2 pi / 1.55 um
};

enum class CrystalAxis { Extraordinary, Ordinary };

struct ThermalModel {
    double rel_dne_dT = 17.1e-6;  ///< (1/ne) dne/dT, 1/K
    double rel_dno_dT = 1.9e-6;   ///< (1/no) dno/dT, 1/K
    double base_index = 2.138;
    CrystalAxis axis = CrystalAxis::Extraordinary;
    double length_L = 0.0422;
    double wavelength_lambda0 = 1.55e-6;
};

void validate(const CircuitParams& p);
void validate(const WaveguideProfile& w);
void validate(const ThermalModel& m);

// --- equivalent circuit -----------------------------------------------------

/// R4 = r1 r3 / (r1 + r3).
[[nodiscard]] double effective_lateral_impedance(const CircuitParams& p);

/// tau = r2 R4 (c2 + 2 c3) / (2 r2 + R4).
[[nodiscard]] double relaxation_time(const CircuitParams& p);

/// Dimensionless coefficient of exp(-t/tau) in the step response,
/// 2 (c2 r2 - c3 R4) / ((2 r2 + R4)(c2 + 2 c3)). Zero when c2 + 2 c3 == 0.
[[nodiscard]] double transient_coefficient(const CircuitParams& p);

/// Voltage across the waveguide t seconds after a v0 step. With no
/// capacitance (tau = 0) only the steady-state term remains.
[[nodiscard]] double waveguide_voltage(const CircuitParams& p, double t);

/// v0 R4 / (2 r2 + R4).
[[nodiscard]] double steady_state_voltage(const CircuitParams& p);

// --- waveguide ----------------------------------------------------------------

/// n^2(x, y). The guided branch applies on the surface itself (y == 0).
[[nodiscard]] double index_profile(const WaveguideProfile& w, double x, double y);

struct NormalizedFrequency {
    double vx = 0.0;
    double vy = 0.0;
};

[[nodiscard]] NormalizedFrequency normalized_frequency(const WaveguideProfile& w);

/// b = (n_eff^2 - nb^2) / (ns^2 - nb^2).
[[nodiscard]] double normalized_propagation_constant(const WaveguideProfile& w, double n_eff);

// --- thermal ------------------------------------------------------------------

[[nodiscard]] double thermal_index_shift(const ThermalModel& m, double delta_T);

/// (2 pi / lambda0) * thermal_index_shift * L.
[[nodiscard]] double thermal_phase_drift(const ThermalModel& m, double delta_T);

// --- scenario -----------------------------------------------------------------

struct CircuitRelaxation {
    CircuitParams circuit;
    double coupling = 0.0;  ///< rad/V applied to the voltage deficit
};

struct IonLag {
    double target_phase = 0.0;
    double time_constant = 1.0;
};

struct Photorefractive {
    double amplitude = 0.0;
    double time_constant = 1.0;
};

struct TemperatureBreakpoint {
    double t = 0.0;        ///< s
    double delta_T = 0.0;  ///< K
};

/// Piecewise-linear temperature offset; held constant outside the breakpoints.
struct ThermalTrajectory {
    ThermalModel model;
    std::vector<TemperatureBreakpoint> offsets;
};

struct StepEvent {
    double at = 0.0;
    double jump = 0.0;
};

struct RandomWalk {
    double sigma = 0.0;  ///< rad / sqrt(s)
};

using DriftComponent =
    std::variant<CircuitRelaxation, IonLag, Photorefractive, ThermalTrajectory, StepEvent, RandomWalk>;

struct DriftScenario {
    double duration = 3600.0;
    std::vector<DriftComponent> components;
};

void validate(const DriftScenario& s);

/// Temperature offset of a trajectory at time t (linear interpolation).
[[nodiscard]] double temperature_offset(const ThermalTrajectory& trajectory, double t);

/// Phase contribution of a non-random component at time t. RandomWalk
/// contributes nothing here; use DriftEvaluator for it.
[[nodiscard]] double deterministic_phase(const DriftComponent& component, double t);

/// Stateful evaluation of a scenario within one simulation run.
///
/// Each RandomWalk component draws from its own stream, seeded from the run
/// seed and the component's index in the scenario. The walk advances by
/// N(0, sigma^2 dt) for every increase dt of the query time, so queries must
/// be issued at non-decreasing t; the walk is exactly reproducible for the
/// same seed and query sequence.
class DriftEvaluator {
public:
    DriftEvaluator(DriftScenario scenario, std::uint64_t seed);

    /// Total drift phase at t. Throws DomainError if t is outside
    /// [0, duration] or earlier than the previous query.
    double phase_at(double t);

    [[nodiscard]] const DriftScenario& scenario() const noexcept { return scenario_; }

private:
    struct WalkState {
        std::size_t component = 0;
        GaussianStream stream;
        double value = 0.0;
    };

    DriftScenario scenario_;
    std::vector<WalkState> walks_;
    double last_t_ = 0.0;
};

/// One-shot convenience: fresh evaluator, single query.
[[nodiscard]] double scenario_phase(const DriftScenario& s, double t, std::uint64_t seed);

}  // namespace mzmbias

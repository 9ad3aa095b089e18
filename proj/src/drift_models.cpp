#include "mzmbias/drift_models.hpp"

#include "mzmbias/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace mzmbias {

namespace {

void require_positive(double value, const std::string& field) {
    if (!(value > 0.0) || !std::isfinite(value)) {
        throw ConfigError(field, "must be a finite value > 0");
    }
}

void require_nonnegative(double value, const std::string& field) {
    if (!(value >= 0.0) || !std::isfinite(value)) {
        throw ConfigError(field, "must be a finite value >= 0");
    }
}

void require_finite(double value, const std::string& field) {
    if (!std::isfinite(value)) {
        throw ConfigError(field, "must be finite");
    }
}

}  // namespace

void validate(const CircuitParams& p) {
    require_positive(p.r1, "r1");
    require_positive(p.r2, "r2");
    require_positive(p.r3, "r3");
    require_nonnegative(p.c1, "c1");
    require_nonnegative(p.c2, "c2");
    require_nonnegative(p.c3, "c3");
    if (p.c2 == 0.0 && p.c3 == 0.0) {
        throw ConfigError("c2", "c2 and c3 must not both be zero");
    }
    require_finite(p.v0, "v0");
}

void validate(const WaveguideProfile& w) {
    require_positive(w.cladding_index_nc, "cladding_index_nc");
    require_positive(w.substrate_index_nb, "substrate_index_nb");
    require_positive(w.surface_index_ns, "surface_index_ns");
    if (!(w.surface_index_ns > w.substrate_index_nb)) {
        throw ConfigError("surface_index_ns", "must exceed substrate_index_nb");
    }
    require_positive(w.depth_dx, "depth_dx");
    require_positive(w.depth_dy, "depth_dy");
    require_positive(w.wavenumber_k0, "wavenumber_k0");
}

void validate(const ThermalModel& m) {
    require_positive(m.rel_dne_dT, "rel_dne_dT");
    require_positive(m.rel_dno_dT, "rel_dno_dT");
    require_positive(m.base_index, "base_index");
    require_positive(m.length_L, "length_L");
    require_positive(m.wavelength_lambda0, "wavelength_lambda0");
}

double effective_lateral_impedance(const CircuitParams& p) { return p.r1 * p.r3 / (p.r1 + p.r3); }

double relaxation_time(const CircuitParams& p) {
    const double r4 = effective_lateral_impedance(p);
    return p.r2 * r4 * (p.c2 + 2.0 * p.c3) / (2.0 * p.r2 + r4);
}

double transient_coefficient(const CircuitParams& p) {
    const double capacitance = p.c2 + 2.0 * p.c3;
    if (capacitance == 0.0) {
        return 0.0;
    }
    const double r4 = effective_lateral_impedance(p);
    return 2.0 * (p.c2 * p.r2 - p.c3 * r4) / ((2.0 * p.r2 + r4) * capacitance);
}

double steady_state_voltage(const CircuitParams& p) {
    const double r4 = effective_lateral_impedance(p);
    return p.v0 * r4 / (2.0 * p.r2 + r4);
}

double waveguide_voltage(const CircuitParams& p, double t) {
    if (!(t >= 0.0)) {
        throw DomainError("waveguide_voltage: t must be >= 0");
    }
    const double tau = relaxation_time(p);
    const double steady = steady_state_voltage(p);
    if (tau == 0.0) {
        return steady;
    }
    return steady + p.v0 * transient_coefficient(p) * std::exp(-t / tau);
}

double index_profile(const WaveguideProfile& w, double x, double y) {
    if (y < 0.0) {
        return w.cladding_index_nc * w.cladding_index_nc;
    }
    const double nb2 = w.substrate_index_nb * w.substrate_index_nb;
    const double ns2 = w.surface_index_ns * w.surface_index_ns;
    const double u = x / w.depth_dx;
    const double v = y / w.depth_dy;
    return nb2 + (ns2 - nb2) * std::exp(-u * u - v * v);
}

NormalizedFrequency normalized_frequency(const WaveguideProfile& w) {
    const double contrast = std::sqrt(w.surface_index_ns * w.surface_index_ns -
                                      w.substrate_index_nb * w.substrate_index_nb);
    return {w.wavenumber_k0 * w.depth_dx * contrast, w.wavenumber_k0 * w.depth_dy * contrast};
}

double normalized_propagation_constant(const WaveguideProfile& w, double n_eff) {
    const double nb2 = w.substrate_index_nb * w.substrate_index_nb;
    const double ns2 = w.surface_index_ns * w.surface_index_ns;
    return (n_eff * n_eff - nb2) / (ns2 - nb2);
}

double thermal_index_shift(const ThermalModel& m, double delta_T) {
    const double coefficient = m.axis == CrystalAxis::Extraordinary ? m.rel_dne_dT : m.rel_dno_dT;
    return m.base_index * coefficient * delta_T;
}

double thermal_phase_drift(const ThermalModel& m, double delta_T) {
    return 2.0 * std::numbers::pi / m.wavelength_lambda0 * thermal_index_shift(m, delta_T) * m.length_L;
}

void validate(const DriftScenario& s) {
    require_positive(s.duration, "drift.duration");
    for (std::size_t i = 0; i < s.components.size(); ++i) {
        const std::string prefix = "drift.components[" + std::to_string(i) + "].";
        std::visit(
            [&](const auto& c) {
                using T = std::decay_t<decltype(c)>;
                if constexpr (std::is_same_v<T, CircuitRelaxation>) {
                    try {
                        validate(c.circuit);
                    } catch (const ConfigError& e) {
                        throw ConfigError(prefix + "circuit." + e.field(), e.message());
                    }
                    require_finite(c.coupling, prefix + "coupling");
                } else if constexpr (std::is_same_v<T, IonLag>) {
                    require_finite(c.target_phase, prefix + "target_phase");
                    require_positive(c.time_constant, prefix + "time_constant");
                } else if constexpr (std::is_same_v<T, Photorefractive>) {
                    require_finite(c.amplitude, prefix + "amplitude");
                    require_positive(c.time_constant, prefix + "time_constant");
                } else if constexpr (std::is_same_v<T, ThermalTrajectory>) {
                    try {
                        validate(c.model);
                    } catch (const ConfigError& e) {
                        throw ConfigError(prefix + "model." + e.field(), e.message());
                    }
                    if (c.offsets.empty()) {
                        throw ConfigError(prefix + "temperature_offsets", "needs at least one breakpoint");
                    }
                    for (std::size_t k = 0; k < c.offsets.size(); ++k) {
                        const auto& bp = c.offsets[k];
                        const std::string where = prefix + "temperature_offsets[" + std::to_string(k) + "]";
                        require_finite(bp.delta_T, where);
                        if (!(bp.t >= 0.0 && bp.t <= s.duration)) {
                            throw ConfigError(where, "breakpoint time outside [0, duration]");
                        }
                        if (k > 0 && !(bp.t > c.offsets[k - 1].t)) {
                            throw ConfigError(where, "breakpoint times must be strictly increasing");
                        }
                    }
                } else if constexpr (std::is_same_v<T, StepEvent>) {
                    require_finite(c.at, prefix + "at");
                    require_finite(c.jump, prefix + "jump");
                } else if constexpr (std::is_same_v<T, RandomWalk>) {
                    require_nonnegative(c.sigma, prefix + "sigma");
                }
            },
            s.components[i]);
    }
}

double temperature_offset(const ThermalTrajectory& trajectory, double t) {
    const auto& bps = trajectory.offsets;
    if (bps.empty()) {
        return 0.0;
    }
    if (t <= bps.front().t) {
        return bps.front().delta_T;
    }
    if (t >= bps.back().t) {
        return bps.back().delta_T;
    }
    const auto upper = std::upper_bound(bps.begin(), bps.end(), t,
                                        [](double value, const TemperatureBreakpoint& bp) { return value < bp.t; });
    const auto lower = std::prev(upper);
    const double fraction = (t - lower->t) / (upper->t - lower->t);
    return lower->delta_T + fraction * (upper->delta_T - lower->delta_T);
}

double deterministic_phase(const DriftComponent& component, double t) {
    return std::visit(
        [t](const auto& c) -> double {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, CircuitRelaxation>) {
                return c.coupling * (steady_state_voltage(c.circuit) - waveguide_voltage(c.circuit, t));
            } else if constexpr (std::is_same_v<T, IonLag>) {
                return c.target_phase * (1.0 - std::exp(-t / c.time_constant));
            } else if constexpr (std::is_same_v<T, Photorefractive>) {
                return c.amplitude * (1.0 - std::exp(-t / c.time_constant));
            } else if constexpr (std::is_same_v<T, ThermalTrajectory>) {
                return thermal_phase_drift(c.model, temperature_offset(c, t));
            } else if constexpr (std::is_same_v<T, StepEvent>) {
                return t >= c.at ? c.jump : 0.0;
            } else {
                return 0.0;
            }
        },
        component);
}

DriftEvaluator::DriftEvaluator(DriftScenario scenario, std::uint64_t seed) : scenario_(std::move(scenario)) {
    for (std::size_t i = 0; i < scenario_.components.size(); ++i) {
        if (std::holds_alternative<RandomWalk>(scenario_.components[i])) {
            walks_.push_back(WalkState{i, GaussianStream(derive_seed(seed, 1000 + i)), 0.0});
        }
    }
}

double DriftEvaluator::phase_at(double t) {
    if (!(t >= 0.0 && t <= scenario_.duration)) {
        throw DomainError("scenario phase queried at t=" + std::to_string(t) + " outside [0, " +
                          std::to_string(scenario_.duration) + "]");
    }
    if (t < last_t_) {
        throw DomainError("scenario phase queries must be non-decreasing in t");
    }
    const double dt = t - last_t_;
    last_t_ = t;
    for (auto& walk : walks_) {
        const double sigma = std::get<RandomWalk>(scenario_.components[walk.component]).sigma;
        if (dt > 0.0 && sigma > 0.0) {
            walk.value += walk.stream.normal(sigma * std::sqrt(dt));
        }
    }

    double total = 0.0;
    std::size_t next_walk = 0;
    for (std::size_t i = 0; i < scenario_.components.size(); ++i) {
        if (next_walk < walks_.size() && walks_[next_walk].component == i) {
            total += walks_[next_walk].value;
            ++next_walk;
        } else {
            total += deterministic_phase(scenario_.components[i], t);
        }
    }
    return total;
}

double scenario_phase(const DriftScenario& s, double t, std::uint64_t seed) {
    DriftEvaluator evaluator(s, seed);
    return evaluator.phase_at(t);
}

}  // namespace mzmbias

#pragma once

// Electro-optic phase modulation and the Mach-Zehnder intensity transfer
// curve. All quantities are in base SI units except optical power, which is
// carried in milliwatts throughout the project.

namespace mzmbias {

/// Material and geometry constants of one phase-modulating arm.
struct ElectroOpticParams {
    double wavelength_lambda0 = 1.55e-6;   ///< m
    double bulk_index_n = 2.14;
    double eo_coefficient_r = 30.8e-12;    ///< m/V
    double overlap_gamma = 0.32;           ///< in (0, 1]
    double electrode_gap_g = 1.0e-5;       ///< m
    double interaction_length_L = 0.0422;  ///< m
};

/// Lumped transfer-curve description of a modulator.
struct MzmParams {
    double v_pi = 3.8;              ///< V
    double input_power = 1.0;       ///< mW
    double insertion_loss = 0.5;    ///< linear power ratio in (0, 1]
    double extinction_ratio = 100;  ///< linear max/min power ratio, >= 1
    double intrinsic_phase = 0.0;   ///< rad
};

/// Throws ConfigError naming the first field that violates its invariant.
void validate(const ElectroOpticParams& params);
void validate(const MzmParams& mzm);

/// Local index change -(1/2) n^3 r E under an applied field (V/m).
[[nodiscard]] double local_index_shift(const ElectroOpticParams& params, double applied_field);

/// Effective-index change of the guided mode for a voltage across the gap;
/// the field/mode overlap integral is collapsed to (overlap_gamma / gap) * V.
[[nodiscard]] double effective_index_shift(const ElectroOpticParams& params, double voltage);

/// Guided-mode phase change (rad) over the interaction length. Negative for
/// positive voltage.
[[nodiscard]] double phase_shift(const ElectroOpticParams& params, double voltage);

/// Voltage whose phase shift has magnitude pi.
[[nodiscard]] double half_wave_voltage(const ElectroOpticParams& params);

/// Modulation depth (ER - 1) / (ER + 1) of the raised-cosine curve.
[[nodiscard]] double modulation_depth(const MzmParams& mzm);

/// Operating phase theta = pi * V / v_pi + intrinsic_phase + drift_phase.
[[nodiscard]] double operating_phase(const MzmParams& mzm, double bias_voltage, double drift_phase);

/// Output power (mW) at the modulator port:
/// P = input_power * insertion_loss * (1 + m cos theta) / 2.
/// Decreasing in theta on (0, pi), so theta = pi/2 is the falling quadrature.
[[nodiscard]] double mzm_transmission(const MzmParams& mzm, double bias_voltage, double drift_phase);

/// 10 log10(P / 1 mW). Throws DomainError for P <= 0.
[[nodiscard]] double mw_to_dbm(double power_mw);
[[nodiscard]] double dbm_to_mw(double level_dbm);

}  // namespace mzmbias

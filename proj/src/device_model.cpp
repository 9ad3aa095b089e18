#include "mzmbias/device_model.hpp"

#include "mzmbias/errors.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace mzmbias {

namespace {

void require_positive(double value, const char* field) {
    if (!(value > 0.0) || !std::isfinite(value)) {
        throw ConfigError(field, "must be a finite value > 0");
    }
}

double cubed(double x) { return x * x * x; }

}  // namespace

void validate(const ElectroOpticParams& params) {
    require_positive(params.wavelength_lambda0, "wavelength_lambda0");
    require_positive(params.bulk_index_n, "bulk_index_n");
    require_positive(params.eo_coefficient_r, "eo_coefficient_r");
    require_positive(params.overlap_gamma, "overlap_gamma");
    require_positive(params.electrode_gap_g, "electrode_gap_g");
    require_positive(params.interaction_length_L, "interaction_length_L");
    if (params.overlap_gamma > 1.0) {
        throw ConfigError("overlap_gamma", "must not exceed 1");
    }
}

void validate(const MzmParams& mzm) {
    require_positive(mzm.v_pi, "v_pi");
    if (!(mzm.input_power >= 0.0) || !std::isfinite(mzm.input_power)) {
        throw ConfigError("input_power", "must be a finite value >= 0");
    }
    if (!(mzm.insertion_loss > 0.0 && mzm.insertion_loss <= 1.0)) {
        throw ConfigError("insertion_loss", "must lie in (0, 1]");
    }
    // An infinite extinction ratio is the ideal (m = 1) curve and is allowed.
    if (!(mzm.extinction_ratio >= 1.0)) {
        throw ConfigError("extinction_ratio", "must be >= 1");
    }
    if (!std::isfinite(mzm.intrinsic_phase)) {
        throw ConfigError("intrinsic_phase", "must be finite");
    }
}

double local_index_shift(const ElectroOpticParams& params, double applied_field) {
    return -0.5 * cubed(params.bulk_index_n) * params.eo_coefficient_r * applied_field;
}

double effective_index_shift(const ElectroOpticParams& params, double voltage) {
    return -0.5 * cubed(params.bulk_index_n) * params.eo_coefficient_r *
           (params.overlap_gamma / params.electrode_gap_g) * voltage;
}

double phase_shift(const ElectroOpticParams& params, double voltage) {
    return -(std::numbers::pi / params.wavelength_lambda0) * cubed(params.bulk_index_n) *
           params.eo_coefficient_r * (params.overlap_gamma / params.electrode_gap_g) * voltage *
           params.interaction_length_L;
}

double half_wave_voltage(const ElectroOpticParams& params) {
    return params.wavelength_lambda0 * params.electrode_gap_g /
           (cubed(params.bulk_index_n) * params.eo_coefficient_r * params.overlap_gamma *
            params.interaction_length_L);
}

double modulation_depth(const MzmParams& mzm) {
    if (std::isinf(mzm.extinction_ratio)) {
        return 1.0;
    }
    return (mzm.extinction_ratio - 1.0) / (mzm.extinction_ratio + 1.0);
}

double operating_phase(const MzmParams& mzm, double bias_voltage, double drift_phase) {
    return std::numbers::pi * bias_voltage / mzm.v_pi + mzm.intrinsic_phase + drift_phase;
}

double mzm_transmission(const MzmParams& mzm, double bias_voltage, double drift_phase) {
    const double theta = operating_phase(mzm, bias_voltage, drift_phase);
    const double depth = modulation_depth(mzm);
    return mzm.input_power * mzm.insertion_loss * 0.5 * (1.0 + depth * std::cos(theta));
}

double mw_to_dbm(double power_mw) {
    if (!(power_mw > 0.0)) {
        throw DomainError("mw_to_dbm: power must be > 0 mW, got " + std::to_string(power_mw));
    }
    return 10.0 * std::log10(power_mw);
}

double dbm_to_mw(double level_dbm) { return std::pow(10.0, level_dbm / 10.0); }

}  // namespace mzmbias

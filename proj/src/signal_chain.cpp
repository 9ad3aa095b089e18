#include "mzmbias/signal_chain.hpp"

#include "mzmbias/errors.hpp"

#include <algorithm>
#include <cmath>

namespace mzmbias {

namespace {

// Mid-tread quantizer over [lo, hi] with `levels` points including both ends.
double quantize(double v, double lo, double hi, double levels) {
    const double clamped = std::clamp(v, lo, hi);
    const double lsb = (hi - lo) / (levels - 1.0);
    const double index = std::min(std::round((clamped - lo) / lsb), levels - 1.0);
    return lo + index * lsb;
}

double level_count(int bits) { return std::ldexp(1.0, bits); }

}  // namespace

void validate(const SignalChainConfig& cfg) {
    if (!(cfg.tap_monitor_fraction > 0.0 && cfg.tap_monitor_fraction < 1.0)) {
        throw ConfigError("tap_monitor_fraction", "must lie in (0, 1)");
    }
    if (!(cfg.detector_gain > 0.0) || !std::isfinite(cfg.detector_gain)) {
        throw ConfigError("detector_gain", "must be a finite value > 0");
    }
    if (!(cfg.detector_noise_sigma >= 0.0) || !std::isfinite(cfg.detector_noise_sigma)) {
        throw ConfigError("detector_noise_sigma", "must be a finite value >= 0");
    }
    // 52 bits keeps every level index exactly representable.
    if (cfg.adc_bits < 1 || cfg.adc_bits > 52) {
        throw ConfigError("adc_bits", "must lie in [1, 52]");
    }
    if (!(cfg.adc_full_scale > 0.0) || !std::isfinite(cfg.adc_full_scale)) {
        throw ConfigError("adc_full_scale", "must be a finite value > 0");
    }
    if (cfg.dac_bits < 1 || cfg.dac_bits > 52) {
        throw ConfigError("dac_bits", "must lie in [1, 52]");
    }
    if (!std::isfinite(cfg.dac_min) || !std::isfinite(cfg.dac_max) || !(cfg.dac_min < cfg.dac_max)) {
        throw ConfigError("dac_max", "dac_min < dac_max required");
    }
}

TapOutputs tap(const SignalChainConfig& cfg, double power_mw) {
    const double monitor = cfg.tap_monitor_fraction * power_mw;
    return {power_mw - monitor, monitor};
}

double detect_ideal(const SignalChainConfig& cfg, double power_mw) { return cfg.detector_gain * power_mw; }

double detect(const SignalChainConfig& cfg, double power_mw, GaussianStream& rng) {
    const double clean = detect_ideal(cfg, power_mw);
    if (cfg.detector_noise_sigma == 0.0) {
        return clean;
    }
    return clean + rng.normal(cfg.detector_noise_sigma);
}

double adc_lsb(const SignalChainConfig& cfg) { return cfg.adc_full_scale / (level_count(cfg.adc_bits) - 1.0); }

double dac_lsb(const SignalChainConfig& cfg) {
    return (cfg.dac_max - cfg.dac_min) / (level_count(cfg.dac_bits) - 1.0);
}

double adc_read(const SignalChainConfig& cfg, double volts) {
    return quantize(volts, 0.0, cfg.adc_full_scale, level_count(cfg.adc_bits));
}

double dac_write(const SignalChainConfig& cfg, double volts) {
    return quantize(volts, cfg.dac_min, cfg.dac_max, level_count(cfg.dac_bits));
}

}  // namespace mzmbias

#pragma once

// Monitoring path: output tap coupler, photodetector + amplifier, and the
// converters between the controller and the analog world.

#include "mzmbias/random.hpp"

namespace mzmbias {

struct SignalChainConfig {
    double tap_monitor_fraction = 0.1;  ///< share routed to the monitor port
    double detector_gain = 2.0;         ///< V/mW
    double detector_noise_sigma = 0.0;  ///< V, Gaussian, per read
    int adc_bits = 12;
    double adc_full_scale = 5.0;        ///< V, range is [0, full scale]
    int dac_bits = 16;
    double dac_min = 0.0;
    double dac_max = 10.0;
};

void validate(const SignalChainConfig& cfg);

struct TapOutputs {
    double through = 0.0;  ///< mW to the link
    double monitor = 0.0;  ///< mW to the detector
};

/// Lossless split; monitor is computed first and through takes the remainder
/// so that through + monitor reproduces the input.
[[nodiscard]] TapOutputs tap(const SignalChainConfig& cfg, double power_mw);

/// gain * P + N(0, sigma). No rng draw is made when sigma is zero.
[[nodiscard]] double detect(const SignalChainConfig& cfg, double power_mw, GaussianStream& rng);

/// Noise-free detector response.
[[nodiscard]] double detect_ideal(const SignalChainConfig& cfg, double power_mw);

[[nodiscard]] double adc_lsb(const SignalChainConfig& cfg);
[[nodiscard]] double dac_lsb(const SignalChainConfig& cfg);

/// Clamp to [0, full scale] and round to the nearest of 2^bits levels.
[[nodiscard]] double adc_read(const SignalChainConfig& cfg, double volts);

/// Clamp to [dac_min, dac_max] and round to the nearest of 2^bits levels.
[[nodiscard]] double dac_write(const SignalChainConfig& cfg, double volts);

}  // namespace mzmbias

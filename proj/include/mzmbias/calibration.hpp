#pragma once

#include "mzmbias/scenario.hpp"

#include <vector>

namespace mzmbias {

struct SweepPoint {
    double requested_bias = 0.0;
    double applied_bias = 0.0;
    double read = 0.0;
};

struct CalibrationReport {
    double v_pi_estimate = 0.0;
    double quadrature_voltage = 0.0;  ///< first falling half-power crossing
    double extinction_ratio = 0.0;    ///< max read / min read
    double min_voltage = 0.0;         ///< centre of the lowest-read plateau
    double max_voltage = 0.0;         ///< centre of the highest-read plateau
    double sweep_step = 0.0;
    double dac_lsb = 0.0;
    std::vector<double> crossings;    ///< all half-power crossings, ascending
    std::vector<SweepPoint> sweep;
};

/// Sweep the bias over [0, 2 * nominal v_pi] with the scenario's drift
/// switched off, reading the monitor through the scenario's chain (noise
/// drawn from the scenario seed). Vpi is the mean spacing of consecutive
/// half-power crossings, each located by linear interpolation; adjacent
/// crossings of a raised cosine are exactly Vpi apart. Throws ConfigError if
/// the sweep does not span enough of the curve or the step is not positive.
[[nodiscard]] CalibrationReport calibrate(const Scenario& scenario, double sweep_step);

}  // namespace mzmbias

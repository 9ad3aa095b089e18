#include "mzmbias/calibration.hpp"

#include "mzmbias/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace mzmbias {

namespace {

// Centre of the contiguous run of samples equal to the extreme at `index`.
double plateau_centre(const std::vector<SweepPoint>& sweep, std::size_t index) {
    const double value = sweep[index].read;
    std::size_t lo = index;
    std::size_t hi = index;
    while (lo > 0 && sweep[lo - 1].read == value) {
        --lo;
    }
    while (hi + 1 < sweep.size() && sweep[hi + 1].read == value) {
        ++hi;
    }
    return 0.5 * (sweep[lo].applied_bias + sweep[hi].applied_bias);
}

}  // namespace

CalibrationReport calibrate(const Scenario& scenario, double sweep_step) {
    if (!(sweep_step > 0.0)) {
        throw ConfigError("step", "sweep step must be > 0");
    }
    const double span = 2.0 * scenario.mzm.v_pi;
    const auto count = static_cast<std::size_t>(std::floor(span / sweep_step + 1e-9)) + 1;
    if (count < 8) {
        throw ConfigError("step", "sweep step too coarse for the transfer curve");
    }

    CalibrationReport report;
    report.sweep_step = sweep_step;
    report.dac_lsb = dac_lsb(scenario.chain);
    report.sweep.reserve(count);

    GaussianStream rng(derive_seed(scenario.sim.seed, 2));
    for (std::size_t i = 0; i < count; ++i) {
        SweepPoint point;
        point.requested_bias = static_cast<double>(i) * sweep_step;
        point.applied_bias = dac_write(scenario.chain, point.requested_bias);
        const double power = mzm_transmission(scenario.mzm, point.applied_bias, 0.0);
        point.read = adc_read(scenario.chain, detect(scenario.chain, tap(scenario.chain, power).monitor, rng));
        report.sweep.push_back(point);
    }

    const auto by_read = [](const SweepPoint& a, const SweepPoint& b) { return a.read < b.read; };
    const auto min_it = std::min_element(report.sweep.begin(), report.sweep.end(), by_read);
    const auto max_it = std::max_element(report.sweep.begin(), report.sweep.end(), by_read);
    const double read_min = min_it->read;
    const double read_max = max_it->read;
    if (!(read_max > read_min)) {
        throw ConfigError("mzm", "flat transfer curve; nothing to calibrate");
    }
    report.min_voltage = plateau_centre(report.sweep, static_cast<std::size_t>(min_it - report.sweep.begin()));
    report.max_voltage = plateau_centre(report.sweep, static_cast<std::size_t>(max_it - report.sweep.begin()));
    report.extinction_ratio =
        read_min > 0.0 ? read_max / read_min : std::numeric_limits<double>::infinity();

    const double level = 0.5 * (read_max + read_min);
    std::optional<double> first_falling;
    for (std::size_t i = 1; i < report.sweep.size(); ++i) {
        const SweepPoint& a = report.sweep[i - 1];
        const SweepPoint& b = report.sweep[i];
        const double ea = a.read - level;
        const double eb = b.read - level;
        if ((ea > 0.0 && eb <= 0.0) || (ea < 0.0 && eb >= 0.0)) {
            const double fraction = ea / (ea - eb);
            const double crossing = a.applied_bias + fraction * (b.applied_bias - a.applied_bias);
            report.crossings.push_back(crossing);
            if (ea > 0.0 && !first_falling) {
                first_falling = crossing;
            }
        }
    }
    if (report.crossings.size() < 2) {
        throw ConfigError("mzm.v_pi", "sweep did not cross the half-power level twice");
    }
    report.v_pi_estimate =
        (report.crossings.back() - report.crossings.front()) / static_cast<double>(report.crossings.size() - 1);
    report.quadrature_voltage = first_falling ? *first_falling : report.crossings.front();
    return report;
}

}  // namespace mzmbias

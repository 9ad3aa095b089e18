#include "mzmbias/scenario.hpp"

#include "mzmbias/errors.hpp"

#include <json.hpp>

#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace mzmbias {

namespace {

using nlohmann::json;

// Reads the members of one JSON object, tracking which keys were consumed so
// that leftovers can be rejected.
class ObjectReader {
public:
    ObjectReader(const json& node, std::string path) : node_(node), path_(std::move(path)) {
        if (!node_.is_object()) {
            throw ConfigError(path_, "expected an object");
        }
    }

    [[nodiscard]] std::string where(const std::string& key) const {
        return path_.empty() ? key : path_ + "." + key;
    }

    [[nodiscard]] bool has(const std::string& key) const { return node_.contains(key); }

    const json& child(const std::string& key) {
        seen_.insert(key);
        const auto it = node_.find(key);
        if (it == node_.end()) {
            throw ConfigError(where(key), "missing required entry");
        }
        return *it;
    }

    void number(const std::string& key, double& out) {
        if (!has(key)) {
            return;
        }
        const json& v = child(key);
        if (!v.is_number()) {
            throw ConfigError(where(key), "expected a number");
        }
        out = v.get<double>();
    }

    double required_number(const std::string& key) {
        const json& v = child(key);
        if (!v.is_number()) {
            throw ConfigError(where(key), "expected a number");
        }
        return v.get<double>();
    }

    void integer(const std::string& key, int& out) {
        if (!has(key)) {
            return;
        }
        const json& v = child(key);
        if (!v.is_number_integer()) {
            throw ConfigError(where(key), "expected an integer");
        }
        out = v.get<int>();
    }

    void unsigned64(const std::string& key, std::uint64_t& out) {
        if (!has(key)) {
            return;
        }
        const json& v = child(key);
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
            throw ConfigError(where(key), "expected a non-negative integer");
        }
        out = v.get<std::uint64_t>();
    }

    void boolean(const std::string& key, bool& out) {
        if (!has(key)) {
            return;
        }
        const json& v = child(key);
        if (!v.is_boolean()) {
            throw ConfigError(where(key), "expected true or false");
        }
        out = v.get<bool>();
    }

    std::string string(const std::string& key) {
        const json& v = child(key);
        if (!v.is_string()) {
            throw ConfigError(where(key), "expected a string");
        }
        return v.get<std::string>();
    }

    void finish() const {
        for (const auto& item : node_.items()) {
            if (!seen_.count(item.key())) {
                throw ConfigError(where(item.key()), "unknown key");
            }
        }
    }

private:
    const json& node_;
    std::string path_;
    std::set<std::string> seen_;
};

ElectroOpticParams read_electro_optic(const json& node, const std::string& path) {
    ObjectReader r(node, path);
    ElectroOpticParams p;
    r.number("wavelength_lambda0", p.wavelength_lambda0);
    r.number("bulk_index_n", p.bulk_index_n);
    r.number("eo_coefficient_r", p.eo_coefficient_r);
    r.number("overlap_gamma", p.overlap_gamma);
    r.number("electrode_gap_g", p.electrode_gap_g);
    r.number("interaction_length_L", p.interaction_length_L);
    r.finish();
    validate_section(p, path);
    return p;
}

MzmParams read_mzm(const json& node) {
    ObjectReader r(node, "mzm");
    MzmParams m;
    if (r.has("v_pi") && r.has("electro_optic")) {
        throw ConfigError("mzm.v_pi", "give either v_pi or electro_optic, not both");
    }
    if (r.has("electro_optic")) {
        m.v_pi = half_wave_voltage(read_electro_optic(r.child("electro_optic"), "mzm.electro_optic"));
    }
    r.number("v_pi", m.v_pi);
    r.number("input_power", m.input_power);
    r.number("insertion_loss", m.insertion_loss);
    r.number("extinction_ratio", m.extinction_ratio);
    r.number("intrinsic_phase", m.intrinsic_phase);
    r.finish();
    validate_section(m, "mzm");
    return m;
}

CircuitParams read_circuit(const json& node, const std::string& path) {
    ObjectReader r(node, path);
    CircuitParams p;
    p.r1 = r.required_number("r1");
    p.r2 = r.required_number("r2");
    p.r3 = r.required_number("r3");
    r.number("c1", p.c1);
    p.c2 = r.required_number("c2");
    p.c3 = r.required_number("c3");
    p.v0 = r.required_number("v0");
    r.finish();
    return p;
}

ThermalModel read_thermal_model(const json& node, const std::string& path) {
    ObjectReader r(node, path);
    ThermalModel m;
    r.number("rel_dne_dT", m.rel_dne_dT);
    r.number("rel_dno_dT", m.rel_dno_dT);
    r.number("base_index", m.base_index);
    if (r.has("axis")) {
        const std::string axis = r.string("axis");
        if (axis == "extraordinary") {
            m.axis = CrystalAxis::Extraordinary;
        } else if (axis == "ordinary") {
            m.axis = CrystalAxis::Ordinary;
        } else {
            throw ConfigError(r.where("axis"), "expected \"extraordinary\" or \"ordinary\"");
        }
    }
    r.number("length_L", m.length_L);
    r.number("wavelength_lambda0", m.wavelength_lambda0);
    r.finish();
    return m;
}

std::vector<TemperatureBreakpoint> read_breakpoints(const json& node, const std::string& path) {
    if (!node.is_array()) {
        throw ConfigError(path, "expected an array of [t_s, delta_T_K] pairs");
    }
    std::vector<TemperatureBreakpoint> out;
    for (std::size_t i = 0; i < node.size(); ++i) {
        const json& pair = node[i];
        if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() || !pair[1].is_number()) {
            throw ConfigError(path + "[" + std::to_string(i) + "]", "expected [t_s, delta_T_K]");
        }
        out.push_back({pair[0].get<double>(), pair[1].get<double>()});
    }
    return out;
}

DriftComponent read_component(const json& node, const std::string& path) {
    ObjectReader r(node, path);
    const std::string type = r.string("type");
    DriftComponent component;
    if (type == "circuit_relaxation") {
        CircuitRelaxation c;
        c.circuit = read_circuit(r.child("circuit"), r.where("circuit"));
        c.coupling = r.required_number("coupling");
        component = c;
    } else if (type == "ion_lag") {
        IonLag c;
        c.target_phase = r.required_number("target_phase");
        c.time_constant = r.required_number("time_constant");
        component = c;
    } else if (type == "photorefractive") {
        Photorefractive c;
        c.amplitude = r.required_number("amplitude");
        c.time_constant = r.required_number("time_constant");
        component = c;
    } else if (type == "thermal") {
        ThermalTrajectory c;
        if (r.has("model")) {
            c.model = read_thermal_model(r.child("model"), r.where("model"));
        }
        c.offsets = read_breakpoints(r.child("temperature_offsets"), r.where("temperature_offsets"));
        component = c;
    } else if (type == "step") {
        StepEvent c;
        c.at = r.required_number("at");
        c.jump = r.required_number("jump");
        component = c;
    } else if (type == "random_walk") {
        RandomWalk c;
        c.sigma = r.required_number("sigma");
        component = c;
    } else {
        throw ConfigError(r.where("type"), "unknown drift component type \"" + type + "\"");
    }
    r.finish();
    return component;
}

DriftScenario read_drift(const json& node, double default_duration) {
    ObjectReader r(node, "drift");
    DriftScenario s;
    s.duration = default_duration;
    r.number("duration", s.duration);
    if (r.has("components")) {
        const json& list = r.child("components");
        if (!list.is_array()) {
            throw ConfigError("drift.components", "expected an array");
        }
        for (std::size_t i = 0; i < list.size(); ++i) {
            s.components.push_back(read_component(list[i], "drift.components[" + std::to_string(i) + "]"));
        }
    }
    r.finish();
    return s;
}

SignalChainConfig read_chain(const json& node) {
    ObjectReader r(node, "chain");
    SignalChainConfig c;
    r.number("tap_monitor_fraction", c.tap_monitor_fraction);
    r.number("detector_gain", c.detector_gain);
    r.number("detector_noise_sigma", c.detector_noise_sigma);
    r.integer("adc_bits", c.adc_bits);
    r.number("adc_full_scale", c.adc_full_scale);
    r.integer("dac_bits", c.dac_bits);
    r.number("dac_min", c.dac_min);
    r.number("dac_max", c.dac_max);
    r.finish();
    validate_section(c, "chain");
    return c;
}

std::vector<ScheduleEntry> read_schedule(const json& node, const std::string& path) {
    if (!node.is_array()) {
        throw ConfigError(path, "expected an array of [threshold, step_V] pairs");
    }
    std::vector<ScheduleEntry> out;
    for (std::size_t i = 0; i < node.size(); ++i) {
        const json& pair = node[i];
        if (!pair.is_array() || pair.size() != 2 || !pair[1].is_number() ||
            !(pair[0].is_number() || pair[0].is_null())) {
            throw ConfigError(path + "[" + std::to_string(i) + "]", "expected [threshold or null, step_V]");
        }
        // null marks the open-ended final bucket.
        const double threshold = pair[0].is_null() ? std::numeric_limits<double>::max() : pair[0].get<double>();
        out.push_back({threshold, pair[1].get<double>()});
    }
    return out;
}

ControllerConfig read_controller(const json& node) {
    ObjectReader r(node, "controller");
    ControllerConfig c;
    r.number("probe_step_dV", c.probe_step_dV);
    if (r.has("mode")) {
        const std::string mode = r.string("mode");
        if (mode == "cotangent_tracking") {
            c.mode = ControlMode::CotangentTracking;
        } else if (mode == "extremum_nulling") {
            c.mode = ControlMode::ExtremumNulling;
        } else {
            throw ConfigError("controller.mode", "expected \"cotangent_tracking\" or \"extremum_nulling\"");
        }
    }
    r.number("ratio_tolerance_epsR", c.ratio_tolerance_epsR);
    r.number("slope_tolerance_epsD", c.slope_tolerance_epsD);
    r.number("min_slope_guard", c.min_slope_guard);
    if (r.has("compensation_schedule")) {
        c.compensation_schedule = read_schedule(r.child("compensation_schedule"), "controller.compensation_schedule");
    }
    r.integer("max_iterations", c.max_iterations);
    r.integer("settle_reads", c.settle_reads);
    r.integer("converged_cycles", c.converged_cycles);
    if (r.has("extremum")) {
        const std::string kind = r.string("extremum");
        if (kind == "minimum") {
            c.extremum = ExtremumKind::Minimum;
        } else if (kind == "maximum") {
            c.extremum = ExtremumKind::Maximum;
        } else {
            throw ConfigError("controller.extremum", "expected \"minimum\" or \"maximum\"");
        }
    }
    r.finish();
    validate_section(c, "controller");
    return c;
}

SimConfig read_sim(const json& node) {
    ObjectReader r(node, "sim");
    SimConfig s;
    r.number("duration", s.duration);
    r.number("control_period", s.control_period);
    r.number("sample_period", s.sample_period);
    r.unsigned64("seed", s.seed);
    r.boolean("open_loop", s.open_loop);
    r.number("initial_bias", s.initial_bias);
    r.number("settle_tolerance", s.settle_tolerance);
    r.boolean("ideal_reads", s.ideal_reads);
    r.finish();
    validate_section(s, "sim");
    return s;
}

std::string line_and_column(const std::string& text, std::size_t byte) {
    std::size_t line = 1;
    std::size_t column = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            column = 1;
        } else {
            ++column;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

}  // namespace

void validate(const Scenario& scenario) {
    validate_section(scenario.mzm, "mzm");
    validate(scenario.drift);
    validate_section(scenario.chain, "chain");
    validate_section(scenario.controller, "controller");
    validate_section(scenario.sim, "sim");
    if (scenario.sim.duration > scenario.drift.duration) {
        throw ConfigError("sim.duration", "exceeds drift.duration");
    }
}

Scenario parse_scenario(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(line_and_column(text, e.byte == 0 ? 0 : e.byte - 1), "malformed JSON");
    }

    ObjectReader top(doc, "");
    Scenario s;
    if (top.has("description")) {
        s.description = top.string("description");
    }
    s.mzm = read_mzm(top.child("mzm"));
    s.sim = read_sim(top.child("sim"));
    s.drift = read_drift(top.child("drift"), s.sim.duration);
    s.chain = read_chain(top.child("chain"));
    s.controller = read_controller(top.child("controller"));
    top.finish();
    validate(s);
    return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open scenario file " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    if (in.bad()) {
        throw IoError("failed reading scenario file " + path.string());
    }
    return parse_scenario(buffer.str());
}

}  // namespace mzmbias

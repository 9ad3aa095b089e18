#include "mzmbias/trace_io.hpp"

#include "mzmbias/errors.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>
#include <unistd.h>

namespace mzmbias {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream stream(line);
    while (std::getline(stream, field, ',')) {
        fields.push_back(field);
    }
    if (!line.empty() && line.back() == ',') {
        fields.emplace_back();
    }
    return fields;
}

double parse_double(const std::string& text, std::size_t line, const char* column) {
    try {
        std::size_t used = 0;
        const double value = std::stod(text, &used);
        if (used != text.size()) {
            throw std::invalid_argument(text);
        }
        return value;
    } catch (const std::exception&) {
        throw ConfigError("line " + std::to_string(line) + ", column " + column, "not a number: \"" + text + "\"");
    }
}

std::optional<double> parse_optional(const std::string& text, std::size_t line, const char* column) {
    if (text.empty()) {
        return std::nullopt;
    }
    return parse_double(text, line, column);
}

void put_optional(std::ostream& out, const std::optional<double>& value) {
    if (value) {
        out << format_number(*value);
    }
}

}  // namespace

std::string format_number(double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof buffer, "%.9g", value);
    return buffer;
}

void write_trace_csv(const SimTrace& trace, std::ostream& out) {
    out << kTraceHeader << '\n';
    for (const auto& rec : trace.records) {
        out << format_number(rec.t) << ',' << format_number(rec.drift_phase) << ','
            << format_number(rec.bias_voltage) << ',' << format_number(rec.output_power_dbm) << ','
            << format_number(rec.monitor_voltage) << ',';
        put_optional(out, rec.d11);
        out << ',';
        put_optional(out, rec.d2);
        out << ',';
        put_optional(out, rec.r);
        out << ',' << rec.last_action << '\n';
    }
}

std::string trace_to_csv(const SimTrace& trace) {
    std::ostringstream out;
    write_trace_csv(trace, out);
    return out.str();
}

SimTrace parse_trace_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kTraceHeader) {
        throw ConfigError("line 1", "expected header " + std::string(kTraceHeader));
    }
    SimTrace trace;
    trace.has_residual_phase = false;
    std::size_t line_number = 1;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty()) {
            continue;
        }
        const auto fields = split_fields(line);
        if (fields.size() != 9) {
            throw ConfigError("line " + std::to_string(line_number), "expected 9 columns");
        }
        TraceRecord rec;
        rec.t = parse_double(fields[0], line_number, "t_s");
        rec.drift_phase = parse_double(fields[1], line_number, "drift_phase_rad");
        rec.bias_voltage = parse_double(fields[2], line_number, "bias_v");
        rec.output_power_dbm = parse_double(fields[3], line_number, "p_out_dbm");
        rec.monitor_voltage = parse_double(fields[4], line_number, "monitor_v");
        rec.d11 = parse_optional(fields[5], line_number, "d11");
        rec.d2 = parse_optional(fields[6], line_number, "d2");
        rec.r = parse_optional(fields[7], line_number, "r");
        rec.last_action = fields[8];
        if (rec.last_action == "fault" || rec.last_action == "open_loop") {
            trace.faulted = true;
            if (!trace.fault_time) {
                trace.fault_time = rec.t;
            }
        }
        trace.records.push_back(std::move(rec));
    }
    return trace;
}

SimTrace read_trace_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open trace file " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_trace_csv(buffer.str());
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::path temp = path;
    temp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(temp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw IoError("cannot create " + temp.string());
        }
        out << content;
        out.flush();
        if (!out) {
            throw IoError("failed writing " + temp.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(temp, path, ec);
    if (ec) {
        std::filesystem::remove(temp, ec);
        throw IoError("cannot move output into place at " + path.string());
    }
}

}  // namespace mzmbias

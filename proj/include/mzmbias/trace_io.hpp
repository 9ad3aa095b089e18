#pragma once

// CSV trace format:
//   t_s,drift_phase_rad,bias_v,p_out_dbm,monitor_v,d11,d2,r,action
// Floats use 9 significant digits; absent controller values are empty
// fields.

#include "mzmbias/sim_engine.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>

namespace mzmbias {

inline constexpr const char* kTraceHeader = "t_s,drift_phase_rad,bias_v,p_out_dbm,monitor_v,d11,d2,r,action";

/// printf("%.9g") rendering used for every float column.
[[nodiscard]] std::string format_number(double value);

void write_trace_csv(const SimTrace& trace, std::ostream& out);
[[nodiscard]] std::string trace_to_csv(const SimTrace& trace);

/// Parse a trace written by write_trace_csv. The result has no residual phase
/// information. Throws ConfigError on a malformed file, IoError if unreadable.
[[nodiscard]] SimTrace read_trace_csv(const std::filesystem::path& path);
[[nodiscard]] SimTrace parse_trace_csv(const std::string& text);

/// Write via a sibling temporary file and rename, so readers never observe a
/// partially written file. Throws IoError.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace mzmbias

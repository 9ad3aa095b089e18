#pragma once

// Implementations behind the command-line subcommands. Each returns the
// process exit code and writes human-readable output to the given streams.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>

namespace mzmbias {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitIo = 3;

struct SimulateOptions {
    std::filesystem::path scenario;
    std::filesystem::path out;
    std::optional<std::uint64_t> seed;
    bool open_loop = false;
};

struct CompareOptions {
    std::filesystem::path scenario;
    std::filesystem::path out_dir;
    std::optional<std::uint64_t> seed;
};

struct CalibrateOptions {
    std::filesystem::path scenario;
    double sweep_step = 0.01;
};

/// Writes the CSV trace and prints
/// `fluctuation_db=<x> max_percent_deviation=<y> faulted=<bool>`.
int cmd_simulate(const SimulateOptions& options, std::ostream& out, std::ostream& err);

/// Writes open_loop.csv, closed_loop.csv and summary.txt into out_dir.
int cmd_compare(const CompareOptions& options, std::ostream& out, std::ostream& err);

int cmd_calibrate(const CalibrateOptions& options, std::ostream& out, std::ostream& err);

/// Power statistics of an existing trace file.
int cmd_metrics(const std::filesystem::path& csv, std::ostream& out, std::ostream& err);

}  // namespace mzmbias

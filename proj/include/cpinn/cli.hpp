#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cpinn/trainer.hpp"

namespace cpinn::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDivergence = 2, kIo = 3 };

class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct RunConfig {
    TrainingConfig training;
    std::filesystem::path out_dir = "cpinn_out";
    bool emit_solution_grid = true;
    std::optional<Variant> compare;
    bool quiet = false;
    /// Config of the second variant in compare mode, after defaulting.
    std::optional<TrainingConfig> compare_training;
};

/// Parses the command line (argv[0] is the program name). Unset values take
/// the per-problem defaults; SPLAYER_SEED supplies the seed when --seed is
/// absent. Throws UsageError. Returns nullopt after printing --help.
std::optional<RunConfig> parse_args(const std::vector<std::string>& args, std::ostream& out);

/// Build identifier recorded in summary.json.
std::string version_string();

/// loss_history.csv: epoch,total,residual,boundary,lr
void write_loss_history(const std::vector<LossRecord>& records, const std::filesystem::path& path);
std::vector<LossRecord> read_loss_history(const std::filesystem::path& path);

/// solution.csv: x[,y],component,predicted,exact,abs_error
void write_solution(const SolutionTable& table, const std::filesystem::path& path);

/// comparison.csv: epoch,<variant a>,<variant b>, rows aligned on epoch.
void write_comparison(Variant a, const std::vector<LossRecord>& ra, Variant b, const std::vector<LossRecord>& rb,
                      const std::filesystem::path& path);

/// Writes loss_history.csv, summary.json, model.ckpt and (if enabled)
/// solution.csv into `dir`, creating it. Throws IoError.
void write_outputs(const TrainingConfig& config, const RunConfig& run, const TrainingResult& result,
                   const std::filesystem::path& dir);

/// Full command-line entry point; returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Keeps large per-epoch buffers in the heap instead of fresh mappings.
void tune_allocator();

} // namespace cpinn::cli

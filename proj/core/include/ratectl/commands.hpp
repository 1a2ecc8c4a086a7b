#pragma once

#include <iosfwd>
#include <string>

#include "ratectl/config.hpp"

namespace ratectl {

// CLI exit codes. Parse errors from the argument parser use its own codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitOracleFailure = 3;
inline constexpr int kExitRuntimeError = 4;

// Runs the simulator oracle suite and prints one line per check. Returns
// kExitOracleFailure if any check misses its tolerance.
int cmd_validate_sim(const RunConfig& config, std::ostream& out);

// Trains one controller per train.seeds entry; writes the resolved config,
// per-seed learning-curve CSVs, the across-seed mean curve, and checkpoints
// under out_dir. With config.resume, continues from existing checkpoints and
// appends to the curve files.
int cmd_train(const RunConfig& config, std::ostream& out);

// Evaluates a policy (agent checkpoint, or fixed rates via `static_rates`
// as comma-separated values) over eval.n_seeds long runs with exploration
// off. Writes per-seed and aggregated window CSVs plus summary.csv.
int cmd_eval(const RunConfig& config, const std::string& checkpoint,
             const std::string& static_rates, std::ostream& out);

// Lambda sweep (default) or slot-length sweep when sweep.slot_lens is
// non-empty. Writes sweep.csv and prints the selected lambda, or per-T window
// series and their short-term dispersion.
int cmd_sweep(const RunConfig& config, std::ostream& out);

}  // namespace ratectl

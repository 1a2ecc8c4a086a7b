#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ratectl/ddpg.hpp"
#include "ratectl/env.hpp"
#include "ratectl/evaluation.hpp"
#include "ratectl/tandem_sim.hpp"

namespace ratectl {

// Raised for malformed or inconsistent configuration; the CLI maps it to its
// own exit code.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct TrainSection {
    int episodes = 150;
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4};
};

struct SweepSection {
    std::vector<double> lambdas = {8, 10, 12, 14, 16};
    std::vector<std::uint64_t> seeds = {1, 2};
    std::vector<double> slot_lens;  // non-empty switches cmd_sweep to a slot-length sweep
    int episodes = 0;               // 0: fall back to train.episodes
};

// The resolved experiment description. Defaults reproduce the reference
// setup: a 3-stage chain with c = [3, 5, 2], Gamma traffic at rate 0.95 with
// SCV 0.7, Gamma unit work with SCV 0.8, d_ub = 10, eps_ub = 0.1, T = 30.
struct RunConfig {
    NetworkConfig network;
    QosSpec qos;
    EpisodeConfig episode;
    AgentConfig agent;
    int q_max = 1024;
    TrainSection train;
    EvalConfig eval;
    SweepSection sweep;
    std::uint64_t master_seed = 1;
    std::string out_dir = "runs/out";
    bool resume = false;
    bool use_running_arrival_estimate = false;
    int n_threads = 0;  // 0: hardware concurrency

    void validate() const;
};

RunConfig default_run_config();

// Parses a JSON config; absent fields keep their defaults, unknown keys are
// rejected. Throws ConfigError.
RunConfig load_run_config(const std::string& path);
RunConfig parse_run_config(const std::string& json_text);

// Serializes every field, defaults included, so a run directory always
// carries the exact configuration it was produced with.
std::string run_config_to_json(const RunConfig& config);
void save_run_config(const RunConfig& config, const std::string& path);

struct CliOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<int> episodes;
    std::optional<std::string> out_dir;
    bool resume = false;
};

void apply_overrides(RunConfig& config, const CliOverrides& overrides);

}  // namespace ratectl

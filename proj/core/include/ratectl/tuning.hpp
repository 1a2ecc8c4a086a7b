#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ratectl/ddpg.hpp"
#include "ratectl/evaluation.hpp"

namespace ratectl {

// Everything needed to train one controller.
struct TrainSpec {
    NetworkConfig network;
    QosSpec qos;
    EpisodeConfig episode;
    AgentConfig agent;
    int q_max = 1024;
    int episodes = 300;
    std::uint64_t seed = 1;  // run seed; env and agent sub-streams derive from it
};

struct TrainOutcome {
    std::vector<EpisodeRecord> curve;
    DdpgAgent agent;
};

TrainOutcome train_controller(const TrainSpec& spec);

// One sweep cell: a (lambda, seed) training run plus its long-horizon
// evaluation. CIs are batch-means half-widths over evaluation windows.
struct SweepCell {
    double lambda_tradeoff = 0.0;
    std::uint64_t seed = 0;
    double violation_prob = 0.0;
    double violation_ci = 0.0;
    double avg_sum_rate = 0.0;
    double sum_rate_ci = 0.0;
    std::string checkpoint_path;
};

struct SweepResult {
    std::vector<SweepCell> rows;
};

struct SweepOptions {
    std::vector<double> lambdas;
    std::vector<std::uint64_t> seeds;
    EvalConfig eval;
    std::uint64_t master_seed = 1;
    std::string checkpoint_dir;  // empty: checkpoints are not persisted
    int n_threads = 0;           // 0: hardware concurrency
};

// Trains one controller per (lambda, seed) cell, evaluates each with
// exploration off, and returns every cell. Evaluation seeds are shared across
// lambda values so the comparison is paired. Cells run in parallel.
SweepResult lambda_sweep(const TrainSpec& base, const SweepOptions& options);

// Per-lambda aggregation across seeds.
struct LambdaAggregate {
    double lambda_tradeoff = 0.0;
    double violation_prob = 0.0;
    double violation_ci = 0.0;  // across-seed SE half-width, or the single cell's CI
    double avg_sum_rate = 0.0;
    double sum_rate_ci = 0.0;
    int n_seeds = 0;
};

std::vector<LambdaAggregate> aggregate_sweep(const SweepResult& result);

struct LambdaSelection {
    double lambda_star = 0.0;
    bool constraint_met_on_grid = false;
    std::vector<LambdaAggregate> table;
};

// Smallest average sum-rate among lambdas whose violation probability is
// within eps_ub + CI; falls back to the violation closest to eps_ub when the
// whole grid misses, with the flag cleared. Ties resolve toward smaller
// lambda. Row order does not matter.
LambdaSelection select_lambda(const SweepResult& result, double eps_ub);

// Exact CSV schema: lambda,seed,violation_prob,ci,sum_rate,ci,checkpoint_path
void write_sweep_csv(const SweepResult& result, const std::string& path);
SweepResult parse_sweep_csv(const std::string& path);

struct StageRelaxation {
    int stage = 0;
    double lambda_per_server = 0.0;
    double at_mu_min = 0.0;
    double at_mu_mid = 0.0;
    double at_mu_max = 0.0;
};

struct SlotLengthAdvisory {
    double d_ub = 0.0;
    std::vector<double> recommended_slot_lens;  // {1.5, 3, 10} * d_ub
    std::vector<StageRelaxation> relaxation;
};

// Advisory only: relaxation times across the action range plus a slot-length
// grid anchored on the delay bound. Every recommendation satisfies T > d_ub.
SlotLengthAdvisory slot_length_advisor(const QosSpec& qos, const NetworkConfig& network);

std::string format_advisory(const SlotLengthAdvisory& advisory);

// Spearman rank correlation with average ranks on ties.
double rank_correlation(std::span<const double> x, std::span<const double> y);

}  // namespace ratectl

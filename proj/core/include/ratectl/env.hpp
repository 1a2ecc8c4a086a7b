#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "ratectl/tandem_sim.hpp"

namespace ratectl {

// Delay bound, violation budget, and the reward trade-off. beta1/beta2 are
// the sub-rewards handed to each eligible arrival: beta1 when the job met the
// bound, beta2 when it missed it.
struct QosSpec {
    double d_ub = 10.0;
    double eps_ub = 0.1;
    double lambda_tradeoff = 14.0;
    double slot_len = 30.0;
    double arrival_rate = 0.95;

    double beta1() const { return eps_ub * lambda_tradeoff; }
    double beta2() const { return -(1.0 - eps_ub) * lambda_tradeoff; }
    double expected_arrivals_per_slot() const { return arrival_rate * slot_len; }

    void validate() const;
};

struct EpisodeConfig {
    double delay_max = 100.0;         // terminate when an observed delay exceeds this
    double episode_duration = 2000.0; // wall-clock interval per episode

    int max_steps(double slot_len) const {
        return static_cast<int>(episode_duration / slot_len);
    }
    void validate(const QosSpec& qos) const;
};

// Queue lengths clipped at q_max. Only the observation is truncated; the
// simulator's queues are unbounded.
struct SlotObservation {
    std::vector<int> queue_lengths;
    int q_max = 1024;
};

// Maps a raw network output in [-1, 1]^N onto [mu_min, mu_max] per stage.
// Out-of-range raw values are clamped first.
std::vector<double> scale_action(std::span<const double> raw, const NetworkConfig& config);

// Slot reward: mean sub-reward over the eligible arrivals, normalized by the
// expected arrivals per slot, minus the sum service rate. Censored jobs count
// as violations.
double compute_reward(const SlotOutcome& outcome, const QosSpec& qos, double expected_arrivals);
double compute_reward(const SlotOutcome& outcome, const QosSpec& qos);

struct SlotInfo {
    int n_arrivals = 0;
    int n_eligible = 0;    // |A_t|
    int n_violations = 0;  // censored + delays at or above d_ub
    double sum_rate = 0.0;
    SlotOutcome outcome;   // full outcome for metrics ingestion
};

struct StepResult {
    SlotObservation observation;
    double reward = 0.0;
    bool terminated = false;  // delay exceeded delay_max: a true terminal state
    bool truncated = false;   // step budget exhausted: bootstrap from s'
    SlotInfo info;

    bool done() const { return terminated || truncated; }
};

// The slotted decision process around the tandem simulator. One instance per
// training run; resets derive a fresh simulator sub-seed per episode so two
// envs with equal master seeds replay identically under equal actions.
class TandemEnv {
public:
    TandemEnv(NetworkConfig network, QosSpec qos, EpisodeConfig episode, int q_max,
              std::uint64_t master_seed);

    int n_stages() const { return network_.n_stages(); }
    int q_max() const { return q_max_; }
    const NetworkConfig& network() const { return network_; }
    const QosSpec& qos() const { return qos_; }
    const EpisodeConfig& episode_config() const { return episode_; }
    int max_steps() const { return episode_.max_steps(qos_.slot_len); }

    // Estimate E[n_a] from observed arrivals instead of lambda_a * T.
    void use_running_arrival_estimate(bool enabled) { running_estimate_ = enabled; }

    SlotObservation reset();
    // Throws std::logic_error when called on a finished or unstarted episode.
    StepResult step(std::span<const double> raw_action);

    // Advances the per-episode seed sequence without running anything, so a
    // resumed run draws the same episode seeds it would have seen originally.
    void fast_forward_episodes(int episodes) { episode_counter_ = episodes; }

    bool episode_active() const { return episode_active_; }
    int episodes_started() const { return episode_counter_; }
    const TandemSimulator& simulator() const { return *sim_; }

private:
    SlotObservation observe() const;

    NetworkConfig network_;
    QosSpec qos_;
    EpisodeConfig episode_;
    int q_max_;
    std::uint64_t master_seed_;

    std::unique_ptr<TandemSimulator> sim_;
    bool episode_active_ = false;
    int episode_counter_ = 0;
    int step_count_ = 0;

    bool running_estimate_ = false;
    std::uint64_t seen_arrivals_ = 0;
    std::uint64_t seen_slots_ = 0;
};

}  // namespace ratectl

#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ratectl/env.hpp"
#include "ratectl/mlp.hpp"
#include "ratectl/rng.hpp"

namespace ratectl {

// One stored experience. States are the raw (truncated) queue-length
// observations; actions are the raw network outputs in [-1, 1]. `terminal` is
// true only for delay-driven terminations; step-budget truncations still
// bootstrap from the next state.
struct Transition {
    std::vector<double> state;
    std::vector<double> action;
    double reward = 0.0;
    std::vector<double> next_state;
    bool terminal = false;
};

// Lightweight view into the buffer's flat storage.
struct TransitionView {
    std::span<const double> state;
    std::span<const double> action;
    double reward;
    std::span<const double> next_state;
    bool terminal;
};

// Ring buffer with FIFO eviction and uniform without-replacement batches.
class ReplayBuffer {
public:
    ReplayBuffer(std::size_t capacity, int state_dim, int action_dim);

    std::size_t capacity() const { return capacity_; }
    std::size_t size() const { return size_; }

    void remember(const Transition& t);
    TransitionView view(std::size_t index) const;

    // Uniform batch of distinct indices; throws std::logic_error when fewer
    // than batch_size transitions are stored.
    std::vector<std::size_t> sample_indices(std::size_t batch_size, RngStream& rng) const;

private:
    std::size_t capacity_;
    int state_dim_;
    int action_dim_;
    std::size_t size_ = 0;
    std::size_t head_ = 0;  // next write position once full
    std::vector<double> states_;
    std::vector<double> actions_;
    std::vector<double> rewards_;
    std::vector<double> next_states_;
    std::vector<std::uint8_t> terminals_;
};

struct OuConfig {
    double theta = 0.15;
    double mu = 0.0;
    double sigma_initial = 0.5;
    double sigma_final = 0.005;
};

// Discrete Ornstein-Uhlenbeck recursion with unit step:
// x <- x + theta * (mu - x) + sigma * xi, xi ~ N(0, 1) per component.
class OuNoise {
public:
    OuNoise(int dim, OuConfig config);

    void reset();
    void set_sigma(double sigma) { sigma_ = sigma; }
    double sigma() const { return sigma_; }
    const OuConfig& config() const { return config_; }

    std::span<const double> step(RngStream& rng);
    std::span<const double> value() const { return x_; }
    void set_state(std::span<const double> x);

private:
    OuConfig config_;
    double sigma_;
    std::vector<double> x_;
};

// Exploration scale after `step` of `planned_steps` environment steps:
// linear from sigma_initial to sigma_final over the first `decay_fraction`
// of the run, clamped at sigma_final afterwards.
double ou_sigma_schedule(const OuConfig& config, std::int64_t step, std::int64_t planned_steps,
                         double decay_fraction);

struct AgentConfig {
    double gamma = 0.99;
    double tau = 1e-2;
    int batch_size = 128;
    double actor_lr = 1e-4;
    double critic_lr = 1e-3;
    std::size_t buffer_capacity = 1'000'000;
    int warmup_transitions = 1000;
    std::vector<int> hidden_sizes = {64, 64};
    OuConfig ou;
    double sigma_decay_fraction = 0.8;

    void validate() const;
};

// Anything that can stand in for Q(s, a) during an actor update. The trained
// critic is the production implementation; analytic stand-ins plug into the
// same ascent path in tests.
class ActionValueFn {
public:
    virtual ~ActionValueFn() = default;
    // Returns Q(s, a) and writes dQ/da into action_grad.
    virtual double value_and_action_grad(std::span<const double> state,
                                         std::span<const double> action,
                                         std::span<double> action_grad) const = 0;
};

struct TrainStepDiag {
    double critic_loss = 0.0;      // mean squared TD error over the batch
    double actor_objective = 0.0;  // mean Q(s, mu(s)) before the update
};

// Deterministic-policy learner: actor/critic with slowly tracking targets,
// replay, and OU action noise. States are normalized by q_max at the network
// boundary; everything outside speaks raw observations.
class DdpgAgent {
public:
    DdpgAgent(int obs_dim, int action_dim, int q_max, AgentConfig config, std::uint64_t seed);

    int obs_dim() const { return obs_dim_; }
    int action_dim() const { return action_dim_; }
    const AgentConfig& config() const { return config_; }

    std::vector<double> act(const SlotObservation& obs, bool explore);
    std::vector<double> act_deterministic(std::span<const double> raw_obs) const;

    void reset_noise() { noise_.reset(); }
    void set_noise_sigma(double sigma) { noise_.set_sigma(sigma); }
    double noise_sigma() const { return noise_.sigma(); }

    ReplayBuffer& buffer() { return buffer_; }
    const ReplayBuffer& buffer() const { return buffer_; }
    void remember(const Transition& t) { buffer_.remember(t); }
    bool ready_to_train() const;

    // One critic descent step, one actor ascent step, one target soft update.
    TrainStepDiag train_step();
    TrainStepDiag train_step_on(std::span<const std::size_t> batch_indices);

    // Actor ascent along dQ/da backpropagated through the policy, averaged
    // over the given normalized states. Returns the mean Q before the step.
    double actor_ascent_step(std::span<const std::vector<double>> normalized_states,
                             const ActionValueFn& q);

    const Mlp& actor() const { return actor_; }
    const Mlp& critic() const { return critic_; }
    const Mlp& actor_target() const { return actor_target_; }
    const Mlp& critic_target() const { return critic_target_; }
    Mlp& mutable_actor_target() { return actor_target_; }
    Mlp& mutable_critic_target() { return critic_target_; }

    std::int64_t env_steps() const { return env_steps_; }
    void set_env_steps(std::int64_t steps) { env_steps_ = steps; }
    int episodes_done() const { return episodes_done_; }
    void set_episodes_done(int episodes) { episodes_done_ = episodes; }

    void save(std::ostream& out) const;
    void save(const std::string& path) const;
    static DdpgAgent load(std::istream& in, AgentConfig config, std::uint64_t seed);
    static DdpgAgent load(const std::string& path, AgentConfig config, std::uint64_t seed);

    void normalize_obs(std::span<const double> raw, std::span<double> out) const;

private:
    friend std::vector<struct EpisodeRecord> train_loop(TandemEnv&, DdpgAgent&, int,
                                                        const struct TrainHooks&);

    int obs_dim_;
    int action_dim_;
    int q_max_;
    AgentConfig config_;

    Mlp actor_;
    Mlp critic_;
    Mlp actor_target_;
    Mlp critic_target_;
    AdamOptimizer actor_opt_;
    AdamOptimizer critic_opt_;

    OuNoise noise_;
    ReplayBuffer buffer_;
    RngStream sample_rng_;
    RngStream noise_rng_;

    std::int64_t env_steps_ = 0;
    int episodes_done_ = 0;
};

struct EpisodeRecord {
    int episode = 0;
    int steps = 0;
    std::int64_t env_steps_cum = 0;
    double violation_prob = 0.0;  // violations / eligible arrivals in the episode
    int n_eligible = 0;
    double mean_sum_rate = 0.0;
    double mean_reward = 0.0;
    double mean_critic_loss = 0.0;
    double sigma = 0.0;
    bool terminated_early = false;
};

struct TrainHooks {
    std::function<void(const EpisodeRecord&)> on_episode;
    // Planned env steps for the sigma schedule; 0 means episodes * max_steps.
    std::int64_t planned_env_steps = 0;
};

// act -> step -> remember -> train once per env step (after warmup), with the
// OU sigma decayed across the run. Returns one record per episode.
std::vector<EpisodeRecord> train_loop(TandemEnv& env, DdpgAgent& agent, int episodes,
                                      const TrainHooks& hooks = {});

}  // namespace ratectl

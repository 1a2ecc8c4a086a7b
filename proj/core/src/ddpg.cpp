#include "ratectl/ddpg.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace ratectl {

namespace {

constexpr char kAgentMagic[8] = {'R', 'C', 'T', 'L', 'A', 'G', 'T', '\0'};
constexpr std::uint32_t kAgentVersion = 1;

template <typename T>
void write_pod(std::ostream& out, const T& value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) throw std::runtime_error("agent checkpoint truncated");
    return value;
}

void write_doubles(std::ostream& out, std::span<const double> values) {
    write_pod(out, static_cast<std::uint64_t>(values.size()));
    out.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size() * sizeof(double)));
}

std::vector<double> read_doubles(std::istream& in) {
    const auto n = read_pod<std::uint64_t>(in);
    std::vector<double> values(n);
    in.read(reinterpret_cast<char*>(values.data()),
            static_cast<std::streamsize>(n * sizeof(double)));
    if (!in) throw std::runtime_error("agent checkpoint truncated");
    return values;
}

MlpSpec actor_spec(int obs_dim, int action_dim, const std::vector<int>& hidden) {
    MlpSpec spec;
    spec.layer_sizes.push_back(obs_dim);
    spec.layer_sizes.insert(spec.layer_sizes.end(), hidden.begin(), hidden.end());
    spec.layer_sizes.push_back(action_dim);
    spec.output_activation = OutputActivation::tanh_bounded;
    return spec;
}

MlpSpec critic_spec(int obs_dim, int action_dim, const std::vector<int>& hidden) {
    MlpSpec spec;
    spec.layer_sizes.push_back(obs_dim + action_dim);
    spec.layer_sizes.insert(spec.layer_sizes.end(), hidden.begin(), hidden.end());
    spec.layer_sizes.push_back(1);
    spec.output_activation = OutputActivation::linear;
    return spec;
}

// Critic-backed Q with dQ/da taken from the critic's input gradient.
class CriticActionValue final : public ActionValueFn {
public:
    explicit CriticActionValue(const Mlp& critic, int obs_dim, int action_dim)
        : critic_(critic), obs_dim_(obs_dim), action_dim_(action_dim),
          scratch_grad_(critic.param_count(), 0.0) {}

    double value_and_action_grad(std::span<const double> state, std::span<const double> action,
                                 std::span<double> action_grad) const override {
        std::vector<double> input(obs_dim_ + action_dim_);
        std::copy(state.begin(), state.end(), input.begin());
        std::copy(action.begin(), action.end(), input.begin() + obs_dim_);

        Mlp::Cache cache;
        const std::vector<double> q = critic_.forward(input, &cache);
        std::fill(scratch_grad_.begin(), scratch_grad_.end(), 0.0);
        std::vector<double> input_grad(input.size());
        const double one = 1.0;
        critic_.backward(cache, std::span<const double>(&one, 1), scratch_grad_, input_grad);
        std::copy(input_grad.begin() + obs_dim_, input_grad.end(), action_grad.begin());
        return q[0];
    }

private:
    const Mlp& critic_;
    int obs_dim_;
    int action_dim_;
    mutable std::vector<double> scratch_grad_;
};

}  // namespace

ReplayBuffer::ReplayBuffer(std::size_t capacity, int state_dim, int action_dim)
    : capacity_(capacity), state_dim_(state_dim), action_dim_(action_dim) {
    if (capacity_ == 0) throw std::invalid_argument("replay capacity must be positive");
}

void ReplayBuffer::remember(const Transition& t) {
    if (t.state.size() != static_cast<std::size_t>(state_dim_) ||
        t.next_state.size() != static_cast<std::size_t>(state_dim_) ||
        t.action.size() != static_cast<std::size_t>(action_dim_)) {
        throw std::invalid_argument("transition dimension mismatch");
    }
    if (size_ < capacity_) {
        states_.insert(states_.end(), t.state.begin(), t.state.end());
        actions_.insert(actions_.end(), t.action.begin(), t.action.end());
        rewards_.push_back(t.reward);
        next_states_.insert(next_states_.end(), t.next_state.begin(), t.next_state.end());
        terminals_.push_back(t.terminal ? 1 : 0);
        ++size_;
        return;
    }
    // Full: overwrite the oldest slot.
    std::copy(t.state.begin(), t.state.end(), states_.begin() + head_ * state_dim_);
    std::copy(t.action.begin(), t.action.end(), actions_.begin() + head_ * action_dim_);
    rewards_[head_] = t.reward;
    std::copy(t.next_state.begin(), t.next_state.end(),
              next_states_.begin() + head_ * state_dim_);
    terminals_[head_] = t.terminal ? 1 : 0;
    head_ = (head_ + 1) % capacity_;
}

TransitionView ReplayBuffer::view(std::size_t index) const {
    if (index >= size_) throw std::out_of_range("replay index out of range");
    // Logical index 0 is the oldest stored transition.
    const std::size_t phys = size_ < capacity_ ? index : (head_ + index) % capacity_;
    return TransitionView{
        std::span<const double>(states_.data() + phys * state_dim_, state_dim_),
        std::span<const double>(actions_.data() + phys * action_dim_, action_dim_),
        rewards_[phys],
        std::span<const double>(next_states_.data() + phys * state_dim_, state_dim_),
        terminals_[phys] != 0};
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t batch_size,
                                                      RngStream& rng) const {
    if (batch_size > size_) {
        throw std::logic_error("replay buffer holds fewer transitions than the batch size");
    }
    // Floyd's sampling: uniform subset of batch_size distinct indices.
    std::unordered_set<std::size_t> chosen;
    std::vector<std::size_t> batch;
    batch.reserve(batch_size);
    for (std::size_t j = size_ - batch_size; j < size_; ++j) {
        const std::size_t t = rng.below(j + 1);
        if (chosen.insert(t).second) {
            batch.push_back(t);
        } else {
            chosen.insert(j);
            batch.push_back(j);
        }
    }
    return batch;
}

OuNoise::OuNoise(int dim, OuConfig config)
    : config_(config), sigma_(config.sigma_initial), x_(dim, config.mu) {}

void OuNoise::reset() { std::fill(x_.begin(), x_.end(), config_.mu); }

void OuNoise::set_state(std::span<const double> x) {
    if (x.size() != x_.size()) throw std::invalid_argument("ou state size mismatch");
    std::copy(x.begin(), x.end(), x_.begin());
}

std::span<const double> OuNoise::step(RngStream& rng) {
    for (double& x : x_) {
        x += config_.theta * (config_.mu - x) + sigma_ * rng.standard_normal();
    }
    return x_;
}

double ou_sigma_schedule(const OuConfig& config, std::int64_t step, std::int64_t planned_steps,
                         double decay_fraction) {
    const double decay_steps = decay_fraction * static_cast<double>(planned_steps);
    if (decay_steps <= 0.0 || static_cast<double>(step) >= decay_steps) {
        return config.sigma_final;
    }
    const double frac = static_cast<double>(step) / decay_steps;
    return config.sigma_initial + frac * (config.sigma_final - config.sigma_initial);
}

void AgentConfig::validate() const {
    if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must lie in [0, 1)");
    if (!(tau > 0.0 && tau <= 1.0)) throw std::invalid_argument("tau must lie in (0, 1]");
    if (batch_size <= 0) throw std::invalid_argument("batch_size must be positive");
    if (static_cast<std::size_t>(batch_size) > buffer_capacity) {
        throw std::invalid_argument("batch_size cannot exceed buffer capacity");
    }
    if (hidden_sizes.empty()) throw std::invalid_argument("need at least one hidden layer");
}

DdpgAgent::DdpgAgent(int obs_dim, int action_dim, int q_max, AgentConfig config,
                     std::uint64_t seed)
    : obs_dim_(obs_dim),
      action_dim_(action_dim),
      q_max_(q_max),
      config_(std::move(config)),
      actor_(actor_spec(obs_dim, action_dim, config_.hidden_sizes)),
      critic_(critic_spec(obs_dim, action_dim, config_.hidden_sizes)),
      actor_target_(actor_spec(obs_dim, action_dim, config_.hidden_sizes)),
      critic_target_(critic_spec(obs_dim, action_dim, config_.hidden_sizes)),
      actor_opt_(actor_.param_count(), AdamConfig{config_.actor_lr}),
      critic_opt_(critic_.param_count(), AdamConfig{config_.critic_lr}),
      noise_(action_dim, config_.ou),
      buffer_(config_.buffer_capacity, obs_dim, action_dim),
      sample_rng_(derive_subseed(seed, SeedComponent::agent_sampling)),
      noise_rng_(derive_subseed(seed, SeedComponent::exploration_noise)) {
    config_.validate();
    std::mt19937_64 init_rng(derive_subseed(seed, SeedComponent::agent_init));
    actor_.init_random(init_rng);
    critic_.init_random(init_rng);
    std::copy(actor_.params().begin(), actor_.params().end(), actor_target_.params().begin());
    std::copy(critic_.params().begin(), critic_.params().end(),
              critic_target_.params().begin());
}

void DdpgAgent::normalize_obs(std::span<const double> raw, std::span<double> out) const {
    for (std::size_t i = 0; i < raw.size(); ++i) out[i] = raw[i] / q_max_;
}

std::vector<double> DdpgAgent::act_deterministic(std::span<const double> raw_obs) const {
    std::vector<double> normalized(obs_dim_);
    normalize_obs(raw_obs, normalized);
    return actor_.forward(normalized);
}

std::vector<double> DdpgAgent::act(const SlotObservation& obs, bool explore) {
    std::vector<double> raw(obs.queue_lengths.begin(), obs.queue_lengths.end());
    std::vector<double> action = act_deterministic(raw);
    if (explore) {
        const auto noise = noise_.step(noise_rng_);
        for (int i = 0; i < action_dim_; ++i) {
            action[i] = std::clamp(action[i] + noise[i], -1.0, 1.0);
        }
    }
    return action;
}

bool DdpgAgent::ready_to_train() const {
    const std::size_t needed = std::max<std::size_t>(config_.warmup_transitions,
                                                     config_.batch_size);
    return buffer_.size() >= needed;
}

TrainStepDiag DdpgAgent::train_step() {
    const auto batch = buffer_.sample_indices(config_.batch_size, sample_rng_);
    return train_step_on(batch);
}

TrainStepDiag DdpgAgent::train_step_on(std::span<const std::size_t> batch_indices) {
    const std::size_t batch = batch_indices.size();
    if (batch == 0) throw std::logic_error("empty training batch");
    const double inv_batch = 1.0 / static_cast<double>(batch);

    TrainStepDiag diag;
    std::vector<double> critic_grad(critic_.param_count(), 0.0);
    std::vector<double> norm_state(obs_dim_);
    std::vector<double> norm_next(obs_dim_);
    std::vector<double> critic_in(obs_dim_ + action_dim_);
    std::vector<std::vector<double>> batch_states;
    batch_states.reserve(batch);

    Mlp::Cache cache;
    for (const std::size_t index : batch_indices) {
        const TransitionView t = buffer_.view(index);
        normalize_obs(t.state, norm_state);
        normalize_obs(t.next_state, norm_next);
        batch_states.emplace_back(norm_state);

        // Bootstrapped target from the slow-moving nets; terminal transitions
        // use the reward alone.
        double target = t.reward;
        if (!t.terminal) {
            const std::vector<double> next_action = actor_target_.forward(norm_next);
            std::copy(norm_next.begin(), norm_next.end(), critic_in.begin());
            std::copy(next_action.begin(), next_action.end(), critic_in.begin() + obs_dim_);
            target += config_.gamma * critic_target_.forward(critic_in)[0];
        }

        std::copy(norm_state.begin(), norm_state.end(), critic_in.begin());
        std::copy(t.action.begin(), t.action.end(), critic_in.begin() + obs_dim_);
        const double q = critic_.forward(critic_in, &cache)[0];
        const double err = q - target;
        diag.critic_loss += err * err * inv_batch;
        const double dq = 2.0 * err * inv_batch;
        critic_.backward(cache, std::span<const double>(&dq, 1), critic_grad);
    }
    critic_opt_.update(critic_.params(), critic_grad, /*ascend=*/false);

    const CriticActionValue critic_q(critic_, obs_dim_, action_dim_);
    diag.actor_objective = actor_ascent_step(batch_states, critic_q);

    soft_update(actor_target_.params(), actor_.params(), config_.tau);
    soft_update(critic_target_.params(), critic_.params(), config_.tau);
    return diag;
}

double DdpgAgent::actor_ascent_step(std::span<const std::vector<double>> normalized_states,
                                    const ActionValueFn& q) {
    if (normalized_states.empty()) throw std::logic_error("empty actor batch");
    const double inv_batch = 1.0 / static_cast<double>(normalized_states.size());

    std::vector<double> actor_grad(actor_.param_count(), 0.0);
    std::vector<double> action_grad(action_dim_);
    double mean_q = 0.0;

    Mlp::Cache cache;
    for (const std::vector<double>& state : normalized_states) {
        const std::vector<double> action = actor_.forward(state, &cache);
        mean_q += q.value_and_action_grad(state, action, action_grad) * inv_batch;
        for (double& g : action_grad) g *= inv_batch;
        actor_.backward(cache, action_grad, actor_grad);
    }
    actor_opt_.update(actor_.params(), actor_grad, /*ascend=*/true);
    return mean_q;
}

void DdpgAgent::save(std::ostream& out) const {
    out.write(kAgentMagic, sizeof(kAgentMagic));
    write_pod(out, kAgentVersion);
    write_pod(out, static_cast<std::int32_t>(obs_dim_));
    write_pod(out, static_cast<std::int32_t>(action_dim_));
    write_pod(out, static_cast<std::int32_t>(q_max_));
    save_mlp(out, actor_);
    save_mlp(out, critic_);
    save_mlp(out, actor_target_);
    save_mlp(out, critic_target_);
    for (const AdamOptimizer* opt : {&actor_opt_, &critic_opt_}) {
        write_pod(out, opt->step_count());
        write_doubles(out, opt->first_moment());
        write_doubles(out, opt->second_moment());
    }
    write_pod(out, env_steps_);
    write_pod(out, static_cast<std::int32_t>(episodes_done_));
}

void DdpgAgent::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
    save(out);
    if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

DdpgAgent DdpgAgent::load(std::istream& in, AgentConfig config, std::uint64_t seed) {
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kAgentMagic, sizeof(magic)) != 0) {
        throw std::runtime_error("not an agent checkpoint (bad magic)");
    }
    const auto version = read_pod<std::uint32_t>(in);
    if (version != kAgentVersion) {
        throw std::runtime_error("unsupported agent checkpoint version");
    }
    const auto obs_dim = read_pod<std::int32_t>(in);
    const auto action_dim = read_pod<std::int32_t>(in);
    const auto q_max = read_pod<std::int32_t>(in);

    DdpgAgent agent(obs_dim, action_dim, q_max, std::move(config), seed);
    load_mlp_into(in, agent.actor_);
    load_mlp_into(in, agent.critic_);
    load_mlp_into(in, agent.actor_target_);
    load_mlp_into(in, agent.critic_target_);
    for (AdamOptimizer* opt : {&agent.actor_opt_, &agent.critic_opt_}) {
        const auto step = read_pod<std::int64_t>(in);
        const auto m = read_doubles(in);
        const auto v = read_doubles(in);
        opt->restore(m, v, step);
    }
    agent.env_steps_ = read_pod<std::int64_t>(in);
    agent.episodes_done_ = read_pod<std::int32_t>(in);
    return agent;
}

DdpgAgent DdpgAgent::load(const std::string& path, AgentConfig config, std::uint64_t seed) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    return load(in, std::move(config), seed);
}

std::vector<EpisodeRecord> train_loop(TandemEnv& env, DdpgAgent& agent, int episodes,
                                      const TrainHooks& hooks) {
    std::vector<EpisodeRecord> records;
    if (episodes <= 0) return records;
    records.reserve(episodes);

    const std::int64_t planned = hooks.planned_env_steps > 0
                                     ? hooks.planned_env_steps
                                     : static_cast<std::int64_t>(episodes) * env.max_steps();

    for (int ep = 0; ep < episodes; ++ep) {
        SlotObservation obs = env.reset();
        agent.reset_noise();

        EpisodeRecord rec;
        rec.episode = agent.episodes_done();
        double reward_sum = 0.0;
        double sum_rate_sum = 0.0;
        double critic_loss_sum = 0.0;
        int train_steps = 0;
        int violations = 0;
        int eligible = 0;

        bool done = false;
        while (!done) {
            agent.set_noise_sigma(ou_sigma_schedule(agent.config().ou, agent.env_steps(),
                                                    planned,
                                                    agent.config().sigma_decay_fraction));
            const std::vector<double> action = agent.act(obs, /*explore=*/true);
            StepResult result = env.step(action);

            Transition tr;
            tr.state.assign(obs.queue_lengths.begin(), obs.queue_lengths.end());
            tr.action = action;
            tr.reward = result.reward;
            tr.next_state.assign(result.observation.queue_lengths.begin(),
                                 result.observation.queue_lengths.end());
            tr.terminal = result.terminated;
            agent.remember(tr);
            agent.set_env_steps(agent.env_steps() + 1);

            if (agent.ready_to_train()) {
                const TrainStepDiag diag = agent.train_step();
                critic_loss_sum += diag.critic_loss;
                ++train_steps;
            }

            reward_sum += result.reward;
            sum_rate_sum += result.info.sum_rate;
            violations += result.info.n_violations;
            eligible += result.info.n_eligible;
            ++rec.steps;
            rec.terminated_early = result.terminated;

            obs = std::move(result.observation);
            done = result.done();
        }

        agent.set_episodes_done(agent.episodes_done() + 1);
        rec.env_steps_cum = agent.env_steps();
        rec.violation_prob = eligible > 0 ? static_cast<double>(violations) / eligible : 0.0;
        rec.n_eligible = eligible;
        rec.mean_sum_rate = rec.steps > 0 ? sum_rate_sum / rec.steps : 0.0;
        rec.mean_reward = rec.steps > 0 ? reward_sum / rec.steps : 0.0;
        rec.mean_critic_loss = train_steps > 0 ? critic_loss_sum / train_steps : 0.0;
        rec.sigma = agent.noise_sigma();
        records.push_back(rec);
        if (hooks.on_episode) hooks.on_episode(rec);
    }
    return records;
}

}  // namespace ratectl

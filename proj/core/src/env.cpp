#include "ratectl/env.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ratectl {

void QosSpec::validate() const {
    if (!(d_ub > 0.0)) throw std::invalid_argument("d_ub must be positive");
    if (!(eps_ub > 0.0 && eps_ub < 1.0)) {
        throw std::invalid_argument("eps_ub must lie in (0, 1)");
    }
    if (!(lambda_tradeoff >= 0.0)) {
        throw std::invalid_argument("lambda_tradeoff must be non-negative");
    }
    if (!(slot_len > d_ub)) {
        throw std::invalid_argument("slot_len must exceed d_ub");
    }
    if (!(arrival_rate > 0.0)) {
        throw std::invalid_argument("arrival_rate must be positive");
    }
}

void EpisodeConfig::validate(const QosSpec& qos) const {
    if (!(delay_max > qos.d_ub)) {
        throw std::invalid_argument("delay_max must exceed d_ub");
    }
    if (max_steps(qos.slot_len) < 1) {
        throw std::invalid_argument("episode_duration must cover at least one slot");
    }
}

std::vector<double> scale_action(std::span<const double> raw, const NetworkConfig& config) {
    if (raw.size() != static_cast<std::size_t>(config.n_stages())) {
        throw std::invalid_argument("action length must equal n_stages");
    }
    std::vector<double> rates(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        // Convex combination: endpoint-exact at raw = -1 and +1.
        const double t = (std::clamp(raw[i], -1.0, 1.0) + 1.0) / 2.0;
        rates[i] = (1.0 - t) * config.mu_min[i] + t * config.mu_max[i];
    }
    return rates;
}

double compute_reward(const SlotOutcome& outcome, const QosSpec& qos,
                      double expected_arrivals) {
    const double beta1 = qos.beta1();
    const double beta2 = qos.beta2();
    double sub_rewards = 0.0;
    for (const ResolvedArrival& job : outcome.completed_jobs) {
        const bool met_bound = !job.censored && job.delay < qos.d_ub;
        sub_rewards += met_bound ? beta1 : beta2;
    }
    return sub_rewards / expected_arrivals - outcome.sum_rate;
}

double compute_reward(const SlotOutcome& outcome, const QosSpec& qos) {
    return compute_reward(outcome, qos, qos.expected_arrivals_per_slot());
}

TandemEnv::TandemEnv(NetworkConfig network, QosSpec qos, EpisodeConfig episode, int q_max,
                     std::uint64_t master_seed)
    : network_(std::move(network)),
      qos_(qos),
      episode_(episode),
      q_max_(q_max),
      master_seed_(master_seed) {
    network_.validate();
    qos_.validate();
    episode_.validate(qos_);
    if (q_max_ < 1) throw std::invalid_argument("q_max must be positive");
    if (std::abs(qos_.arrival_rate - network_.arrival_rate()) > 1e-9) {
        throw std::invalid_argument("qos.arrival_rate must match the network arrival process");
    }
}

SlotObservation TandemEnv::observe() const {
    SlotObservation obs;
    obs.q_max = q_max_;
    obs.queue_lengths = sim_->queue_lengths();
    for (int& q : obs.queue_lengths) q = std::min(q, q_max_);
    return obs;
}

SlotObservation TandemEnv::reset() {
    const std::uint64_t episode_seed =
        derive_subseed(master_seed_, SeedComponent::env_episode, episode_counter_);
    sim_ = std::make_unique<TandemSimulator>(network_, episode_seed);
    ++episode_counter_;
    step_count_ = 0;
    episode_active_ = true;
    return observe();
}

StepResult TandemEnv::step(std::span<const double> raw_action) {
    if (!episode_active_) {
        throw std::logic_error("step called on an inactive episode; call reset first");
    }
    const std::vector<double> rates = scale_action(raw_action, network_);
    SlotOutcome outcome = sim_->run_slot(rates, qos_.slot_len, qos_.d_ub);

    ++seen_slots_;
    seen_arrivals_ += static_cast<std::uint64_t>(outcome.n_arrivals_in_window);
    double expected_arrivals = qos_.expected_arrivals_per_slot();
    if (running_estimate_ && seen_arrivals_ > 0) {
        expected_arrivals = static_cast<double>(seen_arrivals_) / static_cast<double>(seen_slots_);
    }

    StepResult result;
    result.reward = compute_reward(outcome, qos_, expected_arrivals);
    ++step_count_;

    result.terminated = outcome.max_departed_delay > episode_.delay_max;
    result.truncated = !result.terminated && step_count_ >= max_steps();
    if (result.done()) episode_active_ = false;

    result.info.n_arrivals = outcome.n_arrivals_in_window;
    result.info.n_eligible = static_cast<int>(outcome.completed_jobs.size());
    for (const ResolvedArrival& job : outcome.completed_jobs) {
        if (job.censored || job.delay >= qos_.d_ub) ++result.info.n_violations;
    }
    result.info.sum_rate = outcome.sum_rate;
    result.observation = observe();
    result.info.outcome = std::move(outcome);
    return result;
}

}  // namespace ratectl

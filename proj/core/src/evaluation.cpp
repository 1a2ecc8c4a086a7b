#include "ratectl/evaluation.hpp"

#include <algorithm>
#include <stdexcept>

namespace ratectl {

StaticRatesPolicy::StaticRatesPolicy(std::vector<double> rates, const NetworkConfig& config) {
    if (rates.size() != static_cast<std::size_t>(config.n_stages())) {
        throw std::invalid_argument("static rate vector length must equal n_stages");
    }
    raw_.resize(rates.size());
    for (std::size_t i = 0; i < rates.size(); ++i) {
        const double span = config.mu_max[i] - config.mu_min[i];
        const double u = 2.0 * (rates[i] - config.mu_min[i]) / span - 1.0;
        raw_[i] = std::clamp(u, -1.0, 1.0);
    }
}

EvalRun evaluate_policy(const NetworkConfig& network, const QosSpec& qos, int q_max,
                        Policy& policy, std::uint64_t eval_seed, const EvalConfig& config) {
    TandemSimulator sim(network, eval_seed);
    WindowStats stats(qos.d_ub, config.window_len);

    SlotObservation obs;
    obs.q_max = q_max;
    while (sim.total_arrivals() < config.min_arrivals) {
        obs.queue_lengths = sim.queue_lengths();
        for (int& q : obs.queue_lengths) q = std::min(q, q_max);

        const std::vector<double> raw = policy.act(obs);
        const std::vector<double> rates = scale_action(raw, network);
        const SlotOutcome outcome = sim.run_slot(rates, qos.slot_len, qos.d_ub);
        stats.ingest_slot(outcome, compute_reward(outcome, qos));
    }

    return EvalRun{stats.summarize_run(), window_curve(stats)};
}

}  // namespace ratectl

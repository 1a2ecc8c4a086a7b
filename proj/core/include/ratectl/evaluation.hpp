#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "ratectl/ddpg.hpp"
#include "ratectl/env.hpp"
#include "ratectl/metrics.hpp"

namespace ratectl {

// A controller under evaluation: observation -> raw action in [-1, 1]^N.
class Policy {
public:
    virtual ~Policy() = default;
    virtual std::vector<double> act(const SlotObservation& obs) = 0;
};

// Trained actor with exploration off.
class AgentPolicy final : public Policy {
public:
    explicit AgentPolicy(const DdpgAgent& agent) : agent_(&agent) {}
    std::vector<double> act(const SlotObservation& obs) override {
        std::vector<double> raw(obs.queue_lengths.begin(), obs.queue_lengths.end());
        return agent_->act_deterministic(raw);
    }

private:
    const DdpgAgent* agent_;
};

// Fixed service rates, expressed in rate units and mapped back onto the raw
// action range.
class StaticRatesPolicy final : public Policy {
public:
    StaticRatesPolicy(std::vector<double> rates, const NetworkConfig& config);
    std::vector<double> act(const SlotObservation&) override { return raw_; }

private:
    std::vector<double> raw_;
};

struct EvalConfig {
    std::uint64_t min_arrivals = 100'000;
    double window_len = 1000.0;
    int n_seeds = 5;
};

struct EvalRun {
    RunSummary summary;
    std::vector<CurvePoint> windows;
};

// One uninterrupted long-horizon run (no episode resets): slots are played
// until at least min_arrivals jobs have entered the network.
EvalRun evaluate_policy(const NetworkConfig& network, const QosSpec& qos, int q_max,
                        Policy& policy, std::uint64_t eval_seed, const EvalConfig& config);

}  // namespace ratectl

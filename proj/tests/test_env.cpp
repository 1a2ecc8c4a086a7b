#include <stdexcept>
#include <cmath>
#include <random>

#include <doctest.h>

#include "ratectl/env.hpp"

using namespace ratectl;

namespace {

NetworkConfig paper_network(DistSpec arrival) {
    NetworkConfig config;
    config.servers_per_stage = {3, 5, 2};
    config.arrival = arrival;
    config.service_work = {DistSpec::gamma(1.0, 0.8), DistSpec::gamma(1.0, 0.8),
                           DistSpec::gamma(1.0, 0.8)};
    config.mu_min = {0.5, 0.25, 0.6};
    config.mu_max = {1.5, 1.0, 1.8};
    return config;
}

SlotOutcome make_outcome(int n_under, int n_over, int n_censored, double sum_rate) {
    SlotOutcome outcome;
    outcome.window_start = 0.0;
    outcome.window_end = 30.0;
    outcome.sum_rate = sum_rate;
    std::uint64_t id = 1;
    for (int i = 0; i < n_under; ++i) {
        outcome.completed_jobs.push_back(ResolvedArrival{id++, 1.0, 2.0, false, 3.0});
    }
    for (int i = 0; i < n_over; ++i) {
        outcome.completed_jobs.push_back(ResolvedArrival{id++, 1.0, 25.0, false, 26.0});
    }
    for (int i = 0; i < n_censored; ++i) {
        outcome.completed_jobs.push_back(ResolvedArrival{id++, 1.0, -1.0, true, 30.0});
    }
    outcome.n_arrivals_in_window = static_cast<int>(outcome.completed_jobs.size());
    return outcome;
}

// Independent re-evaluation of the slot reward: per-job loop with the
// sub-reward constants recomputed from scratch.
double brute_force_reward(const SlotOutcome& outcome, double eps_ub, double lambda_tradeoff,
                          double d_ub, double expected_arrivals) {
    const double beta1 = eps_ub * lambda_tradeoff;
    const double beta2 = -(1.0 - eps_ub) * lambda_tradeoff;
    double acc = 0.0;
    for (const ResolvedArrival& job : outcome.completed_jobs) {
        if (!job.censored && job.delay < d_ub) {
            acc += beta1;
        } else {
            acc += beta2;
        }
    }
    return acc / expected_arrivals - outcome.sum_rate;
}

}  // namespace

TEST_SUITE("env") {

TEST_CASE("qos derived sub-rewards") {
    QosSpec qos;
    qos.eps_ub = 0.1;
    qos.lambda_tradeoff = 14.0;
    CHECK(qos.beta1() == doctest::Approx(1.4));
    CHECK(qos.beta2() == doctest::Approx(-12.6));
    CHECK_NOTHROW(qos.validate());
    qos.slot_len = 5.0;  // must exceed d_ub = 10
    CHECK_THROWS_AS(qos.validate(), std::invalid_argument);
}

TEST_CASE("action scaling") {
    const NetworkConfig config = paper_network(DistSpec::gamma(1.0 / 0.95, 0.7));
    const std::vector<double> low = {-1.0, -1.0, -1.0};
    CHECK(scale_action(low, config) == config.mu_min);
    const std::vector<double> high = {1.0, 1.0, 1.0};
    CHECK(scale_action(high, config) == config.mu_max);

    NetworkConfig mid;
    mid.servers_per_stage = {1};
    mid.arrival = DistSpec::exponential(10.0);
    mid.service_work = {DistSpec::exponential(1.0)};
    mid.mu_min = {0.4};
    mid.mu_max = {1.2};
    const std::vector<double> center = {0.0};
    CHECK(scale_action(center, mid)[0] == doctest::Approx(0.8));

    const std::vector<double> wild = {7.0};
    CHECK(scale_action(wild, mid)[0] == doctest::Approx(1.2));  // clamped first
}

TEST_CASE("reward arithmetic matches the worked example") {
    QosSpec qos;
    qos.d_ub = 10.0;
    qos.eps_ub = 0.1;
    qos.lambda_tradeoff = 14.0;
    qos.slot_len = 30.0;
    qos.arrival_rate = 1.0 / 3.0;  // E[n_a] = 10

    const SlotOutcome outcome = make_outcome(9, 1, 0, 10.0);
    CHECK(compute_reward(outcome, qos) == doctest::Approx(-10.0).epsilon(1e-12));

    SUBCASE("all jobs violating") {
        const SlotOutcome bad = make_outcome(0, 4, 3, 10.0);
        const double expected = 7.0 * qos.beta2() / 10.0 - 10.0;
        CHECK(compute_reward(bad, qos) == doctest::Approx(expected).epsilon(1e-12));
    }
    SUBCASE("lambda 0 removes the constraint term exactly") {
        qos.lambda_tradeoff = 0.0;
        const SlotOutcome any = make_outcome(3, 2, 1, 7.25);
        CHECK(compute_reward(any, qos) + any.sum_rate == 0.0);
    }
}

TEST_CASE("reward equals brute-force per-job evaluation on random outcomes") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        QosSpec qos;
        qos.d_ub = 10.0;
        qos.eps_ub = 0.05 + 0.4 * unit(rng);
        qos.lambda_tradeoff = (i % 10 == 0) ? 0.0 : 20.0 * unit(rng);
        qos.slot_len = 30.0;
        qos.arrival_rate = 0.2 + unit(rng);

        SlotOutcome outcome;
        outcome.window_start = 0.0;
        outcome.window_end = qos.slot_len;
        outcome.sum_rate = 12.0 * unit(rng);
        const int n = static_cast<int>(rng() % 40);
        for (int k = 0; k < n; ++k) {
            ResolvedArrival job;
            job.job_id = k + 1;
            job.censored = unit(rng) < 0.15;
            job.delay = job.censored ? -1.0 : 20.0 * unit(rng);
            job.resolve_time = qos.slot_len;
            outcome.completed_jobs.push_back(job);
        }
        const double expected = brute_force_reward(outcome, qos.eps_ub, qos.lambda_tradeoff,
                                                   qos.d_ub, qos.expected_arrivals_per_slot());
        CHECK(compute_reward(outcome, qos) == expected);
    }
}

TEST_CASE("reset returns the all-zero observation") {
    TandemEnv env(paper_network(DistSpec::gamma(1.0 / 0.95, 0.7)), QosSpec{}, EpisodeConfig{},
                  1024, 42);
    const SlotObservation obs = env.reset();
    CHECK(obs.queue_lengths == std::vector<int>{0, 0, 0});
    CHECK(obs.q_max == 1024);
}

TEST_CASE("trajectories are a pure function of master seed and actions") {
    const NetworkConfig network = paper_network(DistSpec::gamma(1.0 / 0.95, 0.7));
    TandemEnv env_a(network, QosSpec{}, EpisodeConfig{}, 1024, 7);
    TandemEnv env_b(network, QosSpec{}, EpisodeConfig{}, 1024, 7);
    env_a.reset();
    env_b.reset();
    const std::vector<double> action = {0.2, -0.3, 0.1};
    for (int i = 0; i < 20; ++i) {
        const StepResult ra = env_a.step(action);
        const StepResult rb = env_b.step(action);
        CHECK(ra.reward == rb.reward);
        CHECK(ra.observation.queue_lengths == rb.observation.queue_lengths);
    }
}

TEST_CASE("zero-arrival slot reward reduces to minus the sum rate") {
    NetworkConfig network;
    network.servers_per_stage = {3, 5, 2};
    network.arrival = DistSpec::deterministic(1e6);  // effectively no arrivals
    network.service_work = {DistSpec::exponential(1.0), DistSpec::exponential(1.0),
                            DistSpec::exponential(1.0)};
    network.mu_min = {0.5, 0.5, 0.5};
    network.mu_max = {1.5, 1.5, 1.5};
    QosSpec qos;
    qos.arrival_rate = network.arrival_rate();
    TandemEnv env(network, qos, EpisodeConfig{}, 1024, 1);
    env.reset();
    const std::vector<double> raw = {0.0, 0.0, 0.0};  // scales to rate 1 everywhere
    const StepResult result = env.step(raw);
    CHECK(result.info.n_arrivals == 0);
    CHECK(result.reward == doctest::Approx(-10.0).epsilon(1e-12));
}

TEST_CASE("deterministic single-stage slot evaluates to 0.4 with E[n_a]=9") {
    NetworkConfig network;
    network.servers_per_stage = {1};
    network.arrival = DistSpec::deterministic(1.0);
    network.service_work = {DistSpec::deterministic(0.5)};
    network.mu_min = {0.6};
    network.mu_max = {1.0};
    TandemSimulator sim(network, 3);
    const std::vector<double> rates = {1.0};
    const SlotOutcome outcome = sim.run_slot(rates, 10.0, 2.0);
    REQUIRE(outcome.completed_jobs.size() == 9);

    QosSpec qos;
    qos.d_ub = 2.0;
    qos.eps_ub = 0.1;
    qos.lambda_tradeoff = 14.0;
    qos.slot_len = 10.0;
    qos.arrival_rate = 1.0;
    // Nine sub-rewards of beta1 = 1.4 against E[n_a] = 9, minus sum rate 1.
    CHECK(compute_reward(outcome, qos, 9.0) == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("episode lifecycle") {
    const NetworkConfig network = paper_network(DistSpec::gamma(1.0 / 0.95, 0.7));
    QosSpec qos;
    qos.arrival_rate = network.arrival_rate();
    EpisodeConfig episode;
    episode.episode_duration = 90.0;  // 3 slots of T=30
    TandemEnv env(network, qos, episode, 1024, 11);
    CHECK_THROWS_AS(env.step(std::vector<double>{0, 0, 0}), std::logic_error);

    env.reset();
    CHECK(env.max_steps() == 3);
    const std::vector<double> action = {1.0, 1.0, 1.0};
    StepResult r1 = env.step(action);
    CHECK_FALSE(r1.done());
    StepResult r2 = env.step(action);
    CHECK_FALSE(r2.done());
    StepResult r3 = env.step(action);
    CHECK(r3.truncated);
    CHECK_FALSE(r3.terminated);
    CHECK_THROWS_AS(env.step(action), std::logic_error);
    CHECK_NOTHROW(env.reset());
}

TEST_CASE("delay_max breach terminates the episode") {
    // Heavily loaded M/M/1 at the weakest action: sojourns routinely clear a
    // delay_max barely above d_ub.
    NetworkConfig network;
    network.servers_per_stage = {1};
    network.arrival = DistSpec::exponential(1.0 / 0.95);
    network.service_work = {DistSpec::exponential(1.0)};
    network.mu_min = {1.0};  // rho = 0.95, mean sojourn ~20
    network.mu_max = {2.0};
    QosSpec qos;
    qos.d_ub = 10.0;
    qos.slot_len = 30.0;
    qos.arrival_rate = network.arrival_rate();
    EpisodeConfig episode;
    episode.delay_max = 10.5;
    episode.episode_duration = 3000.0;
    TandemEnv env(network, qos, episode, 1024, 1);
    env.reset();
    bool terminated = false;
    for (int i = 0; i < 100 && !terminated; ++i) {
        terminated = env.step(std::vector<double>{-1.0}).terminated;
    }
    CHECK(terminated);
}

TEST_CASE("q_max only truncates the observation, not the dynamics") {
    NetworkConfig network = paper_network(DistSpec::gamma(1.0 / 0.95, 0.7));
    QosSpec qos;
    qos.arrival_rate = network.arrival_rate();
    TandemEnv small(network, qos, EpisodeConfig{}, 2, 13);
    TandemEnv large(network, qos, EpisodeConfig{}, 1024, 13);
    small.reset();
    large.reset();
    const std::vector<double> slow = {-1.0, -1.0, -1.0};
    for (int i = 0; i < 30; ++i) {
        const StepResult rs = small.step(slow);
        const StepResult rl = large.step(slow);
        CHECK(rs.reward == rl.reward);  // identical dynamics and accounting
        for (int n = 0; n < 3; ++n) {
            CHECK(rs.observation.queue_lengths[n] ==
                  std::min(rl.observation.queue_lengths[n], 2));
        }
        if (rs.done() || rl.done()) break;
    }
}

TEST_CASE("long-run sub-reward average matches the bound probabilities") {
    // LLN identity: the mean of (sum r'_i) / E[n_a] over slots approaches
    // beta1 * P(d < d_ub) + beta2 * P(d > d_ub), with the bound probabilities
    // estimated from the eligible jobs. Holds when the excluded fraction is
    // negligible, so the regime keeps sojourns far below d_ub and T >> d_ub.
    NetworkConfig network;
    network.servers_per_stage = {1};
    network.arrival = DistSpec::exponential(2.0);  // lambda = 0.5
    network.service_work = {DistSpec::exponential(1.0)};
    network.mu_min = {0.6};
    network.mu_max = {3.0};
    QosSpec qos;
    qos.arrival_rate = network.arrival_rate();
    qos.d_ub = 3.0;
    qos.slot_len = 100.0;
    TandemSimulator sim(network, 77);
    const std::vector<double> rates = {3.0};

    double sub_sum = 0.0;
    std::uint64_t eligible = 0;
    std::uint64_t violations = 0;
    const int n_slots = 2000;
    std::vector<double> slot_subs;
    for (int i = 0; i < n_slots; ++i) {
        const SlotOutcome outcome = sim.run_slot(rates, qos.slot_len, qos.d_ub);
        const double slot_sub = compute_reward(outcome, qos) + outcome.sum_rate;
        slot_subs.push_back(slot_sub);
        sub_sum += slot_sub;
        for (const ResolvedArrival& job : outcome.completed_jobs) {
            ++eligible;
            if (job.censored || job.delay >= qos.d_ub) ++violations;
        }
    }
    const double mean_sub = sub_sum / n_slots;
    const double p_violate = static_cast<double>(violations) / eligible;
    const double predicted = qos.beta1() * (1.0 - p_violate) + qos.beta2() * p_violate;

    // 3-sigma band from the batch std error of the slot means.
    double var = 0.0;
    for (double v : slot_subs) var += (v - mean_sub) * (v - mean_sub);
    var /= (n_slots - 1);
    const double se = std::sqrt(var / n_slots);
    CHECK(std::abs(mean_sub - predicted) <= 3.0 * se);
}

}  // TEST_SUITE

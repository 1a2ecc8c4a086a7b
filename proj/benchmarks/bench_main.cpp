#include <benchmark/benchmark.h>

#include "ratectl/config.hpp"
#include "ratectl/ddpg.hpp"
#include "ratectl/tandem_sim.hpp"

namespace {

using namespace ratectl;

void BM_SimulatorSlot(benchmark::State& state) {
    const RunConfig config = default_run_config();
    TandemSimulator sim(config.network, 1);
    const std::vector<double> rates = {0.8, 0.48, 1.2};
    for (auto _ : state) {
        benchmark::DoNotOptimize(sim.run_slot(rates, 30.0, 10.0));
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_SimulatorSlot)->Unit(benchmark::kMicrosecond);

void BM_MlpForward(benchmark::State& state) {
    std::mt19937_64 rng(1);
    Mlp net(MlpSpec{{6, 64, 64, 1}, OutputActivation::linear});
    net.init_random(rng);
    const std::vector<double> input = {0.1, 0.2, 0.3, -0.4, 0.5, -0.6};
    for (auto _ : state) {
        benchmark::DoNotOptimize(net.forward(input));
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_MlpForward);

void BM_MlpBackward(benchmark::State& state) {
    std::mt19937_64 rng(1);
    Mlp net(MlpSpec{{6, 64, 64, 1}, OutputActivation::linear});
    net.init_random(rng);
    const std::vector<double> input = {0.1, 0.2, 0.3, -0.4, 0.5, -0.6};
    Mlp::Cache cache;
    net.forward(input, &cache);
    std::vector<double> param_grad(net.param_count(), 0.0);
    std::vector<double> input_grad(6);
    const std::vector<double> out_grad = {1.0};
    for (auto _ : state) {
        net.backward(cache, out_grad, param_grad, input_grad);
        benchmark::DoNotOptimize(param_grad.data());
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_MlpBackward);

void BM_TrainStep(benchmark::State& state) {
    AgentConfig config;
    config.warmup_transitions = 256;
    DdpgAgent agent(3, 3, 1024, config, 7);
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < 512; ++i) {
        Transition t;
        t.state = {unit(rng) * 40, unit(rng) * 40, unit(rng) * 40};
        t.action = {unit(rng) * 2 - 1, unit(rng) * 2 - 1, unit(rng) * 2 - 1};
        t.reward = -unit(rng) * 10;
        t.next_state = {unit(rng) * 40, unit(rng) * 40, unit(rng) * 40};
        t.terminal = false;
        agent.remember(t);
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(agent.train_step());
    }
    state.SetItemsProcessed(state.iterations() * config.batch_size);
}
BENCHMARK(BM_TrainStep)->Unit(benchmark::kMicrosecond);

void BM_ReplaySample(benchmark::State& state) {
    ReplayBuffer buffer(1'000'000, 3, 3);
    Transition t;
    t.state = {1, 2, 3};
    t.action = {0.1, 0.2, 0.3};
    t.next_state = {4, 5, 6};
    for (int i = 0; i < 100'000; ++i) buffer.remember(t);
    RngStream rng(3);
    for (auto _ : state) {
        benchmark::DoNotOptimize(buffer.sample_indices(128, rng));
    }
    state.SetItemsProcessed(state.iterations() * 128);
}
BENCHMARK(BM_ReplaySample);

}  // namespace

BENCHMARK_MAIN();

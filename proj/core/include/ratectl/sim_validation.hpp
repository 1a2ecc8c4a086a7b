#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ratectl {

struct CheckResult {
    std::string name;
    double target = 0.0;
    double measured = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    std::string detail;
};

struct ValidationOptions {
    std::uint64_t mm1_departures = 1'000'000;
    std::uint64_t tandem_departures = 200'000;
    int n_random_schedules = 1000;
    std::uint64_t seed = 1;
};

// Simulator oracle suite: closed-form M/M/1 sojourn tail, tandem product-form
// mean delay, a hand-simulated deterministic toy, and structural property
// checks (conservation, FCFS, work conservation, rate-rescaling) over
// randomized rate-change schedules.
std::vector<CheckResult> run_sim_validation(const ValidationOptions& options);

bool all_passed(const std::vector<CheckResult>& results);
std::string format_validation_report(const std::vector<CheckResult>& results);

}  // namespace ratectl

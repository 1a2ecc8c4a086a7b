#include "ratectl/sim_validation.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "ratectl/queueing_oracles.hpp"
#include "ratectl/tandem_sim.hpp"

namespace ratectl {

namespace {

CheckResult check_mm1_tail(const ValidationOptions& options) {
    CheckResult check;
    check.name = "mm1_sojourn_tail";
    const double lambda = 0.5;
    const double mu = 1.0;
    const double t = 2.0;
    check.target = mm1_delay_tail(lambda, mu, t);
    check.tolerance = 0.005;

    NetworkConfig config;
    config.servers_per_stage = {1};
    config.arrival = DistSpec::exponential(1.0 / lambda);
    config.service_work = {DistSpec::exponential(1.0)};
    config.mu_min = {0.6};
    config.mu_max = {mu};  // initial rates default to mu_max

    TandemSimulator sim(config, splitmix64(options.seed ^ 0x11));
    std::uint64_t n = 0;
    std::uint64_t over = 0;
    while (n < options.mm1_departures) {
        for (const JobRecord& job : sim.run_until(sim.clock() + 2000.0)) {
            if (n == options.mm1_departures) break;
            ++n;
            if (job.end_to_end_delay > t) ++over;
        }
    }
    check.measured = static_cast<double>(over) / static_cast<double>(n);
    check.pass = std::abs(check.measured - check.target) <= check.tolerance;
    std::ostringstream detail;
    detail << "P(D>" << t << ") over " << n << " departures";
    check.detail = detail.str();
    return check;
}

CheckResult check_tandem_mean_delay(const ValidationOptions& options) {
    CheckResult check;
    check.name = "tandem_product_form_mean_delay";
    const double lambda = 0.5;
    const std::vector<double> mus = {2.0, 1.0, 2.0};
    check.target = tandem_mm1_mean_delay(lambda, mus);
    check.tolerance = 0.02;  // relative

    NetworkConfig config;
    config.servers_per_stage = {1, 1, 1};
    config.arrival = DistSpec::exponential(1.0 / lambda);
    config.service_work = {DistSpec::exponential(1.0), DistSpec::exponential(1.0),
                           DistSpec::exponential(1.0)};
    config.mu_min = {0.6, 0.6, 0.6};
    config.mu_max = mus;

    TandemSimulator sim(config, splitmix64(options.seed ^ 0x22));
    std::uint64_t n = 0;
    double total_delay = 0.0;
    while (n < options.tandem_departures) {
        for (const JobRecord& job : sim.run_until(sim.clock() + 2000.0)) {
            if (n == options.tandem_departures) break;
            ++n;
            total_delay += job.end_to_end_delay;
        }
    }
    check.measured = total_delay / static_cast<double>(n);
    check.pass = std::abs(check.measured - check.target) <= check.tolerance * check.target;
    check.detail = "mean end-to-end delay vs sum of 1/(mu_i - lambda)";
    return check;
}

CheckResult check_deterministic_toy() {
    CheckResult check;
    check.name = "deterministic_hand_simulation";
    check.target = 0.5;
    check.tolerance = 0.0;

    NetworkConfig config;
    config.servers_per_stage = {1};
    config.arrival = DistSpec::deterministic(1.0);
    config.service_work = {DistSpec::deterministic(0.5)};
    config.mu_min = {0.6};
    config.mu_max = {1.0};

    // Arrivals at t = 1..10; each job finds an empty queue and departs 0.5
    // later. run_until(10) covers nine full services.
    TandemSimulator sim(config, 7);
    const std::vector<JobRecord> departed = sim.run_until(10.0);
    bool ok = departed.size() == 9;
    double worst = 0.0;
    for (const JobRecord& job : departed) {
        worst = std::max(worst, std::abs(job.end_to_end_delay - 0.5));
    }
    ok = ok && worst == 0.0;
    check.measured = departed.size() == 9 ? 0.5 + worst : static_cast<double>(departed.size());
    check.pass = ok;
    check.detail = "9 departures with exact delay 0.5";
    return check;
}

CheckResult check_deterministic_slot_accounting() {
    CheckResult check;
    check.name = "deterministic_slot_accounting";
    check.target = 9.0;
    check.tolerance = 0.0;

    NetworkConfig config;
    config.servers_per_stage = {1};
    config.arrival = DistSpec::deterministic(1.0);
    config.service_work = {DistSpec::deterministic(0.5)};
    config.mu_min = {0.6};
    config.mu_max = {1.0};

    TandemSimulator sim(config, 7);
    const std::vector<double> rates = {1.0};
    const SlotOutcome outcome = sim.run_slot(rates, 10.0, 0.6);

    bool ok = outcome.completed_jobs.size() == 9;
    for (const ResolvedArrival& job : outcome.completed_jobs) {
        ok = ok && !job.censored && job.delay == 0.5;
    }
    ok = ok && outcome.n_excluded == 1;  // the t=10 arrival is unresolved
    ok = ok && outcome.sum_rate == 1.0;
    check.measured = static_cast<double>(outcome.completed_jobs.size());
    check.pass = ok;
    check.detail = "slot T=10, d_ub=0.6: nine in-window jobs, all under the bound";
    return check;
}

struct ScheduleSegment {
    double start;
    std::vector<double> rates;
};

double integrate_rate(const std::vector<ScheduleSegment>& schedule, int stage, double from,
                      double to) {
    double total = 0.0;
    for (std::size_t k = 0; k < schedule.size(); ++k) {
        const double seg_start = schedule[k].start;
        const double seg_end =
            k + 1 < schedule.size() ? schedule[k + 1].start : std::max(to, seg_start);
        const double lo = std::max(from, seg_start);
        const double hi = std::min(to, seg_end);
        if (hi > lo) total += (hi - lo) * schedule[k].rates[stage];
    }
    return total;
}

CheckResult check_random_schedules(const ValidationOptions& options) {
    CheckResult check;
    check.name = "conservation_fcfs_work_rescaling";
    check.target = 0.0;
    check.tolerance = 1e-9;  // relative work-integral error (plus a 1e-12 fp floor)

    std::mt19937_64 rng(splitmix64(options.seed ^ 0x33));
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    int audit_failures = 0;
    int fcfs_failures = 0;
    std::uint64_t jobs_checked = 0;
    double worst_rel_err = 0.0;

    for (int s = 0; s < options.n_random_schedules; ++s) {
        const int n_stages = 1 + static_cast<int>(rng() % 3);
        NetworkConfig config;
        const double lambda = 0.4 + 1.2 * unit(rng);
        switch (rng() % 3) {
            case 0: config.arrival = DistSpec::exponential(1.0 / lambda); break;
            case 1: config.arrival = DistSpec::gamma(1.0 / lambda, 0.3 + 1.2 * unit(rng)); break;
            default: config.arrival = DistSpec::deterministic(1.0 / lambda); break;
        }
        for (int i = 0; i < n_stages; ++i) {
            config.servers_per_stage.push_back(1 + static_cast<int>(rng() % 3));
            switch (rng() % 3) {
                case 0: config.service_work.push_back(DistSpec::exponential(1.0)); break;
                case 1:
                    config.service_work.push_back(DistSpec::gamma(1.0, 0.3 + 1.2 * unit(rng)));
                    break;
                default: config.service_work.push_back(DistSpec::deterministic(1.0)); break;
            }
            const double mu_floor = lambda / config.servers_per_stage.back();
            const double mu_min = mu_floor * (1.1 + unit(rng));
            config.mu_min.push_back(mu_min);
            config.mu_max.push_back(mu_min * (1.5 + 1.5 * unit(rng)));
        }

        TandemSimulator sim(config, splitmix64(options.seed ^ (0x1000 + s)));
        std::vector<ScheduleSegment> schedule;
        schedule.push_back(ScheduleSegment{0.0, sim.current_rates()});

        std::vector<JobRecord> departed;
        const int n_segments = 5 + static_cast<int>(rng() % 21);
        try {
            for (int k = 0; k < n_segments; ++k) {
                std::vector<double> rates(n_stages);
                for (int i = 0; i < n_stages; ++i) {
                    rates[i] = config.mu_min[i] + (config.mu_max[i] - config.mu_min[i]) * unit(rng);
                }
                sim.set_rates(rates);
                schedule.push_back(ScheduleSegment{sim.clock(), sim.current_rates()});
                auto out = sim.run_until(sim.clock() + 0.5 + 4.5 * unit(rng));
                sim.audit_invariants();
                departed.insert(departed.end(), std::make_move_iterator(out.begin()),
                                std::make_move_iterator(out.end()));
            }
        } catch (const std::logic_error&) {
            ++audit_failures;
            continue;
        }

        // FCFS: per stage, service starts follow stage-arrival order.
        for (int i = 0; i < n_stages; ++i) {
            std::vector<std::pair<std::pair<double, std::uint64_t>, double>> order;
            order.reserve(departed.size());
            for (const JobRecord& job : departed) {
                const double stage_arrival =
                    i == 0 ? job.arrival_time : job.per_stage_departure[i - 1];
                order.push_back({{stage_arrival, job.job_id}, job.per_stage_start[i]});
            }
            std::sort(order.begin(), order.end());
            for (std::size_t k = 1; k < order.size(); ++k) {
                if (order[k].second < order[k - 1].second) {
                    ++fcfs_failures;
                    break;
                }
            }
        }

        // Work conservation across rate changes: integral of the recorded
        // rate schedule over each service interval equals the drawn work.
        for (const JobRecord& job : departed) {
            for (int i = 0; i < n_stages; ++i) {
                const double integral =
                    integrate_rate(schedule, i, job.per_stage_start[i],
                                   job.per_stage_departure[i]);
                const double err = std::abs(integral - job.per_stage_work[i]);
                const double rel = err / std::max(job.per_stage_work[i], 1e-300);
                if (err > 1e-12) worst_rel_err = std::max(worst_rel_err, rel);
                ++jobs_checked;
            }
        }
    }

    check.measured = worst_rel_err;
    check.pass = audit_failures == 0 && fcfs_failures == 0 && worst_rel_err <= check.tolerance;
    std::ostringstream detail;
    detail << options.n_random_schedules << " schedules, " << jobs_checked
           << " job-stages; audit failures " << audit_failures << ", fcfs failures "
           << fcfs_failures;
    check.detail = detail.str();
    return check;
}

}  // namespace

std::vector<CheckResult> run_sim_validation(const ValidationOptions& options) {
    std::vector<CheckResult> results;
    results.push_back(check_deterministic_toy());
    results.push_back(check_deterministic_slot_accounting());
    results.push_back(check_mm1_tail(options));
    results.push_back(check_tandem_mean_delay(options));
    results.push_back(check_random_schedules(options));
    return results;
}

bool all_passed(const std::vector<CheckResult>& results) {
    return std::all_of(results.begin(), results.end(),
                       [](const CheckResult& r) { return r.pass; });
}

std::string format_validation_report(const std::vector<CheckResult>& results) {
    std::ostringstream out;
    for (const CheckResult& r : results) {
        out << (r.pass ? "PASS" : "FAIL") << "  " << r.name << ": measured " << r.measured
            << ", target " << r.target << ", tolerance " << r.tolerance;
        if (!r.detail.empty()) out << "  (" << r.detail << ")";
        out << "\n";
    }
    return out.str();
}

}  // namespace ratectl

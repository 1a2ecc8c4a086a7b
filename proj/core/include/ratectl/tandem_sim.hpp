#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <queue>
#include <span>
#include <unordered_map>
#include <vector>

#include "ratectl/distributions.hpp"

namespace ratectl {

// Tandem network description. Service demands are drawn in *work units*
// (service_work should have mean 1); the time a job occupies a server is
// work / rate, so the mean service time at rate mu is 1/mu and mid-slot rate
// changes conserve the remaining work.
struct NetworkConfig {
    std::vector<int> servers_per_stage;
    DistSpec arrival = DistSpec::exponential(1.0);
    std::vector<DistSpec> service_work;
    std::vector<double> mu_min;
    std::vector<double> mu_max;

    int n_stages() const { return static_cast<int>(servers_per_stage.size()); }
    double arrival_rate() const { return 1.0 / arrival.mean; }

    // Throws std::invalid_argument on shape mismatches, non-positive rate
    // bounds, or an unstable weakest action (lambda / (c_i * mu_min_i) >= 1).
    void validate() const;
};

// Per-customer trace. Times are -1 while pending.
struct JobRecord {
    static constexpr double kPending = -1.0;

    std::uint64_t job_id = 0;
    double arrival_time = 0.0;
    std::vector<double> per_stage_start;
    std::vector<double> per_stage_departure;
    std::vector<double> per_stage_work;  // drawn work demands, for auditing
    double network_departure_time = kPending;
    double end_to_end_delay = kPending;

    bool departed() const { return network_departure_time >= 0.0; }
};

// One arrival resolved by the slot accounting rule. `censored` marks jobs
// still in system at the slot end whose sojourn already exceeds d_ub; their
// exact delay is unknown but their bound status is not.
struct ResolvedArrival {
    std::uint64_t job_id = 0;
    double arrival_time = 0.0;
    double delay = -1.0;       // exact when !censored, meaningless otherwise
    bool censored = false;
    double resolve_time = 0.0; // departure time, or the slot end for censored jobs
};

struct SlotOutcome {
    double window_start = 0.0;
    double window_end = 0.0;
    std::vector<ResolvedArrival> completed_jobs;  // the eligible arrival set
    int n_arrivals_in_window = 0;
    int n_excluded = 0;  // arrived within d_ub of the slot end, still in system
    std::vector<int> end_queue_lengths;
    double sum_rate = 0.0;  // sum_n c_n * rate_n held during the slot

    // Over every departure in the slot, regardless of which slot the job
    // arrived in. Drives episode termination checks.
    double max_departed_delay = 0.0;
    int n_departures = 0;
};

// Discrete-event simulation of the tandem network. Single-threaded; service
// rates are piecewise constant between set_rates calls. Event ties are broken
// deterministically: departures before arrivals, then lower stage, then lower
// job id.
class TandemSimulator {
public:
    TandemSimulator(NetworkConfig config, std::uint64_t seed);

    const NetworkConfig& config() const { return config_; }
    double clock() const { return clock_; }
    const std::vector<double>& current_rates() const { return rates_; }

    // Queue length per stage: waiting plus in service.
    std::vector<int> queue_lengths() const;

    std::uint64_t total_arrivals() const { return arrivals_; }
    std::uint64_t total_departures() const { return departures_; }
    std::uint64_t in_system() const { return static_cast<std::uint64_t>(active_jobs_.size()); }

    // Rates outside [mu_min, mu_max] are clamped (counted in clamp_events).
    // In-flight jobs keep their remaining work; their completion times are
    // re-keyed to remaining_work / new_rate.
    void set_rates(std::span<const double> rates);
    std::uint64_t clamp_events() const { return clamp_events_; }

    // Advances to t_end, processing every event in (clock, t_end]. Returns
    // the records of jobs that left the network in that interval, in
    // departure order.
    std::vector<JobRecord> run_until(double t_end);

    // set_rates + run_until(clock + slot_len), plus the arrival accounting:
    // an arrival in the window belongs to the eligible set unless it lands in
    // the final d_ub of the slot and has not departed by the slot end.
    // Requires slot_len > d_ub (throws std::invalid_argument otherwise).
    SlotOutcome run_slot(std::span<const double> rates, double slot_len, double d_ub);

    // Structural invariants: flow conservation, busy-server counts, work
    // conservation (no idle server while its stage has waiters). Throws
    // std::logic_error with a description on violation. Test support.
    void audit_invariants() const;

private:
    enum EventKind : int { kDeparture = 0, kArrival = 1 };

    struct Event {
        double time;
        int kind;
        int stage;
        std::uint64_t job_id;
        std::uint64_t seq;   // matches InService::seq, 0 for arrivals
        int server_slot;     // -1 for arrivals

        bool operator>(const Event& other) const {
            if (time != other.time) return time > other.time;
            if (kind != other.kind) return kind > other.kind;
            if (stage != other.stage) return stage > other.stage;
            return job_id > other.job_id;
        }
    };

    struct InService {
        std::uint64_t job_id = 0;
        double work_remaining = 0.0;
        double work_asof = 0.0;  // clock time work_remaining refers to
        std::uint64_t seq = 0;   // bumped on every (re)schedule
    };

    struct Stage {
        int n_servers = 0;
        int busy = 0;
        std::deque<std::uint64_t> waiting;
        std::vector<std::optional<InService>> servers;
    };

    void schedule_external_arrival();
    void start_service(int stage_idx, int server_slot, std::uint64_t job_id);
    void handle_arrival(const Event& ev, std::vector<JobRecord>& departed);
    void handle_departure(const Event& ev, std::vector<JobRecord>& departed);

    NetworkConfig config_;
    double clock_ = 0.0;
    std::vector<double> rates_;
    std::vector<Stage> stages_;
    std::priority_queue<Event, std::vector<Event>, std::greater<Event>> events_;

    VariateStream interarrival_;
    std::vector<VariateStream> work_streams_;

    std::unordered_map<std::uint64_t, JobRecord> active_jobs_;
    std::uint64_t next_job_id_ = 1;
    std::uint64_t arrivals_ = 0;
    std::uint64_t departures_ = 0;
    std::uint64_t seq_counter_ = 0;
    std::uint64_t clamp_events_ = 0;

    // Arrivals observed since the last run_slot started, for slot accounting.
    std::vector<std::pair<std::uint64_t, double>> window_arrivals_;
    bool logging_window_arrivals_ = false;
};

}  // namespace ratectl

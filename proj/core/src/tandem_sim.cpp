#include "ratectl/tandem_sim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ratectl {

namespace {

std::vector<VariateStream> make_work_streams(const NetworkConfig& config, std::uint64_t seed) {
    std::vector<VariateStream> streams;
    streams.reserve(config.service_work.size());
    for (std::size_t i = 0; i < config.service_work.size(); ++i) {
        streams.emplace_back(config.service_work[i],
                             derive_subseed(seed, SeedComponent::stage_service, i));
    }
    return streams;
}

}  // namespace

void NetworkConfig::validate() const {
    const std::size_t n = servers_per_stage.size();
    if (n == 0) {
        throw std::invalid_argument("network needs at least one stage");
    }
    if (service_work.size() != n || mu_min.size() != n || mu_max.size() != n) {
        throw std::invalid_argument("per-stage config lists must all have length n_stages");
    }
    arrival.validate();
    const double lambda = arrival_rate();
    for (std::size_t i = 0; i < n; ++i) {
        if (servers_per_stage[i] <= 0) {
            throw std::invalid_argument("servers_per_stage must be positive");
        }
        service_work[i].validate();
        if (!(mu_min[i] > 0.0) || !(mu_min[i] < mu_max[i])) {
            throw std::invalid_argument("need 0 < mu_min < mu_max at stage " + std::to_string(i));
        }
        // Stability guardrail: utilization below 1 at the weakest action.
        // With the mean-1 work convention this is lambda / (c * mu_min).
        const double rho_weakest =
            lambda * service_work[i].mean / (servers_per_stage[i] * mu_min[i]);
        if (rho_weakest >= 1.0) {
            throw std::invalid_argument(
                "unstable at mu_min: lambda * mean_work / (c * mu_min) >= 1 at stage " +
                std::to_string(i));
        }
    }
}

TandemSimulator::TandemSimulator(NetworkConfig config, std::uint64_t seed)
    : config_(std::move(config)),
      rates_(config_.mu_max),
      interarrival_(config_.arrival, derive_subseed(seed, SeedComponent::arrival_process)),
      work_streams_(make_work_streams(config_, seed)) {
    config_.validate();
    stages_.resize(config_.n_stages());
    for (int i = 0; i < config_.n_stages(); ++i) {
        stages_[i].n_servers = config_.servers_per_stage[i];
        stages_[i].servers.resize(config_.servers_per_stage[i]);
    }
    schedule_external_arrival();
}

std::vector<int> TandemSimulator::queue_lengths() const {
    std::vector<int> lengths(stages_.size());
    for (std::size_t i = 0; i < stages_.size(); ++i) {
        lengths[i] = static_cast<int>(stages_[i].waiting.size()) + stages_[i].busy;
    }
    return lengths;
}

void TandemSimulator::schedule_external_arrival() {
    const double t = clock_ + interarrival_.next();
    events_.push(Event{t, kArrival, 0, next_job_id_++, 0, -1});
}

void TandemSimulator::set_rates(std::span<const double> rates) {
    if (rates.size() != static_cast<std::size_t>(config_.n_stages())) {
        throw std::invalid_argument("rate vector length must equal n_stages");
    }
    for (int i = 0; i < config_.n_stages(); ++i) {
        double r = rates[i];
        const double clamped = std::clamp(r, config_.mu_min[i], config_.mu_max[i]);
        if (clamped != r) ++clamp_events_;
        r = clamped;
        if (r == rates_[i]) continue;

        Stage& stage = stages_[i];
        for (int slot = 0; slot < stage.n_servers; ++slot) {
            if (!stage.servers[slot]) continue;
            InService& sv = *stage.servers[slot];
            const double done = (clock_ - sv.work_asof) * rates_[i];
            sv.work_remaining = std::max(0.0, sv.work_remaining - done);
            sv.work_asof = clock_;
            sv.seq = ++seq_counter_;
            events_.push(Event{clock_ + sv.work_remaining / r, kDeparture, i, sv.job_id, sv.seq,
                               slot});
        }
        rates_[i] = r;
    }
}

void TandemSimulator::start_service(int stage_idx, int server_slot, std::uint64_t job_id) {
    Stage& stage = stages_[stage_idx];
    const double work = work_streams_[stage_idx].next();
    JobRecord& job = active_jobs_.at(job_id);
    job.per_stage_start[stage_idx] = clock_;
    job.per_stage_work[stage_idx] = work;

    stage.servers[server_slot] = InService{job_id, work, clock_, ++seq_counter_};
    ++stage.busy;
    events_.push(Event{clock_ + work / rates_[stage_idx], kDeparture, stage_idx, job_id,
                       seq_counter_, server_slot});
}

void TandemSimulator::handle_arrival(const Event& ev, std::vector<JobRecord>&) {
    const int stage_idx = ev.stage;
    if (stage_idx == 0) {
        JobRecord job;
        job.job_id = ev.job_id;
        job.arrival_time = clock_;
        job.per_stage_start.assign(config_.n_stages(), JobRecord::kPending);
        job.per_stage_departure.assign(config_.n_stages(), JobRecord::kPending);
        job.per_stage_work.assign(config_.n_stages(), JobRecord::kPending);
        active_jobs_.emplace(ev.job_id, std::move(job));
        ++arrivals_;
        if (logging_window_arrivals_) {
            window_arrivals_.emplace_back(ev.job_id, clock_);
        }
        schedule_external_arrival();
    }

    Stage& stage = stages_[stage_idx];
    if (stage.busy < stage.n_servers) {
        int slot = 0;
        while (stage.servers[slot]) ++slot;
        start_service(stage_idx, slot, ev.job_id);
    } else {
        stage.waiting.push_back(ev.job_id);
    }
}

void TandemSimulator::handle_departure(const Event& ev, std::vector<JobRecord>& departed) {
    Stage& stage = stages_[ev.stage];
    auto& server = stage.servers[ev.server_slot];
    JobRecord& job = active_jobs_.at(ev.job_id);
    job.per_stage_departure[ev.stage] = clock_;

    server.reset();
    --stage.busy;
    if (!stage.waiting.empty()) {
        const std::uint64_t next_id = stage.waiting.front();
        stage.waiting.pop_front();
        start_service(ev.stage, ev.server_slot, next_id);
    }

    if (ev.stage + 1 < config_.n_stages()) {
        events_.push(Event{clock_, kArrival, ev.stage + 1, ev.job_id, 0, -1});
    } else {
        job.network_departure_time = clock_;
        job.end_to_end_delay = clock_ - job.arrival_time;
        ++departures_;
        departed.push_back(std::move(job));
        active_jobs_.erase(ev.job_id);
    }
}

std::vector<JobRecord> TandemSimulator::run_until(double t_end) {
    if (t_end < clock_) {
        throw std::invalid_argument("run_until target precedes the current clock");
    }
    std::vector<JobRecord> departed;
    while (!events_.empty() && events_.top().time <= t_end) {
        const Event ev = events_.top();
        events_.pop();
        if (ev.kind == kDeparture) {
            // Stale completion events are skipped; the server entry carries
            // the sequence number of its live event.
            const auto& server = stages_[ev.stage].servers[ev.server_slot];
            if (!server || server->seq != ev.seq) continue;
            clock_ = ev.time;
            handle_departure(ev, departed);
        } else {
            clock_ = ev.time;
            handle_arrival(ev, departed);
        }
    }
    clock_ = t_end;
    return departed;
}

SlotOutcome TandemSimulator::run_slot(std::span<const double> rates, double slot_len,
                                      double d_ub) {
    if (!(slot_len > d_ub)) {
        throw std::invalid_argument("slot length must exceed the delay bound");
    }
    const double t_start = clock_;
    const double t_end = t_start + slot_len;

    window_arrivals_.clear();
    logging_window_arrivals_ = true;
    set_rates(rates);
    std::vector<JobRecord> departed = run_until(t_end);
    logging_window_arrivals_ = false;

    SlotOutcome outcome;
    outcome.window_start = t_start;
    outcome.window_end = t_end;
    outcome.n_arrivals_in_window = static_cast<int>(window_arrivals_.size());
    outcome.end_queue_lengths = queue_lengths();
    outcome.n_departures = static_cast<int>(departed.size());
    for (int i = 0; i < config_.n_stages(); ++i) {
        outcome.sum_rate += config_.servers_per_stage[i] * rates_[i];
    }

    std::unordered_map<std::uint64_t, const JobRecord*> departed_by_id;
    departed_by_id.reserve(departed.size());
    for (const JobRecord& job : departed) {
        departed_by_id.emplace(job.job_id, &job);
        outcome.max_departed_delay = std::max(outcome.max_departed_delay, job.end_to_end_delay);
    }

    for (const auto& [job_id, arrival_time] : window_arrivals_) {
        if (auto it = departed_by_id.find(job_id); it != departed_by_id.end()) {
            outcome.completed_jobs.push_back(ResolvedArrival{
                job_id, arrival_time, it->second->end_to_end_delay, false,
                it->second->network_departure_time});
        } else if (arrival_time < t_end - d_ub) {
            // Still in system with sojourn already above d_ub: a violation
            // with censored delay.
            outcome.completed_jobs.push_back(
                ResolvedArrival{job_id, arrival_time, -1.0, true, t_end});
        } else {
            // Bound status unresolved by the slot end; excluded from the
            // accounting for good.
            ++outcome.n_excluded;
        }
    }
    return outcome;
}

void TandemSimulator::audit_invariants() const {
    const auto fail = [](const std::string& what) { throw std::logic_error("audit: " + what); };

    std::size_t in_stages = 0;
    for (std::size_t i = 0; i < stages_.size(); ++i) {
        const Stage& stage = stages_[i];
        int occupied = 0;
        for (const auto& server : stage.servers) {
            if (!server) continue;
            ++occupied;
            if (!active_jobs_.contains(server->job_id)) fail("in-service job not active");
            if (server->work_remaining < 0.0) fail("negative remaining work");
        }
        if (occupied != stage.busy) fail("busy count does not match occupied servers");
        if (stage.busy > stage.n_servers) fail("busy servers exceed stage capacity");
        if (!stage.waiting.empty() && stage.busy < stage.n_servers) {
            fail("idle server while jobs wait at stage " + std::to_string(i));
        }
        for (std::uint64_t id : stage.waiting) {
            if (!active_jobs_.contains(id)) fail("waiting job not active");
        }
        in_stages += stage.waiting.size() + static_cast<std::size_t>(stage.busy);
    }
    if (in_stages != active_jobs_.size()) fail("active job count does not match stage contents");
    if (arrivals_ != departures_ + active_jobs_.size()) {
        fail("flow conservation: arrivals != departures + in-system");
    }
}

}  // namespace ratectl

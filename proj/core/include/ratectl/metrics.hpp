#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ratectl/tandem_sim.hpp"

namespace ratectl {

// Accumulators for one fixed-length time window. Jobs are attributed to the
// window containing their resolve time (departure, or the slot end for
// censored jobs); slot-level quantities are split across windows by overlap
// duration.
struct WindowPoint {
    std::int64_t index = 0;
    double time_start = 0.0;
    int n_completed = 0;
    int n_violations = 0;
    double covered_time = 0.0;
    double sum_rate_time = 0.0;  // integral of sum_rate over covered time
    double reward_time = 0.0;

    // Absent (not zero) when no job resolved inside the window.
    std::optional<double> violation_prob() const {
        if (n_completed == 0) return std::nullopt;
        return static_cast<double>(n_violations) / n_completed;
    }
    double mean_sum_rate() const { return covered_time > 0 ? sum_rate_time / covered_time : 0; }
    double mean_reward() const { return covered_time > 0 ? reward_time / covered_time : 0; }
};

struct RunSummary {
    std::uint64_t total_arrivals = 0;
    std::uint64_t total_eligible = 0;
    std::uint64_t total_violations = 0;
    double violation_prob = 0.0;
    double violation_ci = 0.0;  // normal-approximation half width (1.96 sigma)
    double mean_sum_rate = 0.0;
    double mean_reward = 0.0;
    double horizon = 0.0;
};

// Streaming collector over time-ordered slots. d_ub only fixes the violation
// predicate for exact delays; censored jobs always count as violations.
class WindowStats {
public:
    explicit WindowStats(double d_ub, double window_len = 1000.0);

    double window_len() const { return window_len_; }

    // Throws std::invalid_argument if the slot starts before the previous
    // slot's end.
    void ingest_slot(const SlotOutcome& outcome, double reward);

    const std::vector<WindowPoint>& windows() const { return windows_; }
    RunSummary summarize_run() const;

private:
    WindowPoint& window_at(double time);

    double d_ub_;
    double window_len_;
    double last_slot_end_ = 0.0;
    bool any_slot_ = false;
    std::vector<WindowPoint> windows_;

    std::uint64_t total_arrivals_ = 0;
    std::uint64_t total_eligible_ = 0;
    std::uint64_t total_violations_ = 0;
    double sum_rate_time_ = 0.0;
    double reward_time_ = 0.0;
    double covered_time_ = 0.0;
    double first_slot_start_ = 0.0;
};

// One aligned point of a multi-series curve (x = time or episode index).
struct CurvePoint {
    double x = 0.0;
    std::optional<double> violation;
    double sum_rate = 0.0;
    double reward = 0.0;
};

struct SummaryPoint {
    double x = 0.0;
    std::optional<double> violation_mean;
    double violation_se = 0.0;
    double sum_rate_mean = 0.0;
    double sum_rate_se = 0.0;
    double reward_mean = 0.0;
    double reward_se = 0.0;
    int n_series = 0;
};

struct CurveSummary {
    std::vector<SummaryPoint> points;
    int n_series = 0;
    bool truncated = false;  // inputs had unequal lengths
};

// Pointwise mean and standard error (sample std / sqrt(n)) across seeds.
// Series of unequal length are truncated to the shortest, with a flag.
CurveSummary summarize(const std::vector<std::vector<CurvePoint>>& per_seed);

std::vector<CurvePoint> window_curve(const WindowStats& stats);

// Stable CSV schema:
// index,time,violation_prob,violation_se,sum_rate,sum_rate_se,reward,reward_se
// Floats carry 9 significant digits; absent violation cells are empty.
void export_csv(const CurveSummary& summary, const std::string& path);
CurveSummary parse_summary_csv(const std::string& path);

// Shared float formatting for all CSV output (9 significant digits).
std::string format_csv_double(double value);

}  // namespace ratectl

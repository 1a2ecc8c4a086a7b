#include "ratectl/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ratectl {

WindowStats::WindowStats(double d_ub, double window_len) : d_ub_(d_ub), window_len_(window_len) {
    if (!(d_ub > 0.0)) throw std::invalid_argument("d_ub must be positive");
    if (!(window_len > 0.0)) throw std::invalid_argument("window_len must be positive");
}

WindowPoint& WindowStats::window_at(double time) {
    const auto idx = static_cast<std::int64_t>(std::floor(time / window_len_));
    const auto needed = static_cast<std::size_t>(std::max<std::int64_t>(idx, 0)) + 1;
    while (windows_.size() < needed) {
        WindowPoint w;
        w.index = static_cast<std::int64_t>(windows_.size());
        w.time_start = static_cast<double>(w.index) * window_len_;
        windows_.push_back(w);
    }
    return windows_[static_cast<std::size_t>(std::max<std::int64_t>(idx, 0))];
}

void WindowStats::ingest_slot(const SlotOutcome& outcome, double reward) {
    if (any_slot_ && outcome.window_start < last_slot_end_ - 1e-9) {
        throw std::invalid_argument("slots must be ingested in time order");
    }
    if (!any_slot_) {
        first_slot_start_ = outcome.window_start;
        any_slot_ = true;
    }
    last_slot_end_ = outcome.window_end;

    total_arrivals_ += static_cast<std::uint64_t>(outcome.n_arrivals_in_window);
    for (const ResolvedArrival& job : outcome.completed_jobs) {
        const bool violated = job.censored || job.delay >= d_ub_;
        ++total_eligible_;
        if (violated) ++total_violations_;

        WindowPoint& w = window_at(job.resolve_time);
        ++w.n_completed;
        if (violated) ++w.n_violations;
    }

    // Split the slot's time-weighted quantities across the windows it spans.
    double cursor = outcome.window_start;
    while (cursor < outcome.window_end - 1e-12) {
        WindowPoint& w = window_at(cursor);
        const double window_end = w.time_start + window_len_;
        const double piece = std::min(outcome.window_end, window_end) - cursor;
        w.covered_time += piece;
        w.sum_rate_time += outcome.sum_rate * piece;
        w.reward_time += reward * piece;
        cursor += piece;
    }
    const double slot_len = outcome.window_end - outcome.window_start;
    covered_time_ += slot_len;
    sum_rate_time_ += outcome.sum_rate * slot_len;
    reward_time_ += reward * slot_len;
}

RunSummary WindowStats::summarize_run() const {
    RunSummary s;
    s.total_arrivals = total_arrivals_;
    s.total_eligible = total_eligible_;
    s.total_violations = total_violations_;
    if (total_eligible_ > 0) {
        const double n = static_cast<double>(total_eligible_);
        s.violation_prob = static_cast<double>(total_violations_) / n;
        s.violation_ci = 1.96 * std::sqrt(s.violation_prob * (1.0 - s.violation_prob) / n);
    }
    if (covered_time_ > 0.0) {
        s.mean_sum_rate = sum_rate_time_ / covered_time_;
        s.mean_reward = reward_time_ / covered_time_;
    }
    s.horizon = any_slot_ ? last_slot_end_ - first_slot_start_ : 0.0;
    return s;
}

std::vector<CurvePoint> window_curve(const WindowStats& stats) {
    std::vector<CurvePoint> curve;
    curve.reserve(stats.windows().size());
    for (const WindowPoint& w : stats.windows()) {
        CurvePoint p;
        p.x = w.time_start;
        p.violation = w.violation_prob();
        p.sum_rate = w.mean_sum_rate();
        p.reward = w.mean_reward();
        curve.push_back(p);
    }
    return curve;
}

namespace {

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
};

MeanSe mean_and_se(const std::vector<double>& values) {
    MeanSe out;
    const std::size_t n = values.size();
    if (n == 0) return out;
    for (double v : values) out.mean += v;
    out.mean /= static_cast<double>(n);
    if (n >= 2) {
        double ss = 0.0;
        for (double v : values) ss += (v - out.mean) * (v - out.mean);
        out.se = std::sqrt(ss / static_cast<double>(n - 1)) / std::sqrt(static_cast<double>(n));
    }
    return out;
}

}  // namespace

CurveSummary summarize(const std::vector<std::vector<CurvePoint>>& per_seed) {
    CurveSummary summary;
    if (per_seed.empty()) return summary;
    summary.n_series = static_cast<int>(per_seed.size());

    std::size_t shortest = per_seed.front().size();
    for (const auto& series : per_seed) {
        if (series.size() != shortest) summary.truncated = true;
        shortest = std::min(shortest, series.size());
    }

    summary.points.reserve(shortest);
    std::vector<double> violations;
    std::vector<double> sum_rates;
    std::vector<double> rewards;
    for (std::size_t i = 0; i < shortest; ++i) {
        violations.clear();
        sum_rates.clear();
        rewards.clear();
        for (const auto& series : per_seed) {
            if (series[i].violation) violations.push_back(*series[i].violation);
            sum_rates.push_back(series[i].sum_rate);
            rewards.push_back(series[i].reward);
        }
        SummaryPoint p;
        p.x = per_seed.front()[i].x;
        p.n_series = static_cast<int>(per_seed.size());
        if (!violations.empty()) {
            const MeanSe v = mean_and_se(violations);
            p.violation_mean = v.mean;
            p.violation_se = v.se;
        }
        const MeanSe r = mean_and_se(sum_rates);
        p.sum_rate_mean = r.mean;
        p.sum_rate_se = r.se;
        const MeanSe w = mean_and_se(rewards);
        p.reward_mean = w.mean;
        p.reward_se = w.se;
        summary.points.push_back(p);
    }
    return summary;
}

std::string format_csv_double(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", value);
    return buf;
}

void export_csv(const CurveSummary& summary, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write csv: " + path);
    out << "index,time,violation_prob,violation_se,sum_rate,sum_rate_se,reward,reward_se\n";
    for (std::size_t i = 0; i < summary.points.size(); ++i) {
        const SummaryPoint& p = summary.points[i];
        out << i << ',' << format_csv_double(p.x) << ',';
        if (p.violation_mean) {
            out << format_csv_double(*p.violation_mean) << ','
                << format_csv_double(p.violation_se);
        } else {
            out << ',';
        }
        out << ',' << format_csv_double(p.sum_rate_mean) << ','
            << format_csv_double(p.sum_rate_se) << ',' << format_csv_double(p.reward_mean) << ','
            << format_csv_double(p.reward_se) << '\n';
    }
    if (!out) throw std::runtime_error("csv write failed: " + path);
}

CurveSummary parse_summary_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open csv: " + path);
    CurveSummary summary;
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty csv: " + path);

    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        fields.resize(8);

        SummaryPoint p;
        p.x = std::stod(fields[1]);
        if (!fields[2].empty()) {
            p.violation_mean = std::stod(fields[2]);
            p.violation_se = fields[3].empty() ? 0.0 : std::stod(fields[3]);
        }
        p.sum_rate_mean = std::stod(fields[4]);
        p.sum_rate_se = std::stod(fields[5]);
        p.reward_mean = std::stod(fields[6]);
        p.reward_se = std::stod(fields[7]);
        summary.points.push_back(p);
    }
    return summary;
}

}  // namespace ratectl

#include "ratectl/tuning.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "ratectl/queueing_oracles.hpp"

namespace ratectl {

TrainOutcome train_controller(const TrainSpec& spec) {
    TandemEnv env(spec.network, spec.qos, spec.episode, spec.q_max, spec.seed);
    DdpgAgent agent(spec.network.n_stages(), spec.network.n_stages(), spec.q_max, spec.agent,
                    spec.seed);
    std::vector<EpisodeRecord> curve = train_loop(env, agent, spec.episodes);
    return TrainOutcome{std::move(curve), std::move(agent)};
}

namespace {

struct BatchCi {
    double mean = 0.0;
    double half_width = 0.0;
};

BatchCi batch_means_ci(const std::vector<double>& values) {
    BatchCi out;
    const std::size_t n = values.size();
    if (n == 0) return out;
    out.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
    if (n >= 2) {
        double ss = 0.0;
        for (double v : values) ss += (v - out.mean) * (v - out.mean);
        const double se = std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
        out.half_width = 1.96 * se;
    }
    return out;
}

}  // namespace

SweepResult lambda_sweep(const TrainSpec& base, const SweepOptions& options) {
    if (options.lambdas.empty()) throw std::invalid_argument("sweep needs at least one lambda");
    if (options.seeds.empty()) throw std::invalid_argument("sweep needs at least one seed");

    struct Cell {
        double lambda;
        std::size_t lambda_index;
        std::uint64_t seed_label;
    };
    std::vector<Cell> cells;
    for (std::size_t li = 0; li < options.lambdas.size(); ++li) {
        for (std::uint64_t seed : options.seeds) {
            cells.push_back(Cell{options.lambdas[li], li, seed});
        }
    }

    SweepResult result;
    result.rows.resize(cells.size());

    const auto run_cell = [&](std::size_t cell_index) {
        const Cell& cell = cells[cell_index];
        TrainSpec spec = base;
        spec.qos.lambda_tradeoff = cell.lambda;
        const std::uint64_t seed_stream =
            derive_subseed(options.master_seed, SeedComponent::training_run, cell.seed_label);
        spec.seed = derive_subseed(seed_stream, SeedComponent::training_run,
                                   cell.lambda_index + 1);

        TrainOutcome trained = train_controller(spec);

        // Evaluation seeds depend only on the master seed, so every lambda is
        // scored on the same sample paths.
        AgentPolicy policy(trained.agent);
        const std::uint64_t eval_seed =
            derive_subseed(options.master_seed, SeedComponent::evaluation_run, cell.seed_label);
        const EvalRun eval = evaluate_policy(spec.network, spec.qos, spec.q_max, policy,
                                             eval_seed, options.eval);

        std::vector<double> window_violations;
        std::vector<double> window_rates;
        for (const CurvePoint& p : eval.windows) {
            if (p.violation) window_violations.push_back(*p.violation);
            window_rates.push_back(p.sum_rate);
        }
        const BatchCi v = batch_means_ci(window_violations);
        const BatchCi r = batch_means_ci(window_rates);

        SweepCell row;
        row.lambda_tradeoff = cell.lambda;
        row.seed = cell.seed_label;
        row.violation_prob = eval.summary.violation_prob;
        row.violation_ci = v.half_width;
        row.avg_sum_rate = eval.summary.mean_sum_rate;
        row.sum_rate_ci = r.half_width;
        if (!options.checkpoint_dir.empty()) {
            std::ostringstream name;
            name << options.checkpoint_dir << "/ddpg_lambda" << cell.lambda << "_seed"
                 << cell.seed_label << ".ckpt";
            trained.agent.save(name.str());
            row.checkpoint_path = name.str();
        }
        result.rows[cell_index] = std::move(row);
    };

    unsigned n_threads = options.n_threads > 0 ? static_cast<unsigned>(options.n_threads)
                                               : std::thread::hardware_concurrency();
    n_threads = std::max(1u, std::min<unsigned>(n_threads, cells.size()));
    if (n_threads == 1) {
        for (std::size_t i = 0; i < cells.size(); ++i) run_cell(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> workers;
        workers.reserve(n_threads);
        for (unsigned t = 0; t < n_threads; ++t) {
            workers.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < cells.size(); i = next.fetch_add(1)) {
                    run_cell(i);
                }
            });
        }
        for (std::thread& w : workers) w.join();
    }
    return result;
}

std::vector<LambdaAggregate> aggregate_sweep(const SweepResult& result) {
    std::map<double, std::vector<const SweepCell*>> by_lambda;
    for (const SweepCell& row : result.rows) {
        by_lambda[row.lambda_tradeoff].push_back(&row);
    }

    std::vector<LambdaAggregate> table;
    table.reserve(by_lambda.size());
    for (const auto& [lambda, rows] : by_lambda) {
        LambdaAggregate agg;
        agg.lambda_tradeoff = lambda;
        agg.n_seeds = static_cast<int>(rows.size());
        std::vector<double> violations;
        std::vector<double> rates;
        for (const SweepCell* row : rows) {
            violations.push_back(row->violation_prob);
            rates.push_back(row->avg_sum_rate);
        }
        const BatchCi v = batch_means_ci(violations);
        const BatchCi r = batch_means_ci(rates);
        agg.violation_prob = v.mean;
        agg.avg_sum_rate = r.mean;
        agg.violation_ci = rows.size() >= 2 ? v.half_width : rows.front()->violation_ci;
        agg.sum_rate_ci = rows.size() >= 2 ? r.half_width : rows.front()->sum_rate_ci;
        table.push_back(agg);
    }
    return table;
}

LambdaSelection select_lambda(const SweepResult& result, double eps_ub) {
    if (result.rows.empty()) throw std::invalid_argument("select_lambda on an empty sweep");

    LambdaSelection selection;
    selection.table = aggregate_sweep(result);

    const LambdaAggregate* best = nullptr;
    for (const LambdaAggregate& agg : selection.table) {  // table sorted by lambda
        if (agg.violation_prob <= eps_ub + agg.violation_ci) {
            if (!best || agg.avg_sum_rate < best->avg_sum_rate) best = &agg;
        }
    }
    if (best) {
        selection.constraint_met_on_grid = true;
        selection.lambda_star = best->lambda_tradeoff;
        return selection;
    }

    // Nothing qualifies: closest violation to the budget, smaller lambda on ties.
    const LambdaAggregate* closest = nullptr;
    for (const LambdaAggregate& agg : selection.table) {
        if (!closest || std::abs(agg.violation_prob - eps_ub) <
                            std::abs(closest->violation_prob - eps_ub)) {
            closest = &agg;
        }
    }
    selection.constraint_met_on_grid = false;
    selection.lambda_star = closest->lambda_tradeoff;
    return selection;
}

void write_sweep_csv(const SweepResult& result, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write sweep csv: " + path);
    out << "lambda,seed,violation_prob,ci,sum_rate,ci,checkpoint_path\n";
    for (const SweepCell& row : result.rows) {
        out << format_csv_double(row.lambda_tradeoff) << ',' << row.seed << ','
            << format_csv_double(row.violation_prob) << ',' << format_csv_double(row.violation_ci)
            << ',' << format_csv_double(row.avg_sum_rate) << ','
            << format_csv_double(row.sum_rate_ci) << ',' << row.checkpoint_path << '\n';
    }
}

SweepResult parse_sweep_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open sweep csv: " + path);
    SweepResult result;
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        fields.resize(7);
        SweepCell row;
        row.lambda_tradeoff = std::stod(fields[0]);
        row.seed = std::stoull(fields[1]);
        row.violation_prob = std::stod(fields[2]);
        row.violation_ci = std::stod(fields[3]);
        row.avg_sum_rate = std::stod(fields[4]);
        row.sum_rate_ci = std::stod(fields[5]);
        row.checkpoint_path = fields[6];
        result.rows.push_back(std::move(row));
    }
    return result;
}

SlotLengthAdvisory slot_length_advisor(const QosSpec& qos, const NetworkConfig& network) {
    SlotLengthAdvisory advisory;
    advisory.d_ub = qos.d_ub;
    advisory.recommended_slot_lens = {1.5 * qos.d_ub, 3.0 * qos.d_ub, 10.0 * qos.d_ub};

    const double lambda = network.arrival_rate();
    for (int i = 0; i < network.n_stages(); ++i) {
        StageRelaxation r;
        r.stage = i;
        r.lambda_per_server = lambda / network.servers_per_stage[i];
        const double mid = 0.5 * (network.mu_min[i] + network.mu_max[i]);
        r.at_mu_min = relaxation_time_mm1(r.lambda_per_server, network.mu_min[i]);
        r.at_mu_mid = relaxation_time_mm1(r.lambda_per_server, mid);
        r.at_mu_max = relaxation_time_mm1(r.lambda_per_server, network.mu_max[i]);
        advisory.relaxation.push_back(r);
    }
    return advisory;
}

std::string format_advisory(const SlotLengthAdvisory& advisory) {
    std::ostringstream out;
    out << "delay bound d_ub = " << advisory.d_ub << "\n";
    out << "recommended slot lengths:";
    for (double t : advisory.recommended_slot_lens) out << ' ' << t;
    out << "\nper-stage M/M/1 relaxation times (per-server load, mu_min / mid / mu_max):\n";
    for (const StageRelaxation& r : advisory.relaxation) {
        out << "  stage " << r.stage << ": lambda/c = " << r.lambda_per_server << " -> "
            << r.at_mu_min << " / " << r.at_mu_mid << " / " << r.at_mu_max << "\n";
    }
    return out.str();
}

double rank_correlation(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw std::invalid_argument("rank correlation needs two equal-length series");
    }
    const auto ranks = [](std::span<const double> v) {
        const std::size_t n = v.size();
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return v[a] < v[b];
        });
        std::vector<double> rank(n);
        std::size_t i = 0;
        while (i < n) {
            std::size_t j = i;
            while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
            const double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
            for (std::size_t k = i; k <= j; ++k) rank[order[k]] = avg;
            i = j + 1;
        }
        return rank;
    };

    const std::vector<double> rx = ranks(x);
    const std::vector<double> ry = ranks(y);
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += rx[i];
        my += ry[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace ratectl

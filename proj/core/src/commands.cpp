#include "ratectl/commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "ratectl/metrics.hpp"
#include "ratectl/sim_validation.hpp"
#include "ratectl/tuning.hpp"

namespace ratectl {

namespace fs = std::filesystem;

namespace {

std::string curve_csv_path(const RunConfig& config, std::uint64_t seed_label) {
    return config.out_dir + "/curves_seed" + std::to_string(seed_label) + ".csv";
}

std::string checkpoint_path(const RunConfig& config, std::uint64_t seed_label) {
    return config.out_dir + "/ddpg_seed" + std::to_string(seed_label) + ".ckpt";
}

void write_curve_row(std::ofstream& out, const EpisodeRecord& rec, double slot_len) {
    out << rec.episode << ',' << format_csv_double(rec.env_steps_cum * slot_len) << ','
        << format_csv_double(rec.violation_prob) << ',' << format_csv_double(0.0) << ','
        << format_csv_double(rec.mean_sum_rate) << ',' << format_csv_double(0.0) << ','
        << format_csv_double(rec.mean_reward) << ',' << format_csv_double(0.0) << '\n';
}

std::vector<CurvePoint> summary_to_curve(const CurveSummary& summary) {
    std::vector<CurvePoint> curve;
    curve.reserve(summary.points.size());
    for (const SummaryPoint& p : summary.points) {
        CurvePoint c;
        c.x = p.x;
        c.violation = p.violation_mean;
        c.sum_rate = p.sum_rate_mean;
        c.reward = p.reward_mean;
        curve.push_back(c);
    }
    return curve;
}

std::vector<CurvePoint> eval_to_curve(const EvalRun& run) { return run.windows; }

TrainSpec train_spec_from(const RunConfig& config) {
    TrainSpec spec;
    spec.network = config.network;
    spec.qos = config.qos;
    spec.episode = config.episode;
    spec.agent = config.agent;
    spec.q_max = config.q_max;
    spec.episodes = config.train.episodes;
    return spec;
}

std::vector<double> parse_rate_list(const std::string& text) {
    std::vector<double> rates;
    std::stringstream ss(text);
    std::string field;
    while (std::getline(ss, field, ',')) {
        try {
            rates.push_back(std::stod(field));
        } catch (const std::exception&) {
            throw ConfigError("bad static rate value: " + field);
        }
    }
    return rates;
}

// Std dev of the seed-averaged per-window violation series, the short-term
// dispersion measure used to compare slot lengths.
double short_term_violation_std(const CurveSummary& mean_windows) {
    std::vector<double> values;
    for (const SummaryPoint& p : mean_windows.points) {
        if (p.violation_mean) values.push_back(*p.violation_mean);
    }
    if (values.size() < 2) return 0.0;
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

}  // namespace

int cmd_validate_sim(const RunConfig& config, std::ostream& out) {
    config.validate();
    ValidationOptions options;
    options.seed = config.master_seed;
    const std::vector<CheckResult> results = run_sim_validation(options);
    out << format_validation_report(results);
    if (!all_passed(results)) {
        out << "simulator validation FAILED\n";
        return kExitOracleFailure;
    }
    out << "simulator validation passed\n";
    return kExitOk;
}

int cmd_train(const RunConfig& config, std::ostream& out) {
    config.validate();
    fs::create_directories(config.out_dir);
    save_run_config(config, config.out_dir + "/resolved_config.json");

    for (const std::uint64_t seed_label : config.train.seeds) {
        const std::uint64_t run_seed =
            derive_subseed(config.master_seed, SeedComponent::training_run, seed_label);

        TandemEnv env(config.network, config.qos, config.episode, config.q_max, run_seed);
        env.use_running_arrival_estimate(config.use_running_arrival_estimate);

        const std::string ckpt = checkpoint_path(config, seed_label);
        const std::string curve_file = curve_csv_path(config, seed_label);

        std::optional<DdpgAgent> agent;
        bool resumed = false;
        if (config.resume && fs::exists(ckpt)) {
            agent.emplace(DdpgAgent::load(ckpt, config.agent, run_seed));
            if (agent->obs_dim() != config.network.n_stages()) {
                throw ConfigError("checkpoint dimension does not match the configured network");
            }
            env.fast_forward_episodes(agent->episodes_done());
            resumed = true;
        } else {
            agent.emplace(config.network.n_stages(), config.network.n_stages(), config.q_max,
                          config.agent, run_seed);
        }

        const int remaining = config.train.episodes - agent->episodes_done();
        std::ofstream curve_out;
        if (resumed) {
            curve_out.open(curve_file, std::ios::app);
        } else {
            curve_out.open(curve_file, std::ios::trunc);
            curve_out << "index,time,violation_prob,violation_se,sum_rate,sum_rate_se,"
                         "reward,reward_se\n";
        }
        if (!curve_out) throw std::runtime_error("cannot write curve csv: " + curve_file);

        TrainHooks hooks;
        hooks.planned_env_steps =
            static_cast<std::int64_t>(config.train.episodes) * env.max_steps();
        const double slot_len = config.qos.slot_len;
        hooks.on_episode = [&](const EpisodeRecord& rec) {
            write_curve_row(curve_out, rec, slot_len);
        };

        if (remaining > 0) {
            train_loop(env, *agent, remaining, hooks);
        }
        curve_out.close();
        agent->save(ckpt);

        out << "seed " << seed_label << ": " << agent->episodes_done() << " episodes, "
            << agent->env_steps() << " env steps" << (resumed ? " (resumed)" : "") << "\n";
    }

    // Across-seed mean curve, rebuilt from the per-seed files so resumed runs
    // aggregate the same way as fresh ones.
    std::vector<std::vector<CurvePoint>> curves;
    for (const std::uint64_t seed_label : config.train.seeds) {
        curves.push_back(summary_to_curve(parse_summary_csv(curve_csv_path(config, seed_label))));
    }
    export_csv(summarize(curves), config.out_dir + "/curves_mean.csv");
    out << "wrote " << config.out_dir << "/curves_mean.csv\n";
    return kExitOk;
}

int cmd_eval(const RunConfig& config, const std::string& checkpoint,
             const std::string& static_rates, std::ostream& out) {
    config.validate();
    if (checkpoint.empty() == static_rates.empty()) {
        throw ConfigError("eval needs exactly one of --checkpoint or --static-rates");
    }
    fs::create_directories(config.out_dir);
    save_run_config(config, config.out_dir + "/resolved_config.json");

    std::optional<DdpgAgent> agent;
    std::unique_ptr<Policy> policy;
    if (!static_rates.empty()) {
        policy = std::make_unique<StaticRatesPolicy>(parse_rate_list(static_rates),
                                                     config.network);
    } else {
        agent.emplace(DdpgAgent::load(checkpoint, config.agent, /*seed=*/0));
        if (agent->obs_dim() != config.network.n_stages()) {
            throw ConfigError("checkpoint trained for " + std::to_string(agent->obs_dim()) +
                              " stages but the config has " +
                              std::to_string(config.network.n_stages()));
        }
        policy = std::make_unique<AgentPolicy>(*agent);
    }

    std::ofstream summary_out(config.out_dir + "/summary.csv");
    summary_out << "seed,violation_prob,violation_ci,sum_rate,mean_reward,arrivals,eligible,"
                   "violations\n";

    std::vector<std::vector<CurvePoint>> all_windows;
    double violation_sum = 0.0;
    for (int j = 0; j < config.eval.n_seeds; ++j) {
        const std::uint64_t eval_seed =
            derive_subseed(config.master_seed, SeedComponent::evaluation_run, j);
        const EvalRun run = evaluate_policy(config.network, config.qos, config.q_max, *policy,
                                            eval_seed, config.eval);
        all_windows.push_back(eval_to_curve(run));
        export_csv(summarize({all_windows.back()}),
                   config.out_dir + "/windows_seed" + std::to_string(j) + ".csv");

        const RunSummary& s = run.summary;
        summary_out << j << ',' << format_csv_double(s.violation_prob) << ','
                    << format_csv_double(s.violation_ci) << ','
                    << format_csv_double(s.mean_sum_rate) << ','
                    << format_csv_double(s.mean_reward) << ',' << s.total_arrivals << ','
                    << s.total_eligible << ',' << s.total_violations << '\n';
        violation_sum += s.violation_prob;
        out << "eval seed " << j << ": violation " << format_csv_double(s.violation_prob)
            << " (ci " << format_csv_double(s.violation_ci) << "), sum-rate "
            << format_csv_double(s.mean_sum_rate) << "\n";
    }
    export_csv(summarize(all_windows), config.out_dir + "/windows_mean.csv");
    out << "mean violation over " << config.eval.n_seeds << " seeds: "
        << format_csv_double(violation_sum / config.eval.n_seeds) << "\n";
    return kExitOk;
}

namespace {

int run_lambda_sweep(const RunConfig& config, std::ostream& out) {
    TrainSpec base = train_spec_from(config);
    if (config.sweep.episodes > 0) base.episodes = config.sweep.episodes;

    const std::string ckpt_dir = config.out_dir + "/checkpoints";
    fs::create_directories(ckpt_dir);

    SweepOptions options;
    options.lambdas = config.sweep.lambdas;
    options.seeds = config.sweep.seeds;
    options.eval = config.eval;
    options.master_seed = config.master_seed;
    options.checkpoint_dir = ckpt_dir;
    options.n_threads = config.n_threads;

    const SweepResult result = lambda_sweep(base, options);
    write_sweep_csv(result, config.out_dir + "/sweep.csv");

    const LambdaSelection selection = select_lambda(result, config.qos.eps_ub);
    out << "lambda,violation_prob,violation_ci,sum_rate,n_seeds\n";
    for (const LambdaAggregate& agg : selection.table) {
        out << format_csv_double(agg.lambda_tradeoff) << ','
            << format_csv_double(agg.violation_prob) << ','
            << format_csv_double(agg.violation_ci) << ',' << format_csv_double(agg.avg_sum_rate)
            << ',' << agg.n_seeds << '\n';
    }
    out << "selected lambda* = " << selection.lambda_star
        << (selection.constraint_met_on_grid ? "" : "  (constraint unmet on grid)") << "\n";

    std::ofstream sel(config.out_dir + "/selected_lambda.txt");
    sel << selection.lambda_star << (selection.constraint_met_on_grid ? "" : " constraint-unmet")
        << "\n";
    return kExitOk;
}

int run_slot_len_sweep(const RunConfig& config, std::ostream& out) {
    out << format_advisory(slot_length_advisor(config.qos, config.network));

    std::ofstream table(config.out_dir + "/slot_sweep.csv");
    table << "slot_len,violation_prob,sum_rate,short_term_violation_std\n";

    for (const double slot_len : config.sweep.slot_lens) {
        TrainSpec spec = train_spec_from(config);
        spec.qos.slot_len = slot_len;
        if (config.sweep.episodes > 0) spec.episodes = config.sweep.episodes;
        const std::uint64_t seed_label = config.sweep.seeds.front();
        const std::uint64_t seed_stream =
            derive_subseed(config.master_seed, SeedComponent::training_run, seed_label);
        spec.seed = derive_subseed(seed_stream, SeedComponent::training_run,
                                   static_cast<std::uint64_t>(slot_len));

        TrainOutcome trained = train_controller(spec);
        AgentPolicy policy(trained.agent);

        std::vector<std::vector<CurvePoint>> windows;
        double violation_sum = 0.0;
        double rate_sum = 0.0;
        for (int j = 0; j < config.eval.n_seeds; ++j) {
            const std::uint64_t eval_seed =
                derive_subseed(config.master_seed, SeedComponent::evaluation_run, j);
            const EvalRun run = evaluate_policy(spec.network, spec.qos, spec.q_max, policy,
                                                eval_seed, config.eval);
            windows.push_back(run.windows);
            violation_sum += run.summary.violation_prob;
            rate_sum += run.summary.mean_sum_rate;
        }
        const CurveSummary mean_windows = summarize(windows);
        std::ostringstream name;
        name << config.out_dir << "/windows_T" << slot_len << ".csv";
        export_csv(mean_windows, name.str());

        const double dispersion = short_term_violation_std(mean_windows);
        table << format_csv_double(slot_len) << ','
              << format_csv_double(violation_sum / config.eval.n_seeds) << ','
              << format_csv_double(rate_sum / config.eval.n_seeds) << ','
              << format_csv_double(dispersion) << '\n';
        out << "T=" << slot_len << ": violation "
            << format_csv_double(violation_sum / config.eval.n_seeds)
            << ", short-term std " << format_csv_double(dispersion) << "\n";
    }
    return kExitOk;
}

}  // namespace

int cmd_sweep(const RunConfig& config, std::ostream& out) {
    config.validate();
    fs::create_directories(config.out_dir);
    save_run_config(config, config.out_dir + "/resolved_config.json");
    if (config.sweep.slot_lens.empty()) {
        return run_lambda_sweep(config, out);
    }
    return run_slot_len_sweep(config, out);
}

}  // namespace ratectl

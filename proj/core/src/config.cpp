#include "ratectl/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace ratectl {

using nlohmann::json;

namespace {

void check_keys(const json& j, const char* where, std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : j.items()) {
        bool known = false;
        for (const char* name : allowed) {
            if (key == name) {
                known = true;
                break;
            }
        }
        if (!known) {
            throw ConfigError(std::string("unknown key \"") + key + "\" in " + where);
        }
    }
}

DistSpec parse_dist(const json& j, const char* where) {
    if (!j.is_object()) throw ConfigError(std::string(where) + " must be an object");
    check_keys(j, where, {"family", "mean", "scv"});
    DistSpec spec;
    spec.family = dist_family_from_string(j.value("family", std::string("exponential")));
    spec.mean = j.value("mean", 1.0);
    spec.scv = j.contains("scv") ? j["scv"].get<double>()
                                 : (spec.family == DistFamily::exponential  ? 1.0
                                    : spec.family == DistFamily::deterministic ? 0.0
                                                                               : 1.0);
    return spec;
}

json dist_to_json(const DistSpec& spec) {
    return json{{"family", to_string(spec.family)}, {"mean", spec.mean}, {"scv", spec.scv}};
}

void parse_network(const json& j, NetworkConfig& network) {
    check_keys(j, "network",
               {"servers_per_stage", "arrival", "service_work", "mu_min", "mu_max"});
    if (j.contains("servers_per_stage")) {
        network.servers_per_stage = j["servers_per_stage"].get<std::vector<int>>();
    }
    if (j.contains("arrival")) network.arrival = parse_dist(j["arrival"], "network.arrival");
    if (j.contains("service_work")) {
        network.service_work.clear();
        for (const auto& item : j["service_work"]) {
            network.service_work.push_back(parse_dist(item, "network.service_work[]"));
        }
    }
    if (j.contains("mu_min")) network.mu_min = j["mu_min"].get<std::vector<double>>();
    if (j.contains("mu_max")) network.mu_max = j["mu_max"].get<std::vector<double>>();
}

void parse_qos(const json& j, QosSpec& qos) {
    check_keys(j, "qos", {"d_ub", "eps_ub", "lambda_tradeoff", "slot_len"});
    qos.d_ub = j.value("d_ub", qos.d_ub);
    qos.eps_ub = j.value("eps_ub", qos.eps_ub);
    qos.lambda_tradeoff = j.value("lambda_tradeoff", qos.lambda_tradeoff);
    qos.slot_len = j.value("slot_len", qos.slot_len);
}

void parse_episode(const json& j, EpisodeConfig& episode) {
    check_keys(j, "episode", {"delay_max", "episode_duration"});
    episode.delay_max = j.value("delay_max", episode.delay_max);
    episode.episode_duration = j.value("episode_duration", episode.episode_duration);
}

void parse_agent(const json& j, AgentConfig& agent) {
    check_keys(j, "agent",
               {"gamma", "tau", "batch_size", "actor_lr", "critic_lr", "buffer_capacity",
                "warmup_transitions", "hidden_sizes", "ou", "sigma_decay_fraction"});
    agent.gamma = j.value("gamma", agent.gamma);
    agent.tau = j.value("tau", agent.tau);
    agent.batch_size = j.value("batch_size", agent.batch_size);
    agent.actor_lr = j.value("actor_lr", agent.actor_lr);
    agent.critic_lr = j.value("critic_lr", agent.critic_lr);
    agent.buffer_capacity = j.value("buffer_capacity", agent.buffer_capacity);
    agent.warmup_transitions = j.value("warmup_transitions", agent.warmup_transitions);
    if (j.contains("hidden_sizes")) {
        agent.hidden_sizes = j["hidden_sizes"].get<std::vector<int>>();
    }
    if (j.contains("ou")) {
        const json& ou = j["ou"];
        check_keys(ou, "agent.ou", {"theta", "mu", "sigma_initial", "sigma_final"});
        agent.ou.theta = ou.value("theta", agent.ou.theta);
        agent.ou.mu = ou.value("mu", agent.ou.mu);
        agent.ou.sigma_initial = ou.value("sigma_initial", agent.ou.sigma_initial);
        agent.ou.sigma_final = ou.value("sigma_final", agent.ou.sigma_final);
    }
    agent.sigma_decay_fraction = j.value("sigma_decay_fraction", agent.sigma_decay_fraction);
}

}  // namespace

RunConfig default_run_config() {
    RunConfig config;
    config.network.servers_per_stage = {3, 5, 2};
    config.network.arrival = DistSpec::gamma(1.0 / 0.95, 0.7);
    config.network.service_work = {DistSpec::gamma(1.0, 0.8), DistSpec::gamma(1.0, 0.8),
                                   DistSpec::gamma(1.0, 0.8)};
    config.network.mu_min = {0.36, 0.21, 0.53};
    config.network.mu_max = {0.64, 0.39, 0.97};
    config.qos = QosSpec{};  // d_ub 10, eps_ub 0.1, lambda 14, T 30
    config.qos.arrival_rate = config.network.arrival_rate();
    config.episode = EpisodeConfig{};  // delay_max 100, duration 2000
    return config;
}

void RunConfig::validate() const {
    try {
        network.validate();
        qos.validate();
        episode.validate(qos);
        agent.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (q_max < 1) throw ConfigError("q_max must be positive");
    if (train.episodes < 0) throw ConfigError("train.episodes must be non-negative");
    if (train.seeds.empty()) throw ConfigError("train.seeds must not be empty");
    if (eval.n_seeds < 1) throw ConfigError("eval.n_seeds must be positive");
    if (eval.min_arrivals == 0) throw ConfigError("eval.min_arrivals must be positive");
    if (!(eval.window_len > 0.0)) throw ConfigError("eval.window_len must be positive");
    if (std::abs(qos.arrival_rate - network.arrival_rate()) > 1e-9) {
        throw ConfigError("qos.arrival_rate is derived from network.arrival; do not set it");
    }
}

RunConfig parse_run_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }

    RunConfig config = default_run_config();
    try {
        check_keys(j, "config",
                   {"network", "qos", "episode", "agent", "q_max", "train", "eval", "sweep",
                    "master_seed", "out_dir", "use_running_arrival_estimate", "n_threads"});
        if (j.contains("network")) parse_network(j["network"], config.network);
        if (j.contains("qos")) parse_qos(j["qos"], config.qos);
        if (j.contains("episode")) parse_episode(j["episode"], config.episode);
        if (j.contains("agent")) parse_agent(j["agent"], config.agent);
        config.q_max = j.value("q_max", config.q_max);
        if (j.contains("train")) {
            const json& t = j["train"];
            check_keys(t, "train", {"episodes", "seeds"});
            config.train.episodes = t.value("episodes", config.train.episodes);
            if (t.contains("seeds")) {
                config.train.seeds = t["seeds"].get<std::vector<std::uint64_t>>();
            }
        }
        if (j.contains("eval")) {
            const json& e = j["eval"];
            check_keys(e, "eval", {"min_arrivals", "window_len", "n_seeds"});
            config.eval.min_arrivals = e.value("min_arrivals", config.eval.min_arrivals);
            config.eval.window_len = e.value("window_len", config.eval.window_len);
            config.eval.n_seeds = e.value("n_seeds", config.eval.n_seeds);
        }
        if (j.contains("sweep")) {
            const json& s = j["sweep"];
            check_keys(s, "sweep", {"lambdas", "seeds", "slot_lens", "episodes"});
            if (s.contains("lambdas")) config.sweep.lambdas = s["lambdas"].get<std::vector<double>>();
            if (s.contains("seeds")) {
                config.sweep.seeds = s["seeds"].get<std::vector<std::uint64_t>>();
            }
            if (s.contains("slot_lens")) {
                config.sweep.slot_lens = s["slot_lens"].get<std::vector<double>>();
            }
            config.sweep.episodes = s.value("episodes", config.sweep.episodes);
        }
        config.master_seed = j.value("master_seed", config.master_seed);
        config.out_dir = j.value("out_dir", config.out_dir);
        config.use_running_arrival_estimate =
            j.value("use_running_arrival_estimate", config.use_running_arrival_estimate);
        config.n_threads = j.value("n_threads", config.n_threads);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config field has the wrong type: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }

    // The reward scale is tied to the arrival process.
    config.qos.arrival_rate = config.network.arrival_rate();
    config.validate();
    return config;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_run_config(buffer.str());
}

std::string run_config_to_json(const RunConfig& config) {
    json j;
    j["network"] = {
        {"servers_per_stage", config.network.servers_per_stage},
        {"arrival", dist_to_json(config.network.arrival)},
        {"mu_min", config.network.mu_min},
        {"mu_max", config.network.mu_max},
    };
    json work = json::array();
    for (const DistSpec& spec : config.network.service_work) work.push_back(dist_to_json(spec));
    j["network"]["service_work"] = work;
    j["qos"] = {{"d_ub", config.qos.d_ub},
                {"eps_ub", config.qos.eps_ub},
                {"lambda_tradeoff", config.qos.lambda_tradeoff},
                {"slot_len", config.qos.slot_len}};
    j["episode"] = {{"delay_max", config.episode.delay_max},
                    {"episode_duration", config.episode.episode_duration}};
    j["agent"] = {{"gamma", config.agent.gamma},
                  {"tau", config.agent.tau},
                  {"batch_size", config.agent.batch_size},
                  {"actor_lr", config.agent.actor_lr},
                  {"critic_lr", config.agent.critic_lr},
                  {"buffer_capacity", config.agent.buffer_capacity},
                  {"warmup_transitions", config.agent.warmup_transitions},
                  {"hidden_sizes", config.agent.hidden_sizes},
                  {"ou",
                   {{"theta", config.agent.ou.theta},
                    {"mu", config.agent.ou.mu},
                    {"sigma_initial", config.agent.ou.sigma_initial},
                    {"sigma_final", config.agent.ou.sigma_final}}},
                  {"sigma_decay_fraction", config.agent.sigma_decay_fraction}};
    j["q_max"] = config.q_max;
    j["train"] = {{"episodes", config.train.episodes}, {"seeds", config.train.seeds}};
    j["eval"] = {{"min_arrivals", config.eval.min_arrivals},
                 {"window_len", config.eval.window_len},
                 {"n_seeds", config.eval.n_seeds}};
    j["sweep"] = {{"lambdas", config.sweep.lambdas},
                  {"seeds", config.sweep.seeds},
                  {"slot_lens", config.sweep.slot_lens},
                  {"episodes", config.sweep.episodes}};
    j["master_seed"] = config.master_seed;
    j["out_dir"] = config.out_dir;
    j["use_running_arrival_estimate"] = config.use_running_arrival_estimate;
    j["n_threads"] = config.n_threads;
    return j.dump(2) + "\n";
}

void save_run_config(const RunConfig& config, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write config: " + path);
    out << run_config_to_json(config);
}

void apply_overrides(RunConfig& config, const CliOverrides& overrides) {
    if (overrides.seed) config.master_seed = *overrides.seed;
    if (overrides.episodes) config.train.episodes = *overrides.episodes;
    if (overrides.out_dir) config.out_dir = *overrides.out_dir;
    if (overrides.resume) config.resume = true;
    config.validate();
}

}  // namespace ratectl

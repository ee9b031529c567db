#pragma once

#include <fstream>
#include <map>
#include <sstream>

#include "sail/common.hpp"

namespace sail {

// Every knob of a training run. Defaults are desk-scale; `preset = paper`
// switches the network and batch sizes to the large-task values.
struct TrainConfig {
    std::string algo = "sail";
    std::string env = "pointmass";
    long total_env_steps = 100000;
    long warmup_steps = 1000;
    long eval_every = 2048;
    int eval_episodes = 10;
    std::uint64_t seed = 1;

    std::vector<int> actor_hidden = {32, 32};
    std::vector<int> critic_hidden = {32, 32};
    std::vector<int> disc_hidden = {32, 32};
    // Desk-scale runs are two orders of magnitude shorter than locomotion
    // ones, so the actor and discriminator take larger steps per update.
    double actor_lr = 1e-3;
    double critic_lr = 3e-4;
    double disc_lr = 1e-3;

    // Effective horizon 1/(1-gamma) of ten steps suits the desk-scale tasks;
    // the always-positive shaped reward otherwise pays loitering more than
    // finishing once the buffers overlap.
    double gamma = 0.9;
    double tau = 0.005;
    double sigma_act = 0.2;
    double sigma_tgt = 0.2;
    double noise_clip = 0.5;
    int policy_delay = 2;
    int batch_size = 64;
    bool single_q = false;

    double gp_coeff = 10.0;
    double disc_clamp_eps = 1e-6;

    long critic_update_every = 1000;
    long critic_grad_steps = 1000;
    long disc_update_every = 500;
    long disc_grad_steps = 10;

    long self_capacity = 100000;
    long teacher_capacity = 64;
    double alpha_init = 0.5;
    std::string alpha_anneal = "step";  // step | linear
    int alpha_anneal_events = 10;

    double pofd_lambda = 0.1;  // used by the pofd-mix reward only

    void validate() const;
};

inline const std::vector<std::string>& known_algos() {
    static const std::vector<std::string> algos = {"sail",          "sail-fixed-alpha", "sail-no-lfd",
                                                   "sail-no-adapt", "sail-onpolicy",    "td3-sparse",
                                                   "td3-dense",     "bc",               "pofd-mix"};
    return algos;
}

inline void TrainConfig::validate() const {
    bool algo_ok = false;
    for (const auto& a : known_algos()) algo_ok = algo_ok || a == algo;
    if (!algo_ok) throw ConfigError("unknown algo: " + algo);
    if (env != "pointmass" && env != "chain") throw ConfigError("unknown env: " + env);
    if (total_env_steps < 0) throw ConfigError("total_env_steps must be >= 0");
    if (warmup_steps < 0) throw ConfigError("warmup_steps must be >= 0");
    if (eval_every < 1) throw ConfigError("eval_every must be >= 1");
    if (eval_episodes < 1) throw ConfigError("eval_episodes must be >= 1");
    if (actor_hidden.empty() || critic_hidden.empty() || disc_hidden.empty())
        throw ConfigError("hidden layer lists must be non-empty");
    for (int h : actor_hidden)
        if (h < 1) throw ConfigError("actor_hidden entries must be >= 1");
    for (int h : critic_hidden)
        if (h < 1) throw ConfigError("critic_hidden entries must be >= 1");
    for (int h : disc_hidden)
        if (h < 1) throw ConfigError("disc_hidden entries must be >= 1");
    if (!(actor_lr > 0) || !(critic_lr > 0) || !(disc_lr > 0)) throw ConfigError("learning rates must be > 0");
    if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in (0,1)");
    if (!(tau > 0.0 && tau <= 1.0)) throw ConfigError("tau must lie in (0,1]");
    if (sigma_act < 0 || sigma_tgt < 0 || noise_clip < 0) throw ConfigError("noise scales must be >= 0");
    if (policy_delay < 1) throw ConfigError("policy_delay must be >= 1");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (!(gp_coeff >= 0)) throw ConfigError("gp_coeff must be >= 0");
    if (!(disc_clamp_eps > 0.0 && disc_clamp_eps < 0.5)) throw ConfigError("disc_clamp_eps must lie in (0, 0.5)");
    if (critic_update_every < 1 || critic_grad_steps < 1 || disc_update_every < 1 || disc_grad_steps < 1)
        throw ConfigError("update cadences must be >= 1");
    if (self_capacity < 1 || teacher_capacity < 1) throw ConfigError("buffer capacities must be >= 1");
    if (alpha_init < 0.0 || alpha_init > 1.0) throw ConfigError("alpha_init must lie in [0,1]");
    if (alpha_anneal != "step" && alpha_anneal != "linear") throw ConfigError("alpha_anneal must be step or linear");
    if (alpha_anneal_events < 1) throw ConfigError("alpha_anneal_events must be >= 1");
    if (pofd_lambda < 0.0) throw ConfigError("pofd_lambda must be >= 0");
}

namespace detail {

inline std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        out.push_back(std::stoi(item));
    }
    return out;
}

inline std::string int_list_to_string(const std::vector<int>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s;
}

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace detail

// Applies one key = value assignment. Throws ConfigError for unknown keys or
// unparseable values.
inline void apply_config_key(TrainConfig& c, const std::string& key, const std::string& value) {
    try {
        if (key == "preset") {
            if (value == "desk") return;  // the defaults
            if (value == "paper") {
                // Large-task sizes: actor/critic 400x300, discriminator
                // 256x256, batch 256.
                c.actor_hidden = {400, 300};
                c.critic_hidden = {400, 300};
                c.disc_hidden = {256, 256};
                c.batch_size = 256;
                return;
            }
            throw ConfigError("unknown preset: " + value);
        }
        if (key == "algo") c.algo = value;
        else if (key == "env") c.env = value;
        else if (key == "total_env_steps") c.total_env_steps = std::stol(value);
        else if (key == "warmup_steps") c.warmup_steps = std::stol(value);
        else if (key == "eval_every") c.eval_every = std::stol(value);
        else if (key == "eval_episodes") c.eval_episodes = std::stoi(value);
        else if (key == "seed") c.seed = std::stoull(value);
        else if (key == "actor_hidden") c.actor_hidden = detail::parse_int_list(value);
        else if (key == "critic_hidden") c.critic_hidden = detail::parse_int_list(value);
        else if (key == "disc_hidden") c.disc_hidden = detail::parse_int_list(value);
        else if (key == "actor_lr") c.actor_lr = std::stod(value);
        else if (key == "critic_lr") c.critic_lr = std::stod(value);
        else if (key == "disc_lr") c.disc_lr = std::stod(value);
        else if (key == "gamma") c.gamma = std::stod(value);
        else if (key == "tau") c.tau = std::stod(value);
        else if (key == "sigma_act") c.sigma_act = std::stod(value);
        else if (key == "sigma_tgt") c.sigma_tgt = std::stod(value);
        else if (key == "noise_clip") c.noise_clip = std::stod(value);
        else if (key == "policy_delay") c.policy_delay = std::stoi(value);
        else if (key == "batch_size") c.batch_size = std::stoi(value);
        else if (key == "single_q") c.single_q = value == "true" || value == "1";
        else if (key == "gp_coeff") c.gp_coeff = std::stod(value);
        else if (key == "disc_clamp_eps") c.disc_clamp_eps = std::stod(value);
        else if (key == "critic_update_every") c.critic_update_every = std::stol(value);
        else if (key == "critic_grad_steps") c.critic_grad_steps = std::stol(value);
        else if (key == "disc_update_every") c.disc_update_every = std::stol(value);
        else if (key == "disc_grad_steps") c.disc_grad_steps = std::stol(value);
        else if (key == "self_capacity") c.self_capacity = std::stol(value);
        else if (key == "teacher_capacity") c.teacher_capacity = std::stol(value);
        else if (key == "alpha_init") c.alpha_init = std::stod(value);
        else if (key == "alpha_anneal") c.alpha_anneal = value;
        else if (key == "alpha_anneal_events") c.alpha_anneal_events = std::stoi(value);
        else if (key == "pofd_lambda") c.pofd_lambda = std::stod(value);
        else throw ConfigError("unknown config key: " + key);
    } catch (const std::invalid_argument&) {
        throw ConfigError("bad value for " + key + ": " + value);
    } catch (const std::out_of_range&) {
        throw ConfigError("value out of range for " + key + ": " + value);
    }
}

// key = value lines with optional [section] headers and # comments. Sections
// are organizational only; keys are globally unique.
inline TrainConfig parse_config(std::istream& is, TrainConfig base = {}) {
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("config line " + std::to_string(lineno) + ": bad section");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        apply_config_key(base, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
    }
    return base;
}

inline TrainConfig load_config(const std::string& path, TrainConfig base = {}) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open config file: " + path);
    return parse_config(f, std::move(base));
}

inline void print_config(std::ostream& os, const TrainConfig& c) {
    os << "[run]\n";
    os << "algo = " << c.algo << "\n";
    os << "env = " << c.env << "\n";
    os << "total_env_steps = " << c.total_env_steps << "\n";
    os << "warmup_steps = " << c.warmup_steps << "\n";
    os << "eval_every = " << c.eval_every << "\n";
    os << "eval_episodes = " << c.eval_episodes << "\n";
    os << "seed = " << c.seed << "\n";
    os << "\n[nn]\n";
    os << "actor_hidden = " << detail::int_list_to_string(c.actor_hidden) << "\n";
    os << "critic_hidden = " << detail::int_list_to_string(c.critic_hidden) << "\n";
    os << "disc_hidden = " << detail::int_list_to_string(c.disc_hidden) << "\n";
    os << "actor_lr = " << c.actor_lr << "\n";
    os << "critic_lr = " << c.critic_lr << "\n";
    os << "disc_lr = " << c.disc_lr << "\n";
    os << "\n[agent]\n";
    os << "gamma = " << c.gamma << "\n";
    os << "tau = " << c.tau << "\n";
    os << "sigma_act = " << c.sigma_act << "\n";
    os << "sigma_tgt = " << c.sigma_tgt << "\n";
    os << "noise_clip = " << c.noise_clip << "\n";
    os << "policy_delay = " << c.policy_delay << "\n";
    os << "batch_size = " << c.batch_size << "\n";
    os << "single_q = " << (c.single_q ? "true" : "false") << "\n";
    os << "\n[discriminator]\n";
    os << "gp_coeff = " << c.gp_coeff << "\n";
    os << "disc_clamp_eps = " << c.disc_clamp_eps << "\n";
    os << "\n[cadence]\n";
    os << "critic_update_every = " << c.critic_update_every << "\n";
    os << "critic_grad_steps = " << c.critic_grad_steps << "\n";
    os << "disc_update_every = " << c.disc_update_every << "\n";
    os << "disc_grad_steps = " << c.disc_grad_steps << "\n";
    os << "\n[buffers]\n";
    os << "self_capacity = " << c.self_capacity << "\n";
    os << "teacher_capacity = " << c.teacher_capacity << "\n";
    os << "alpha_init = " << c.alpha_init << "\n";
    os << "alpha_anneal = " << c.alpha_anneal << "\n";
    os << "alpha_anneal_events = " << c.alpha_anneal_events << "\n";
    os << "\n[pofd]\n";
    os << "pofd_lambda = " << c.pofd_lambda << "\n";
}

}  // namespace sail

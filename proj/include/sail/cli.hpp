#pragma once

#include <chrono>
#include <filesystem>
#include <iostream>
#include <thread>

#include <json.hpp>

#include "sail/demo_io.hpp"
#include "sail/trainer.hpp"

namespace sail {

// Exit codes: 0 success, 2 configuration/usage, 3 io, 4 numerical divergence.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitNumeric = 4;

namespace fs = std::filesystem;

inline std::string resolve_out_path(const std::string& path) {
    const char* root = std::getenv("SAIL_OUT_ROOT");
    if (root && *root && fs::path(path).is_relative()) return (fs::path(root) / path).string();
    return path;
}

// ---- gen-demos -------------------------------------------------------------

struct GenDemosOptions {
    std::string env = "pointmass";
    double quality = 0.5;
    int n_traj = 1;
    std::uint64_t seed = 1;
    std::string out;
};

inline void cmd_gen_demos(const GenDemosOptions& opt, std::ostream& log) {
    auto env = make_env(opt.env);
    auto teacher = make_teacher(opt.env, opt.quality);
    Rng rng(opt.seed);
    DemoSet demos = generate_demonstrations(*env, teacher, opt.n_traj, rng);

    const std::string path = resolve_out_path(opt.out);
    if (!fs::path(path).parent_path().empty()) fs::create_directories(fs::path(path).parent_path());
    save_demos(path, demos.trajectories, demos.quality);

    log << "wrote " << demos.trajectories.size() << " trajectories to " << path << "\n";
    for (std::size_t k = 0; k < demos.trajectories.size(); ++k)
        log << "  trajectory " << k << ": return " << demos.trajectories[k].episodic_return << ", "
            << demos.trajectories[k].size() << " steps\n";
    log << "teacher mean return: " << demos.teacher_mean << "\n";
    log << "random-policy baseline (20 episodes): " << demos.random_mean << "\n";
    log << "teacher-quality assumption: " << (demos.assumption1_ok ? "holds" : "VIOLATED") << "\n";
    if (!demos.assumption1_ok)
        log << "warning: demonstrations do not beat the random baseline; imitation from them is unsupported\n";
}

// ---- run -------------------------------------------------------------------

struct RunOptions {
    std::string config_path;                  // optional
    std::vector<std::string> overrides;       // key=value pairs
    std::string algo;                         // optional, overrides config
    std::string env;                          // optional, overrides config
    std::string demos_path;                   // required by demo-using variants
    std::optional<std::uint64_t> seed;        // optional, overrides config
    std::string out_dir;
};

inline TrainConfig build_config(const std::string& config_path, const std::vector<std::string>& overrides,
                                const std::string& algo, const std::string& env,
                                const std::optional<std::uint64_t>& seed) {
    TrainConfig config;
    if (!config_path.empty()) config = load_config(config_path);
    for (const std::string& kv : overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("override must be key=value: " + kv);
        apply_config_key(config, detail::trim(kv.substr(0, eq)), detail::trim(kv.substr(eq + 1)));
    }
    if (!algo.empty()) config.algo = algo;
    if (!env.empty()) config.env = env;
    if (seed) config.seed = *seed;
    config.validate();
    return config;
}

struct RunOutcome {
    TrainConfig config;
    TrainResult result;
    double wall_time_s = 0.0;
    std::string status = "ok";
    std::string error;
};

inline nlohmann::json summary_json(const RunOutcome& outcome) {
    nlohmann::json j;
    j["algo"] = outcome.config.algo;
    j["env"] = outcome.config.env;
    j["seed"] = outcome.config.seed;
    j["status"] = outcome.status;
    if (!outcome.error.empty()) j["error"] = outcome.error;
    j["wall_time_s"] = outcome.wall_time_s;
    j["train_env_steps"] = outcome.result.train_env_steps;
    j["promotions"] = outcome.result.promotions;
    j["assumption1_ok"] = outcome.result.assumption1_ok;
    if (!outcome.result.log.records.empty()) {
        const auto& last = outcome.result.log.records.back();
        j["final_eval_mean"] = last.eval_mean_return;
        j["final_eval_std"] = last.eval_std;
        j["final_teacher_threshold"] = last.teacher_threshold;
    }
    return j;
}

inline int cmd_run(const RunOptions& opt, std::ostream& log) {
    TrainConfig config = build_config(opt.config_path, opt.overrides, opt.algo, opt.env, opt.seed);
    const VariantTraits traits = variant_traits(config.algo);

    std::vector<Trajectory> demos;
    if (traits.uses_demos) {
        if (opt.demos_path.empty()) throw ConfigError("algo " + config.algo + " requires --demos");
        demos = load_demos(opt.demos_path, &make_env(config.env)->spec());
    }

    const std::string dir = resolve_out_path(opt.out_dir);
    fs::create_directories(dir);

    std::ofstream csv(fs::path(dir) / "runlog.csv");
    if (!csv) throw IoError("cannot open run log for writing in " + dir);
    csv << runlog_csv_header() << "\n";
    csv.flush();

    RunOutcome outcome{.config = config, .result = {}};
    const auto t0 = std::chrono::steady_clock::now();
    try {
        Rng rng(config.seed);
        outcome.result = train(config, demos, rng, [&csv](const RunRecord& rec) {
            csv << runlog_csv_row(rec) << "\n";
            csv.flush();
        });
    } catch (const NumericError& e) {
        outcome.status = "diverged";
        outcome.error = e.what();
    }
    outcome.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    if (outcome.status == "ok") {
        std::ofstream ckpt(fs::path(dir) / "agent.ckpt");
        save_agent(ckpt, outcome.result.actor, outcome.result.critic);
    }
    std::ofstream summary(fs::path(dir) / "summary.json");
    summary << summary_json(outcome).dump(2) << "\n";

    log << summary_json(outcome).dump(2) << "\n";
    return outcome.status == "ok" ? kExitOk : kExitNumeric;
}

// ---- sweep -----------------------------------------------------------------

struct SweepRunSpec {
    TrainConfig config;
    std::string demos_path;
    std::string out_dir;
};

struct SweepPlan {
    std::vector<SweepRunSpec> runs;
    std::string out_root;
    int parallelism = 1;
};

inline SweepPlan load_manifest(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open manifest: " + path);
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("manifest parse error: ") + e.what());
    }

    SweepPlan plan;
    plan.out_root = resolve_out_path(j.value("output_dir", std::string("sweep-out")));
    plan.parallelism = std::max(1, j.value("parallelism", 1));

    std::vector<std::string> seen_paths;
    for (const auto& run : j.at("runs")) {
        SweepRunSpec spec;
        TrainConfig base;
        if (run.contains("config")) base = load_config(run.at("config").get<std::string>());
        if (run.contains("overrides"))
            for (const auto& [k, v] : run.at("overrides").items())
                apply_config_key(base, k, v.is_string() ? v.get<std::string>() : v.dump());
        if (run.contains("algo")) base.algo = run.at("algo").get<std::string>();
        if (run.contains("env")) base.env = run.at("env").get<std::string>();
        if (run.contains("seed")) base.seed = run.at("seed").get<std::uint64_t>();
        base.validate();
        spec.config = base;
        if (run.contains("demos")) spec.demos_path = run.at("demos").get<std::string>();
        const std::string stem = run.contains("name") ? run.at("name").get<std::string>() : base.algo + "-" + base.env;
        spec.out_dir = (fs::path(plan.out_root) / (stem + "-seed" + std::to_string(base.seed))).string();
        for (const auto& p : seen_paths)
            if (p == spec.out_dir) throw ConfigError("manifest: two runs share the output path " + spec.out_dir);
        seen_paths.push_back(spec.out_dir);
        plan.runs.push_back(std::move(spec));
    }
    if (plan.runs.empty()) throw ConfigError("manifest has no runs");
    return plan;
}

struct SweepRowResult {
    SweepRunSpec spec;
    std::string status = "ok";
    double final_eval_mean = 0.0;
    long steps_to_teacher = -1;  // -1: never reached / not applicable
    double demo_mean = 0.0;
    long promotions = 0;
};

inline SweepRowResult execute_sweep_run(const SweepRunSpec& spec) {
    SweepRowResult row{.spec = spec};
    try {
        const VariantTraits traits = variant_traits(spec.config.algo);
        std::vector<Trajectory> demos;
        if (traits.uses_demos) {
            if (spec.demos_path.empty()) throw ConfigError("run needs demos: " + spec.out_dir);
            demos = load_demos(spec.demos_path, &make_env(spec.config.env)->spec());
        } else if (!spec.demos_path.empty()) {
            demos = load_demos(spec.demos_path, &make_env(spec.config.env)->spec());
        }
        for (const auto& d : demos) row.demo_mean += d.episodic_return / static_cast<double>(demos.size());

        fs::create_directories(spec.out_dir);
        std::ofstream csv(fs::path(spec.out_dir) / "runlog.csv");
        if (!csv) throw IoError("cannot open run log in " + spec.out_dir);
        csv << runlog_csv_header() << "\n";

        Rng rng(spec.config.seed);
        RunOutcome outcome{.config = spec.config, .result = {}};
        const auto t0 = std::chrono::steady_clock::now();
        outcome.result = train(spec.config, demos, rng, [&csv](const RunRecord& rec) {
            csv << runlog_csv_row(rec) << "\n";
            csv.flush();
        });
        outcome.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

        std::ofstream ckpt(fs::path(spec.out_dir) / "agent.ckpt");
        save_agent(ckpt, outcome.result.actor, outcome.result.critic);
        std::ofstream summary(fs::path(spec.out_dir) / "summary.json");
        summary << summary_json(outcome).dump(2) << "\n";

        row.final_eval_mean = outcome.result.log.records.back().eval_mean_return;
        row.promotions = outcome.result.promotions;
        if (!demos.empty()) {
            for (const auto& rec : outcome.result.log.records) {
                if (rec.eval_mean_return >= row.demo_mean) {
                    row.steps_to_teacher = rec.env_steps;
                    break;
                }
            }
            if (row.steps_to_teacher < 0) row.steps_to_teacher = spec.config.total_env_steps;  // censored
        }
    } catch (const std::exception& e) {
        row.status = std::string("failed: ") + e.what();
    }
    return row;
}

inline double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n == 0 ? 0.0 : (n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]));
}

inline double quantile_of(std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    if (v.empty()) return 0.0;
    const double pos = q * static_cast<double>(v.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - lo) * (v[hi] - v[lo]);
}

// Runs every manifest entry (thread-parallel up to the cap), then writes an
// aggregate CSV with one row per (algo, env): median final return, IQR, and
// median steps to reach the demo mean. Failures get a status row and the
// sweep continues.
inline int cmd_sweep(const std::string& manifest_path, int parallel_override, std::ostream& log) {
    SweepPlan plan = load_manifest(manifest_path);
    if (parallel_override > 0) plan.parallelism = parallel_override;

    std::vector<SweepRowResult> rows(plan.runs.size());
    std::size_t next = 0;
    std::mutex mu;
    auto worker = [&]() {
        for (;;) {
            std::size_t idx;
            {
                std::lock_guard<std::mutex> lock(mu);
                if (next >= plan.runs.size()) return;
                idx = next++;
            }
            rows[idx] = execute_sweep_run(plan.runs[idx]);
        }
    };
    std::vector<std::thread> pool;
    const int n_threads = std::min<int>(plan.parallelism, static_cast<int>(plan.runs.size()));
    for (int k = 0; k < n_threads; ++k) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    // Aggregate by (algo, env).
    std::map<std::pair<std::string, std::string>, std::vector<const SweepRowResult*>> groups;
    for (const auto& row : rows) groups[{row.spec.config.algo, row.spec.config.env}].push_back(&row);

    fs::create_directories(plan.out_root);
    std::ofstream agg(fs::path(plan.out_root) / "aggregate.csv");
    agg << "algo,env,runs,failed,median_final_return,iqr_final_return,median_steps_to_teacher,status\n";
    for (const auto& [key, members] : groups) {
        std::vector<double> finals, steps;
        int failed = 0;
        for (const auto* row : members) {
            if (row->status != "ok") {
                ++failed;
                continue;
            }
            finals.push_back(row->final_eval_mean);
            if (row->steps_to_teacher >= 0) steps.push_back(static_cast<double>(row->steps_to_teacher));
        }
        const double iqr = quantile_of(finals, 0.75) - quantile_of(finals, 0.25);
        agg << key.first << "," << key.second << "," << members.size() << "," << failed << ","
            << median_of(finals) << "," << iqr << ","
            << (steps.empty() ? -1.0 : median_of(steps)) << "," << (failed == 0 ? "ok" : "partial") << "\n";
    }
    agg.flush();

    int failures = 0;
    for (const auto& row : rows) {
        log << row.spec.out_dir << ": " << row.status;
        if (row.status == "ok") log << " final " << row.final_eval_mean;
        log << "\n";
        if (row.status != "ok") ++failures;
    }
    log << "aggregate written to " << (fs::path(plan.out_root) / "aggregate.csv").string() << "\n";
    return failures == 0 ? kExitOk : kExitNumeric;
}

// ---- eval ------------------------------------------------------------------

struct EvalOptions {
    std::string checkpoint;
    std::string env = "pointmass";
    int episodes = 10;
    std::uint64_t seed = 1;
};

inline int cmd_eval(const EvalOptions& opt, std::ostream& log) {
    if (opt.episodes < 1) throw ConfigError("eval: episodes must be >= 1");
    auto env = make_env(opt.env);
    std::ifstream f(opt.checkpoint);
    if (!f) throw IoError("cannot open checkpoint: " + opt.checkpoint);

    Rng dummy(0);
    Actor actor = make_actor(env->spec(), {1}, 1e-3, dummy);
    actor.pi = load_actor_net(f);
    if (actor.pi.in_dim() != env->spec().state_dim || actor.pi.out_dim() != env->spec().action_dim)
        throw ConfigError("checkpoint does not match the environment dimensions");
    actor.pi_target = actor.pi;

    Rng rng(opt.seed);
    auto [mean, sd] = evaluate(actor, *env, opt.episodes, rng);
    nlohmann::json j;
    j["env"] = opt.env;
    j["episodes"] = opt.episodes;
    j["seed"] = opt.seed;
    j["eval_mean_return"] = mean;
    j["eval_std"] = sd;
    log << j.dump(2) << "\n";
    return kExitOk;
}

// ---- report ----------------------------------------------------------------

// Scans <root>/*/summary.json and renders a Markdown table, one row per run
// plus per-algo medians.
inline int cmd_report(const std::string& root_in, std::ostream& out) {
    const std::string root = resolve_out_path(root_in);
    if (!fs::is_directory(root)) throw IoError("not a directory: " + root);

    struct Entry {
        std::string name, algo, env, status;
        std::uint64_t seed = 0;
        double final_mean = 0.0, final_std = 0.0, wall = 0.0;
        long promotions = 0;
    };
    std::vector<Entry> entries;
    for (const auto& dir : fs::directory_iterator(root)) {
        const fs::path sj = dir.path() / "summary.json";
        if (!fs::exists(sj)) continue;
        std::ifstream f(sj);
        nlohmann::json j;
        try {
            f >> j;
        } catch (const nlohmann::json::exception&) {
            continue;
        }
        Entry e;
        e.name = dir.path().filename().string();
        e.algo = j.value("algo", "?");
        e.env = j.value("env", "?");
        e.seed = j.value("seed", 0ull);
        e.status = j.value("status", "?");
        e.final_mean = j.value("final_eval_mean", 0.0);
        e.final_std = j.value("final_eval_std", 0.0);
        e.wall = j.value("wall_time_s", 0.0);
        e.promotions = j.value("promotions", 0l);
        entries.push_back(std::move(e));
    }
    if (entries.empty()) throw IoError("no run summaries under " + root);
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        return std::tie(a.algo, a.env, a.seed) < std::tie(b.algo, b.env, b.seed);
    });

    out << "| run | algo | env | seed | status | final return | final std | promotions | wall time (s) |\n";
    out << "|---|---|---|---|---|---|---|---|---|\n";
    for (const auto& e : entries) {
        out << "| " << e.name << " | " << e.algo << " | " << e.env << " | " << e.seed << " | " << e.status << " | "
            << e.final_mean << " | " << e.final_std << " | " << e.promotions << " | " << e.wall << " |\n";
    }

    std::map<std::pair<std::string, std::string>, std::vector<double>> by_algo;
    for (const auto& e : entries)
        if (e.status == "ok") by_algo[{e.algo, e.env}].push_back(e.final_mean);
    out << "\n| algo | env | runs | median final return | IQR |\n|---|---|---|---|---|\n";
    for (const auto& [key, finals] : by_algo) {
        out << "| " << key.first << " | " << key.second << " | " << finals.size() << " | " << median_of(finals)
            << " | " << quantile_of(finals, 0.75) - quantile_of(finals, 0.25) << " |\n";
    }
    return kExitOk;
}

}  // namespace sail

#include <CLI11.hpp>

#include "sail/cli.hpp"

using namespace sail;

int main(int argc, char** argv) {
    CLI::App app{"Self-adaptive imitation learning from sparse episodic rewards"};
    app.require_subcommand(1);

    GenDemosOptions gen_opt;
    auto* gen = app.add_subcommand("gen-demos", "Generate scripted-teacher demonstrations");
    gen->add_option("--env", gen_opt.env, "Environment (pointmass | chain)")->capture_default_str();
    gen->add_option("--quality,-q", gen_opt.quality, "Teacher quality in (0,1]")->capture_default_str();
    gen->add_option("--n", gen_opt.n_traj, "Number of trajectories")->capture_default_str();
    gen->add_option("--seed", gen_opt.seed, "RNG seed")->capture_default_str();
    gen->add_option("--out", gen_opt.out, "Output JSON-lines file")->required();

    RunOptions run_opt;
    auto* run = app.add_subcommand("run", "Train one agent and write its learning curve");
    run->add_option("--config", run_opt.config_path, "Config file (key = value)");
    run->add_option("--set", run_opt.overrides, "Config override key=value (repeatable)");
    run->add_option("--algo", run_opt.algo, "Algorithm tag");
    run->add_option("--env", run_opt.env, "Environment");
    run->add_option("--demos", run_opt.demos_path, "Demonstration file");
    std::uint64_t run_seed = 0;
    auto* seed_flag = run->add_option("--seed", run_seed, "RNG seed");
    run->add_option("--out", run_opt.out_dir, "Output directory")->required();

    std::string sweep_manifest;
    int sweep_parallel = 0;
    auto* sweep = app.add_subcommand("sweep", "Run a manifest of seeded runs and aggregate");
    sweep->add_option("--manifest", sweep_manifest, "Manifest JSON file")->required();
    sweep->add_option("--parallel", sweep_parallel, "Parallel run cap (overrides manifest)");

    EvalOptions eval_opt;
    auto* eval = app.add_subcommand("eval", "Evaluate a saved policy deterministically");
    eval->add_option("--checkpoint", eval_opt.checkpoint, "agent.ckpt path")->required();
    eval->add_option("--env", eval_opt.env, "Environment")->capture_default_str();
    eval->add_option("--episodes", eval_opt.episodes, "Evaluation episodes")->capture_default_str();
    eval->add_option("--seed", eval_opt.seed, "RNG seed")->capture_default_str();

    std::string report_root;
    std::string report_out;
    auto* report = app.add_subcommand("report", "Render a Markdown summary of completed runs");
    report->add_option("--root", report_root, "Directory containing run subdirectories")->required();
    report->add_option("--out", report_out, "Write to a file instead of stdout");

    std::string pc_config;
    std::vector<std::string> pc_overrides;
    std::string pc_algo, pc_env;
    auto* pc = app.add_subcommand("print-config", "Dump the effective configuration");
    pc->add_option("--config", pc_config, "Config file");
    pc->add_option("--set", pc_overrides, "Config override key=value (repeatable)");
    pc->add_option("--algo", pc_algo, "Algorithm tag");
    pc->add_option("--env", pc_env, "Environment");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            cmd_gen_demos(gen_opt, std::cout);
            return kExitOk;
        }
        if (run->parsed()) {
            if (seed_flag->count() > 0) run_opt.seed = run_seed;
            return cmd_run(run_opt, std::cout);
        }
        if (sweep->parsed()) return cmd_sweep(sweep_manifest, sweep_parallel, std::cout);
        if (eval->parsed()) return cmd_eval(eval_opt, std::cout);
        if (report->parsed()) {
            if (!report_out.empty()) {
                std::ofstream f(report_out);
                if (!f) throw IoError("cannot open report file: " + report_out);
                return cmd_report(report_root, f);
            }
            return cmd_report(report_root, std::cout);
        }
        if (pc->parsed()) {
            TrainConfig config = build_config(pc_config, pc_overrides, pc_algo, pc_env, std::nullopt);
            print_config(std::cout, config);
            return kExitOk;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIo;
    } catch (const NumericError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return kExitConfig;
}

#include <CLI11.hpp>
#include <cstdio>
#include <string>
#include <vector>

#include "pegdyn/errors.hpp"
#include "pegdyn/experiments.hpp"

using namespace pegdyn;

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    uint64_t seed = 0;
    bool seed_given = false;
    std::vector<std::string> overrides;
};

void add_common(CLI::App* sub, CommonArgs& args) {
    sub->add_option("--config", args.config_path, "configuration file (ini)");
    sub->add_option("--out", args.out_dir, "output directory");
    sub->add_option("--seed", args.seed, "root random seed")
        ->each([&args](const std::string&) { args.seed_given = true; });
    sub->add_option("--set", args.overrides, "override: section.key=value")
        ->take_all();
}

cli::ExperimentConfig build_config(const CommonArgs& args) {
    cli::ExperimentConfig cfg = args.config_path.empty()
                                    ? cli::ExperimentConfig{}
                                    : cli::load_config_file(args.config_path);
    for (const std::string& kv : args.overrides) {
        size_t eq = kv.find('=');
        if (eq == std::string::npos)
            throw ConfigError("--set expects section.key=value, got '" + kv + "'");
        cli::apply_override(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (args.seed_given) cfg.seed = args.seed;
    if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
    return cfg;
}

std::string join_argv(int argc, char** argv) {
    std::string out;
    for (int i = 0; i < argc; ++i) {
        if (i) out += ' ';
        out += argv[i];
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Force-state peg-in-hole pipeline: synthetic probing, offline dynamics "
                 "learning, CEM planning and offline RL"};
    app.require_subcommand(1);

    CommonArgs args;
    std::vector<std::string> report_dirs;
    std::string report_out = "runs/report";

    CLI::App* gen = app.add_subcommand("gen-data", "probe grids and synthesize datasets");
    add_common(gen, args);
    CLI::App* train_dyn =
        app.add_subcommand("train-dynamics", "pretrain the dynamics model on the training holes");
    add_common(train_dyn, args);
    CLI::App* finetune =
        app.add_subcommand("finetune", "adapt the pretrained dynamics to the target hole");
    add_common(finetune, args);
    CLI::App* eval_dyn = app.add_subcommand(
        "eval-dynamics", "data-fraction sweep with scratch-vs-pretrained curves");
    add_common(eval_dyn, args);
    CLI::App* run_mpc = app.add_subcommand("run-mpc", "benchmark the CEM planner per test hole");
    add_common(run_mpc, args);
    CLI::App* train_rl =
        app.add_subcommand("train-rl", "train the discrete policy offline against the dynamics");
    add_common(train_rl, args);
    CLI::App* eval_pol = app.add_subcommand("eval-policy", "benchmark trained policies");
    add_common(eval_pol, args);
    CLI::App* report = app.add_subcommand("report", "aggregate success tables across run dirs");
    report->add_option("dirs", report_dirs, "run directories to aggregate")->required();
    report->add_option("--out", report_out, "output directory");

    CLI11_PARSE(app, argc, argv);

    const std::string command = join_argv(argc, argv);
    try {
        if (report->parsed()) {
            cli::cmd_report(report_dirs, report_out, command);
            return 0;
        }
        cli::ExperimentConfig cfg = build_config(args);
        if (gen->parsed()) cli::cmd_gen_data(cfg, command);
        else if (train_dyn->parsed()) cli::cmd_train_dynamics(cfg, command);
        else if (finetune->parsed()) cli::cmd_finetune(cfg, command);
        else if (eval_dyn->parsed()) cli::cmd_eval_dynamics(cfg, command);
        else if (run_mpc->parsed()) cli::cmd_run_mpc(cfg, command);
        else if (train_rl->parsed()) cli::cmd_train_rl(cfg, command);
        else if (eval_pol->parsed()) cli::cmd_eval_policy(cfg, command);
        return 0;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}

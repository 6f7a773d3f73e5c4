// Command-line front end: run one search, compare algorithms over repeated
// runs, resume from a checkpoint, tabulate the powering-up correspondence,
// or print the top designs of a saved search.

#include <chrono>
#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "bode/harness/runner.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    bool seed_set = false;
    int workers = 0;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool config_required = true) {
    auto* c = cmd->add_option("--config", args.config_path, "experiment config (JSON)");
    if (config_required) c->required();
    cmd->add_option("--out", args.out_dir, "output directory");
    cmd->add_option("--seed", args.seed, "master seed override")->each([&](const std::string&) {
        args.seed_set = true;
    });
    cmd->add_option("--workers", args.workers, "worker thread override");
}

bode::ExperimentConfig load_with_overrides(const CommonArgs& args) {
    auto cfg = bode::load_config(args.config_path);
    if (args.seed_set) {
        cfg.seed = args.seed;
        cfg.raw["seed"] = args.seed;
    }
    if (args.workers > 0) {
        cfg.workers = args.workers;
        cfg.raw["workers"] = args.workers;
    }
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"grid-based Bayes-optimal observation-time design search"};
    app.require_subcommand(1);

    CommonArgs run_args, cmp_args, fig_args;
    std::int64_t run_max_evals = -1;
    auto* run = app.add_subcommand("run", "run one configured search");
    add_common(run, run_args);
    run->add_option("--max-evals", run_max_evals,
                    "stop after this many evaluations (checkpoint remains resumable)");

    auto* cmp = app.add_subcommand("compare", "repeated runs of several algorithms, RMSE table");
    add_common(cmp, cmp_args);

    std::string resume_checkpoint, resume_out = "out";
    bode::ResumeOptions resume_opt;
    int resume_workers = 0;
    auto* res = app.add_subcommand("resume", "continue a checkpointed search");
    res->add_option("--checkpoint", resume_checkpoint, "checkpoint file")->required();
    res->add_option("--out", resume_out, "output directory");
    res->add_option("--extra-steps", resume_opt.extra_steps, "append this many steps");
    res->add_option("--step-evals", resume_opt.step_evals, "evaluations per appended step");
    res->add_option("--max-evals", resume_opt.max_evals, "stop after this many new evaluations");
    res->add_option("--workers", resume_workers, "worker thread override");

    auto* fig = app.add_subcommand("fig3", "exact death-model k(alpha, J) table");
    add_common(fig, fig_args, /*config_required=*/false);

    std::string top_checkpoint;
    std::size_t top_count = 100;
    auto* top = app.add_subcommand("top", "print top designs from a checkpoint");
    top->add_option("--checkpoint", top_checkpoint, "checkpoint file")->required();
    top->add_option("--count", top_count, "number of designs");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    const auto started = std::chrono::steady_clock::now();
    try {
        if (run->parsed()) {
            const auto cfg = load_with_overrides(run_args);
            const auto files = bode::cmd_run(cfg, run_args.out_dir, run_max_evals);
            std::cout << "wrote " << files.summary.string() << "\n";
        } else if (cmp->parsed()) {
            const auto cfg = load_with_overrides(cmp_args);
            const auto path = bode::cmd_compare(cfg, cmp_args.out_dir);
            std::cout << "wrote " << path.string() << "\n";
        } else if (res->parsed()) {
            if (resume_workers > 0) resume_opt.workers = resume_workers;
            const auto files = bode::cmd_resume(resume_checkpoint, resume_out, resume_opt);
            std::cout << "wrote " << files.summary.string() << "\n";
        } else if (fig->parsed()) {
            bode::ExperimentConfig cfg;
            if (!fig_args.config_path.empty()) {
                cfg = load_with_overrides(fig_args);
            } else {
                nlohmann::json j{{"model", {{"name", "death"}}},
                                 {"algorithm", {{"name", "new"}}},
                                 {"budget", 24000}};
                cfg = bode::parse_config(j);
                if (fig_args.workers > 0) cfg.workers = fig_args.workers;
            }
            const auto path = bode::cmd_fig3(cfg, fig_args.out_dir);
            std::cout << "wrote " << path.string() << "\n";
        } else if (top->parsed()) {
            bode::cmd_top(top_checkpoint, top_count, std::cout);
        }
    } catch (const bode::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    const auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - started);
    std::cerr << "elapsed: " << elapsed.count() << " s\n";
    return 0;
}

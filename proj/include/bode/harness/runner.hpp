#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "bode/amzal.hpp"
#include "bode/harness/config.hpp"
#include "bode/io/checkpoint.hpp"
#include "bode/models/aphid.hpp"
#include "bode/models/death.hpp"
#include "bode/models/oscillatory.hpp"
#include "bode/models/toy.hpp"
#include "bode/muller.hpp"
#include "bode/new_algorithm.hpp"
#include "bode/parallel.hpp"
#include "bode/powering.hpp"

namespace bode {

using ModelVariant = std::variant<DeathModel, OscillatoryModel, ToyModel, AphidModel>;

inline ModelVariant make_model(const ExperimentConfig& cfg) {
    const auto& m = cfg.model;
    try {
        if (cfg.model_name == "death") {
            return DeathModel(detail::value_or<int>(m, "population", 50),
                              detail::value_or<double>(m, "prior_meanlog", -0.005),
                              detail::value_or<double>(m, "prior_varlog", 0.01),
                              detail::value_or<int>(m, "quad_points", 64),
                              detail::value_or<bool>(m, "exact_evaluation", false));
        }
        if (cfg.model_name == "oscillatory") {
            OscillatoryModel model;
            model.prior.b = detail::value_or<double>(m, "b", 10.0);
            model.prior.c = detail::value_or<double>(m, "c", 0.01);
            model.prior.g = detail::value_or<double>(m, "g", 3.0);
            model.prior.h = detail::value_or<double>(m, "h", 3.0);
            const auto form = detail::value_or<std::string>(m, "h_form", "standard");
            if (form != "standard" && form != "display")
                throw ConfigError("model key 'h_form' must be \"standard\" or \"display\"");
            model.h_form = form == "standard" ? HForm::standard : HForm::display;
            model.prior.validate();
            return model;
        }
        if (cfg.model_name == "toy") {
            ToyModel model;
            model.noise_sdlog = detail::value_or<double>(m, "noise_sdlog", 0.03);
            if (cfg.grid.k != model.dimension)
                throw ConfigError("toy model needs grid k = 15");
            return model;
        }
        if (cfg.model_name == "aphid") {
            AphidModel model;
            model.mcmc.iterations = detail::value_or<int>(m, "mcmc_iterations", 10000);
            model.mcmc.burn_in = detail::value_or<int>(m, "mcmc_burn_in", 500);
            model.rk4_step = detail::value_or<double>(m, "rk4_step", 0.05);
            model.mcmc.validate();
            return model;
        }
    } catch (const std::domain_error& e) {
        throw ConfigError(std::string("model: ") + e.what());
    }
    throw ConfigError("unknown model '" + cfg.model_name + "'");
}

inline NewAlgConfig make_new_config(const ExperimentConfig& cfg, const nlohmann::json& a,
                                    int workers, std::int64_t batch) {
    NewAlgConfig out;
    const int steps = detail::value_or<int>(a, "steps", detail::default_steps(cfg.model_name));
    const double lambda =
        detail::value_or<double>(a, "lambda", detail::default_lambda(cfg.model_name));
    if (a.contains("budgets")) {
        out.budgets = detail::require<std::vector<std::int64_t>>(a, "budgets");
        std::int64_t total = 0;
        for (auto b : out.budgets) total += b;
        if (total != cfg.budget)
            throw ConfigError("algorithm 'budgets' sum to " + std::to_string(total) +
                              " but 'budget' is " + std::to_string(cfg.budget));
    } else {
        if (steps < 1 || cfg.budget % (steps + 1) != 0)
            throw ConfigError("'budget' must divide evenly into steps+1 equal parts "
                              "(or give explicit 'budgets')");
        out.budgets.assign(static_cast<std::size_t>(steps + 1), cfg.budget / (steps + 1));
    }
    if (a.contains("alphas")) out.alphas = detail::require<std::vector<double>>(a, "alphas");
    if (a.contains("lambdas")) out.lambdas = detail::require<std::vector<double>>(a, "lambdas");
    out.fill_defaults(lambda);
    out.batch = batch;
    out.workers = workers;
    out.top_table = cfg.top_table;
    try {
        out.validate();
    } catch (const std::domain_error& e) {
        throw ConfigError(std::string("algorithm: ") + e.what());
    }
    return out;
}

inline ProposalKind parse_proposal(const nlohmann::json& a) {
    const auto p = detail::value_or<std::string>(a, "proposal", "uniform");
    if (p == "uniform") return ProposalKind::uniform;
    if (p == "skellam") return ProposalKind::skellam;
    throw ConfigError("algorithm key 'proposal' must be \"uniform\" or \"skellam\"");
}

inline MullerConfig make_muller_config(const ExperimentConfig& cfg, const nlohmann::json& a) {
    MullerConfig out;
    out.replicates = detail::value_or<int>(a, "J", 1);
    if (out.replicates < 1) throw ConfigError("algorithm key 'J' must be >= 1");
    out.iterations = a.contains("iterations")
                         ? detail::require<std::int64_t>(a, "iterations")
                         : MullerConfig::iterations_for_budget(cfg.budget, out.replicates);
    out.proposal = parse_proposal(a);
    out.lambda = detail::value_or<double>(a, "lambda", 4.0);
    const auto mode = detail::value_or<std::string>(a, "mode", "smoothed");
    if (mode != "smoothed" && mode != "histogram")
        throw ConfigError("algorithm key 'mode' must be \"smoothed\" or \"histogram\"");
    out.mode = mode == "smoothed" ? ModeEstimator::smoothed : ModeEstimator::histogram;
    out.top_table = cfg.top_table;
    try {
        out.validate();
    } catch (const std::domain_error& e) {
        throw ConfigError(std::string("algorithm: ") + e.what());
    }
    return out;
}

inline AmzalConfig make_amzal_config(const ExperimentConfig& cfg, const nlohmann::json& a) {
    AmzalConfig out;
    out.schedule = detail::value_or<std::vector<int>>(a, "schedule", {1, 2, 4});
    try {
        out.particles = a.contains("particles")
                            ? detail::require<std::int64_t>(a, "particles")
                            : AmzalConfig::particles_for_budget(cfg.budget, out.schedule);
        out.proposal = parse_proposal(a);
        out.lambda = detail::value_or<double>(a, "lambda", 4.0);
        out.top_table = cfg.top_table;
        out.validate();
    } catch (const std::domain_error& e) {
        throw ConfigError(std::string("algorithm: ") + e.what());
    }
    return out;
}

inline std::uint64_t repetition_seed(std::uint64_t master, int rep) {
    return stream_key(stream::repetition, master, static_cast<std::uint64_t>(rep));
}

// One repetition of one algorithm. For the particle search the caller may
// pass a system to continue from; the baselines build their own.
inline RunResult run_repetition(const ExperimentConfig& cfg, const nlohmann::json& alg,
                                const ModelVariant& model, int rep, int workers,
                                std::int64_t batch, ParticleSystem* resume = nullptr,
                                std::int64_t max_evals = -1) {
    const auto name = alg.at("name").get<std::string>();
    const auto seed = repetition_seed(cfg.seed, rep);
    return std::visit(
        [&](const auto& m) -> RunResult {
            if (name == "new") {
                const auto ncfg = make_new_config(cfg, alg, workers, batch);
                if (resume) {
                    RunResult r = run_schedule(m, cfg.grid, ncfg, seed, *resume, max_evals);
                    r.system = *resume;
                    return r;
                }
                ParticleSystem system(cfg.grid);
                RunResult r = run_schedule(m, cfg.grid, ncfg, seed, system, max_evals);
                r.system = std::move(system);
                return r;
            }
            if (max_evals >= 0)
                throw ConfigError("evaluation caps and resume apply to the 'new' algorithm only");
            if (name == "muller") return run_muller(m, cfg.grid, make_muller_config(cfg, alg), seed);
            return run_amzal(m, cfg.grid, make_amzal_config(cfg, alg), seed);
        },
        model);
}

// ---- output documents -------------------------------------------------

namespace detail {

inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string join_times(const std::vector<double>& v, char sep = ';') {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += sep;
        out += fmt(v[i]);
    }
    return out;
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

inline double quantile(std::vector<double> v, double p) {
    std::sort(v.begin(), v.end());
    const double h = (static_cast<double>(v.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(h);
    if (lo + 1 >= v.size()) return v.back();
    return v[lo] + (h - static_cast<double>(lo)) * (v[lo + 1] - v[lo]);
}

}  // namespace detail

inline nlohmann::json result_to_json(const RunResult& r, int rep) {
    nlohmann::json j{{"rep", rep},
                     {"best_location", r.best_location},
                     {"best_design", r.best_design},
                     {"best_mean", r.best_mean},
                     {"ci_low", r.best_ci_low},
                     {"ci_high", r.best_ci_high},
                     {"n_at_best", r.best_n},
                     {"evaluations", r.system.evaluations},
                     {"failures", r.failures},
                     {"complete", r.complete},
                     {"warnings", r.warnings}};
    if (r.proposed > 0) {
        j["accepted"] = r.accepted;
        j["proposed"] = r.proposed;
        j["off_grid"] = r.off_grid;
    }
    return j;
}

inline std::string top_designs_csv(const std::vector<TopDesignRow>& rows) {
    std::string out = "rank,indices,times,n,mean,ci_low,ci_high\n";
    int rank = 1;
    for (const auto& row : rows) {
        std::string idx;
        for (std::size_t i = 0; i < row.location.size(); ++i) {
            if (i) idx += ';';
            idx += std::to_string(row.location[i]);
        }
        out += std::to_string(rank++) + "," + idx + "," + detail::join_times(row.design) + "," +
               std::to_string(row.n) + "," + detail::fmt(row.mean) + "," +
               detail::fmt(row.ci_low) + "," + detail::fmt(row.ci_high) + "\n";
    }
    return out;
}

inline std::string snapshots_csv(const std::vector<StepSummary>& steps) {
    std::string out =
        "step,alpha,lambda,evaluations,best_indices,best_times,best_mean,ci_low,ci_high,n,ci_width\n";
    for (const auto& s : steps) {
        std::string idx;
        for (std::size_t i = 0; i < s.best.location.size(); ++i) {
            if (i) idx += ';';
            idx += std::to_string(s.best.location[i]);
        }
        out += std::to_string(s.step) + "," + detail::fmt(s.alpha) + "," + detail::fmt(s.lambda) +
               "," + std::to_string(s.evaluations) + "," + idx + "," +
               detail::join_times(s.best.design) + "," + detail::fmt(s.best.mean) + "," +
               detail::fmt(s.best.ci_low) + "," + detail::fmt(s.best.ci_high) + "," +
               std::to_string(s.best.n) + "," + detail::fmt(s.best.ci_high - s.best.ci_low) + "\n";
    }
    return out;
}

inline nlohmann::json harness_checkpoint(const ExperimentConfig& cfg, const ParticleSystem& system,
                                         const std::vector<StepSummary>& snapshots) {
    nlohmann::json snaps = nlohmann::json::array();
    for (const auto& s : snapshots) snaps.push_back(step_summary_to_json(s));
    return {{"format", "bode-checkpoint"},
            {"version", 1},
            {"config", cfg.raw},
            {"state", system_to_json(system)},
            {"snapshots", std::move(snaps)}};
}

inline std::vector<StepSummary> snapshots_from_json(const nlohmann::json& snaps,
                                                    const TimeGrid& grid) {
    std::vector<StepSummary> out;
    for (const auto& s : snaps) {
        StepSummary sum;
        sum.step = s.at("step").get<int>();
        sum.alpha = s.at("alpha").get<double>();
        sum.lambda = s.at("lambda").get<double>();
        sum.evaluations = s.at("evaluations").get<std::int64_t>();
        sum.best.location = s.at("best_location").get<DesignLocation>();
        sum.best.design = location_to_design(grid, sum.best.location);
        sum.best.mean = s.at("best_mean").get<double>();
        sum.best.ci_low = s.at("ci_low").get<double>();
        sum.best.ci_high = s.at("ci_high").get<double>();
        sum.best.n = s.at("n").get<std::int64_t>();
        out.push_back(std::move(sum));
    }
    return out;
}

struct RunFiles {
    std::filesystem::path summary;
    std::filesystem::path top;
    std::filesystem::path snapshots;
    std::filesystem::path checkpoint;
};

inline RunFiles write_run_outputs(const std::filesystem::path& dir, const ExperimentConfig& cfg,
                                  const std::vector<nlohmann::json>& rep_results,
                                  const RunResult& first,
                                  const std::vector<StepSummary>& all_snapshots,
                                  bool with_checkpoint) {
    std::filesystem::create_directories(dir);
    RunFiles files{dir / "run_summary.json", dir / "top_designs.csv", dir / "step_snapshots.csv",
                   dir / "checkpoint.json"};
    nlohmann::json summary{{"config", cfg.raw}, {"result", {{"repetitions", rep_results}}}};
    summary["result"]["best_design"] = first.best_design;
    summary["result"]["best_location"] = first.best_location;
    summary["result"]["best_mean"] = first.best_mean;
    detail::write_file(files.summary, summary.dump(2) + "\n");
    detail::write_file(files.top, top_designs_csv(first.top));
    detail::write_file(files.snapshots, snapshots_csv(all_snapshots));
    if (with_checkpoint)
        detail::write_file(files.checkpoint,
                           harness_checkpoint(cfg, first.system, all_snapshots).dump() + "\n");
    return files;
}

// ---- subcommands -------------------------------------------------------

inline RunFiles cmd_run(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                        std::int64_t max_evals = -1) {
    if (cfg.algorithms.size() != 1)
        throw ConfigError("'run' needs a single 'algorithm'; use 'compare' for lists");
    const auto model = make_model(cfg);
    std::vector<nlohmann::json> reps;
    std::optional<RunResult> first;
    for (int rep = 0; rep < cfg.repetitions; ++rep) {
        auto r = run_repetition(cfg, cfg.algorithms[0], model, rep, cfg.workers,
                                cfg.effective_batch(), nullptr, max_evals);
        reps.push_back(result_to_json(r, rep));
        if (rep == 0) first = std::move(r);
    }
    const bool checkpointable =
        cfg.repetitions == 1 && cfg.algorithms[0].at("name").get<std::string>() == "new";
    return write_run_outputs(out_dir, cfg, reps, *first, first->steps, checkpointable);
}

struct ResumeOptions {
    int extra_steps = 0;
    std::int64_t step_evals = 0;
    std::int64_t max_evals = -1;
    std::optional<int> workers;
};

inline RunFiles cmd_resume(const std::filesystem::path& checkpoint_path,
                           const std::filesystem::path& out_dir, const ResumeOptions& opt) {
    const auto doc = read_json_file(checkpoint_path.string());
    if (doc.value("format", "") != "bode-checkpoint")
        throw ConfigError(checkpoint_path.string() + ": not a checkpoint file");
    if (!doc.contains("config"))
        throw ConfigError("checkpoint has no embedded config; cannot resume");
    auto cfg = parse_config(doc.at("config"));
    if (opt.workers) {
        cfg.workers = *opt.workers;
        cfg.raw["workers"] = *opt.workers;
    }
    if (cfg.algorithms[0].at("name").get<std::string>() != "new")
        throw ConfigError("resume applies to the 'new' algorithm only");

    ParticleSystem system = system_from_json(doc.at("state"));
    if (!(system.grid() == cfg.grid))
        throw ConfigError("checkpoint grid is incompatible with its config grid");
    auto snapshots = snapshots_from_json(doc.value("snapshots", nlohmann::json::array()), cfg.grid);

    auto alg = cfg.algorithms[0];
    auto ncfg = make_new_config(cfg, alg, cfg.workers, cfg.effective_batch());
    if (opt.extra_steps > 0) {
        if (opt.step_evals < 1) throw ConfigError("extra steps need '--step-evals' >= 1");
        const double base_lambda =
            detail::value_or<double>(alg, "lambda", detail::default_lambda(cfg.model_name));
        for (int s = 0; s < opt.extra_steps; ++s) {
            ncfg.budgets.push_back(opt.step_evals);
            ncfg.alphas.push_back(ncfg.alphas.back() / 2.0);
            ncfg.lambdas.back() = base_lambda;
            ncfg.lambdas.push_back(0.0);
        }
        ncfg.validate();
        alg["budgets"] = ncfg.budgets;
        alg["alphas"] = ncfg.alphas;
        alg["lambdas"] = ncfg.lambdas;
        cfg.raw["algorithm"] = alg;
        cfg.raw["budget"] = ncfg.total_budget();
        cfg.algorithms[0] = alg;
        cfg.budget = ncfg.total_budget();
    }

    const auto model = make_model(cfg);
    const auto seed = repetition_seed(cfg.seed, 0);
    RunResult r = std::visit(
        [&](const auto& m) {
            return run_schedule(m, cfg.grid, ncfg, seed, system, opt.max_evals);
        },
        model);
    r.system = system;
    for (const auto& s : r.steps) snapshots.push_back(s);

    std::vector<nlohmann::json> reps{result_to_json(r, 0)};
    return write_run_outputs(out_dir, cfg, reps, r, snapshots, true);
}

inline std::filesystem::path cmd_compare(const ExperimentConfig& cfg,
                                         const std::filesystem::path& out_dir) {
    if (cfg.algorithms.size() < 2)
        throw ConfigError("'compare' needs an 'algorithms' list with at least two entries");
    if (!cfg.reference_optimum)
        throw ConfigError("'compare' needs 'reference_optimum' (RMSE is undefined without it)");
    auto reference = *cfg.reference_optimum;
    std::sort(reference.begin(), reference.end());
    if (static_cast<int>(reference.size()) != cfg.grid.k)
        throw ConfigError("'reference_optimum' must have k entries");

    const auto model = make_model(cfg);
    std::filesystem::create_directories(out_dir);
    std::string table =
        "label,algorithm,repetitions,evaluations_per_run,rmse,dist_min,dist_q25,dist_median,"
        "dist_q75,dist_max\n";
    std::string runs_csv = "label,rep,distance";
    for (int i = 0; i < cfg.grid.k; ++i) runs_csv += ",t" + std::to_string(i + 1);
    runs_csv += "\n";

    for (std::size_t ai = 0; ai < cfg.algorithms.size(); ++ai) {
        const auto& alg = cfg.algorithms[ai];
        const auto name = alg.at("name").get<std::string>();
        const auto label =
            detail::value_or<std::string>(alg, "label", name + "_" + std::to_string(ai));

        std::vector<RunResult> results(static_cast<std::size_t>(cfg.repetitions));
        parallel_for(static_cast<std::size_t>(cfg.repetitions), cfg.workers, [&](std::size_t rep) {
            results[rep] = run_repetition(cfg, alg, model, static_cast<int>(rep), 1,
                                          cfg.batch > 0 ? cfg.batch : 1);
        });

        std::vector<double> dist(results.size());
        double sumsq = 0.0;
        std::int64_t evals = 0;
        for (std::size_t rep = 0; rep < results.size(); ++rep) {
            double ss = 0.0;
            for (std::size_t i = 0; i < reference.size(); ++i) {
                const double d = results[rep].best_design[i] - reference[i];
                ss += d * d;
            }
            dist[rep] = std::sqrt(ss);
            sumsq += ss;
            evals = results[rep].system.evaluations;
            runs_csv += label + "," + std::to_string(rep) + "," + detail::fmt(dist[rep]);
            for (double t : results[rep].best_design) runs_csv += "," + detail::fmt(t);
            runs_csv += "\n";
        }
        const double rmse = std::sqrt(sumsq / static_cast<double>(results.size()));
        table += label + "," + name + "," + std::to_string(cfg.repetitions) + "," +
                 std::to_string(evals) + "," + detail::fmt(rmse) + "," +
                 detail::fmt(detail::quantile(dist, 0.0)) + "," +
                 detail::fmt(detail::quantile(dist, 0.25)) + "," +
                 detail::fmt(detail::quantile(dist, 0.5)) + "," +
                 detail::fmt(detail::quantile(dist, 0.75)) + "," +
                 detail::fmt(detail::quantile(dist, 1.0)) + "\n";
    }
    const auto path = out_dir / "compare.csv";
    detail::write_file(path, table);
    detail::write_file(out_dir / "compare_runs.csv", runs_csv);
    return path;
}

// Exact single-timepoint expected utilities over the whole grid, then the
// powering-up correspondence table k(alpha, J).
inline std::vector<double> death_exact_surface(const DeathModel& model, const TimeGrid& grid,
                                               int workers) {
    const auto g = static_cast<std::size_t>(grid.points());
    std::vector<double> eu(g);
    parallel_for(g, workers, [&](std::size_t i) {
        eu[i] = model.exact_expected_utility({grid.time_at(static_cast<std::int32_t>(i))});
    });
    return eu;
}

inline std::filesystem::path cmd_fig3(const ExperimentConfig& cfg,
                                      const std::filesystem::path& out_dir) {
    if (cfg.model_name != "death") throw ConfigError("fig3 runs on the death model");
    if (cfg.grid.k != 1) throw ConfigError("fig3 needs a k=1 design space");
    const auto model_variant = make_model(cfg);
    const auto& model = std::get<DeathModel>(model_variant);
    const auto eu = death_exact_surface(model, cfg.grid, cfg.workers);

    const double alphas[] = {0.5, 0.25, 0.125, 0.0625};
    std::string csv = "alpha,J,k\n";
    for (double alpha : alphas)
        for (int j = 1; j <= 100; ++j)
            csv += detail::fmt(alpha) + "," + std::to_string(j) + "," +
                   std::to_string(powering_correspondence(eu, j, alpha)) + "\n";
    std::filesystem::create_directories(out_dir);
    const auto path = out_dir / "fig3.csv";
    detail::write_file(path, csv);
    return path;
}

inline void cmd_top(const std::filesystem::path& checkpoint_path, std::size_t count,
                    std::ostream& out) {
    const auto doc = read_json_file(checkpoint_path.string());
    if (doc.value("format", "") != "bode-checkpoint")
        throw ConfigError(checkpoint_path.string() + ": not a checkpoint file");
    const auto system = system_from_json(doc.at("state"));
    out << top_designs_csv(system.top_designs(count));
}

}  // namespace bode

#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "bode/grid.hpp"
#include "bode/model.hpp"
#include "bode/parallel.hpp"
#include "bode/particle_system.hpp"
#include "bode/result.hpp"
#include "bode/rng.hpp"
#include "bode/samplers.hpp"

namespace bode {

// Threshold-schedule particle search. Each step m retains the visited
// designs whose estimated expected utility sits in the top 100*alpha_m%,
// samples locations from the retained set, perturbs them, and folds fresh
// utility draws into the running means.
struct NewAlgConfig {
    std::vector<std::int64_t> budgets;  // N_0 (initialization) then N_1..N_M
    std::vector<double> alphas;         // alpha_1..alpha_M; empty -> 2^-m
    std::vector<double> lambdas;        // lambda_1..lambda_M; empty -> 4, final step 0
    std::int64_t batch = 1;             // weight-refresh cadence B
    int workers = 1;
    std::size_t top_table = 100;

    int steps() const { return static_cast<int>(budgets.size()) - 1; }
    std::int64_t total_budget() const {
        std::int64_t t = 0;
        for (auto b : budgets) t += b;
        return t;
    }

    static NewAlgConfig equal_split(std::int64_t budget, int steps, double lambda = 4.0) {
        NewAlgConfig cfg;
        if (steps < 1 || budget < steps + 1)
            throw std::domain_error("equal_split: need steps >= 1 and budget >= steps+1");
        if (budget % (steps + 1) != 0)
            throw std::domain_error("equal_split: budget not divisible by steps+1");
        cfg.budgets.assign(steps + 1, budget / (steps + 1));
        cfg.fill_defaults(lambda);
        return cfg;
    }

    void fill_defaults(double lambda = 4.0) {
        const int m = steps();
        if (alphas.empty()) {
            alphas.resize(m);
            for (int i = 0; i < m; ++i) alphas[i] = std::pow(2.0, -(i + 1));
        }
        if (lambdas.empty()) {
            lambdas.assign(m, lambda);
            lambdas.back() = 0.0;
        }
    }

    void validate() const {
        if (budgets.size() < 2) throw std::domain_error("config: need an initialization and at least one step");
        for (auto b : budgets)
            if (b < 1) throw std::domain_error("config: budgets must be positive");
        const std::size_t m = budgets.size() - 1;
        if (alphas.size() != m) throw std::domain_error("config: need one alpha per step");
        if (lambdas.size() != m) throw std::domain_error("config: need one lambda per step");
        for (std::size_t i = 0; i < m; ++i) {
            if (!(alphas[i] > 0.0 && alphas[i] <= 1.0))
                throw std::domain_error("config: alphas must lie in (0,1]");
            if (i > 0 && alphas[i] > alphas[i - 1])
                throw std::domain_error("config: alphas must be non-increasing");
            if (lambdas[i] < 0.0) throw std::domain_error("config: lambdas must be >= 0");
        }
        if (batch < 1) throw std::domain_error("config: batch must be >= 1");
        if (workers < 1) throw std::domain_error("config: workers must be >= 1");
    }
};

namespace detail {

template <UtilityModel M>
std::optional<std::pair<DesignLocation, double>> new_alg_evaluate(
    const M& model, const TimeGrid& grid, const ParticleSystem& system, int step,
    std::int64_t iter, double lambda, std::uint64_t seed) {
    auto rng = make_engine(seed, stream_key(stream::step, static_cast<std::uint64_t>(step),
                                            static_cast<std::uint64_t>(iter)));
    const int points = grid.points();
    DesignLocation loc;
    if (step == 0) {
        loc.resize(grid.k);
        std::uniform_int_distribution<std::int32_t> unif(0, points - 1);
        for (auto& idx : loc) idx = unif(rng);
        std::sort(loc.begin(), loc.end());
    } else {
        const auto picked = system.sample_active(rng);
        loc = system.entries()[picked].location;
        if (lambda > 0.0) loc = perturb(loc, PerturbKernel{lambda, points, grid.k}, rng);
    }
    try {
        const auto design = location_to_design(grid, loc);
        const auto data = model.simulate(design, rng);
        const double u = model.utility(design, data, rng);
        return std::make_pair(std::move(loc), u);
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

}  // namespace detail

// Run (or resume) the schedule on `system`, which carries the position
// (step_index, iter_in_step). `max_evals` >= 0 stops at the first batch
// boundary at or past the cap so a resumed run replays the identical
// (step, iteration) stream assignment.
template <UtilityModel M>
RunResult run_schedule(const M& model, const TimeGrid& grid, const NewAlgConfig& cfg,
                       std::uint64_t seed, ParticleSystem& system, std::int64_t max_evals = -1) {
    cfg.validate();
    grid.validate();
    if (system.grid() != grid) throw std::invalid_argument("system grid differs from run grid");
    const int last_step = cfg.steps();
    if (system.step_index > last_step + 1)
        throw std::invalid_argument("schedule position beyond configured steps");

    RunResult result;
    const std::int64_t fail_limit = std::max<std::int64_t>(1, cfg.total_budget() / 100);
    std::int64_t done_here = 0;
    std::vector<std::optional<std::pair<DesignLocation, double>>> slots(
        static_cast<std::size_t>(cfg.batch));
    bool capped = false;

    for (int m = system.step_index; m <= last_step && !capped; ++m) {
        const std::int64_t n_m = cfg.budgets[static_cast<std::size_t>(m)];
        const double alpha = m == 0 ? 1.0 : cfg.alphas[static_cast<std::size_t>(m - 1)];
        const double lambda = m == 0 ? 0.0 : cfg.lambdas[static_cast<std::size_t>(m - 1)];
        std::int64_t i = (m == system.step_index) ? system.iter_in_step : 0;

        while (i < n_m) {
            if (max_evals >= 0 && done_here >= max_evals) {
                capped = true;
                break;
            }
            const auto bsize = static_cast<std::size_t>(std::min<std::int64_t>(cfg.batch, n_m - i));
            if (m >= 1) system.refresh_weights(alpha);
            parallel_for(bsize, cfg.workers, [&](std::size_t j) {
                slots[j] = detail::new_alg_evaluate(model, grid, system, m,
                                                    i + static_cast<std::int64_t>(j), lambda, seed);
            });
            for (std::size_t j = 0; j < bsize; ++j) {
                if (slots[j]) {
                    system.record(slots[j]->first, slots[j]->second);
                } else {
                    ++result.failures;
                    if (result.failures > fail_limit)
                        throw std::runtime_error("more than 1% of utility evaluations failed");
                }
            }
            i += static_cast<std::int64_t>(bsize);
            done_here += static_cast<std::int64_t>(bsize);
            system.step_index = m;
            system.iter_in_step = i;
        }

        if (!capped) {
            system.step_index = m + 1;
            system.iter_in_step = 0;
            StepSummary summary;
            summary.step = m;
            summary.alpha = alpha;
            summary.lambda = lambda;
            summary.evaluations = system.evaluations;
            if (m >= 1) {
                system.refresh_weights(alpha);
                summary.best = system.row_for(system.best_active());
            } else {
                summary.best = system.top_designs(1)[0];
            }
            result.steps.push_back(std::move(summary));
        }
    }

    result.complete = !capped;
    result.evaluations = done_here;

    if (system.visited() > 0) {
        const int eff_step = std::min(system.step_index, last_step);
        if (eff_step >= 1) {
            system.refresh_weights(cfg.alphas[static_cast<std::size_t>(eff_step - 1)]);
            result.fill_best_from(system.row_for(system.best_active()));
        } else {
            result.fill_best_from(system.top_designs(1)[0]);
        }
        result.top = system.top_designs(cfg.top_table);
    }
    return result;
}

template <UtilityModel M>
RunResult run_new_algorithm(const M& model, const TimeGrid& grid, const NewAlgConfig& cfg,
                            std::uint64_t seed) {
    ParticleSystem system(grid);
    RunResult result = run_schedule(model, grid, cfg, seed, system);
    result.system = std::move(system);
    return result;
}

}  // namespace bode

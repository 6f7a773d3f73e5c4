#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "bode/grid.hpp"
#include "bode/model.hpp"
#include "bode/muller.hpp"
#include "bode/particle_system.hpp"
#include "bode/result.hpp"
#include "bode/rng.hpp"
#include "bode/samplers.hpp"

namespace bode {

// Resampling-Markov search: particles carry accumulated utility products.
// The first stage seeds particles by importance weighting alone; from the
// second stage on, each stage tops the products up to J_m draws, resamples,
// and applies one Metropolis move per particle with fresh J_m-draw products
// on both sides of the ratio. Budget for particles N and schedule J_1..J_M:
// N * (sum J_m + J_M - J_1) evaluations, up to off-grid auto-rejections.
struct AmzalConfig {
    std::int64_t particles = 100;
    std::vector<int> schedule;  // J_1 < J_2 < ... < J_M
    ProposalKind proposal = ProposalKind::uniform;
    double lambda = 4.0;
    std::size_t top_table = 100;

    void validate() const {
        if (particles < 2) throw std::domain_error("amzal: need at least two particles");
        if (schedule.empty()) throw std::domain_error("amzal: schedule must not be empty");
        int prev = 0;
        for (int j : schedule) {
            if (j <= prev) throw std::domain_error("amzal: schedule must be strictly increasing positive");
            prev = j;
        }
        if (lambda < 0.0) throw std::domain_error("amzal: lambda must be >= 0");
    }

    std::int64_t evals_per_particle() const {
        std::int64_t total = 0;
        for (int j : schedule) total += j;
        return total + schedule.back() - schedule.front();
    }

    static std::int64_t particles_for_budget(std::int64_t budget, const std::vector<int>& schedule) {
        AmzalConfig probe;
        probe.schedule = schedule;
        probe.particles = 2;
        probe.validate();
        const auto per = probe.evals_per_particle();
        if (budget < 2 * per) throw std::domain_error("amzal: budget too small for schedule");
        return budget / per;
    }
};

template <UtilityModel M>
RunResult run_amzal(const M& model, const TimeGrid& grid, const AmzalConfig& cfg,
                    std::uint64_t seed) {
    cfg.validate();
    grid.validate();
    const int points = grid.points();
    const int k = grid.k;
    const auto n = static_cast<std::size_t>(cfg.particles);

    RunResult result;
    result.system = ParticleSystem(grid);
    ParticleSystem& system = result.system;

    const auto evaluate = [&](const DesignLocation& raw, int draws, std::mt19937_64& rng) {
        const auto canonical = canonicalize(raw, points);
        const auto design = location_to_design(grid, canonical);
        double log_prod = 0.0;
        for (int j = 0; j < draws; ++j) {
            const auto data = model.simulate(design, rng);
            const double u = model.utility(design, data, rng);
            system.record(canonical, u);
            log_prod += log_scale<M>(u);
            ++result.evaluations;
        }
        return log_prod;
    };

    std::vector<DesignLocation> locs(n, DesignLocation(static_cast<std::size_t>(k)));
    std::vector<double> log_prod(n, 0.0);  // accumulated product at the particle's location
    std::vector<double> log_inc(n, 0.0);   // increment since the last resample

    const auto resample = [&](int stage) {
        const double mx = *std::max_element(log_inc.begin(), log_inc.end());
        std::vector<double> w(n);
        double sum = 0.0, sumsq = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            w[i] = std::exp(log_inc[i] - mx);
            sum += w[i];
            sumsq += w[i] * w[i];
        }
        const double ess = sum * sum / sumsq;
        if (ess < 2.0)
            result.warnings.push_back("stage " + std::to_string(stage) +
                                      ": effective sample size below 2 (weight degeneracy)");
        auto rng = make_engine(seed, stream_key(stream::amzal_resample,
                                                static_cast<std::uint64_t>(stage)));
        const auto picks = multinomial_resample(w, n, rng);
        std::vector<DesignLocation> new_locs(n);
        std::vector<double> new_prod(n);
        for (std::size_t i = 0; i < n; ++i) {
            new_locs[i] = locs[picks[i]];
            new_prod[i] = log_prod[picks[i]];
        }
        locs = std::move(new_locs);
        log_prod = std::move(new_prod);
    };

    // Stage 1: uniform particles, J_1 draws each, importance resample.
    const int j1 = cfg.schedule.front();
    for (std::size_t i = 0; i < n; ++i) {
        auto rng = make_engine(seed, stream_key(stream::amzal_weight, 1, i));
        std::uniform_int_distribution<std::int32_t> unif(0, points - 1);
        for (auto& idx : locs[i]) idx = unif(rng);
        log_inc[i] = evaluate(locs[i], j1, rng);
        log_prod[i] = log_inc[i];
    }
    resample(1);

    const PerturbKernel kernel{cfg.lambda, points, k};
    for (std::size_t stage = 2; stage <= cfg.schedule.size(); ++stage) {
        const int jm = cfg.schedule[stage - 1];
        const int jprev = cfg.schedule[stage - 2];

        for (std::size_t i = 0; i < n; ++i) {
            auto rng = make_engine(seed, stream_key(stream::amzal_weight, stage, i));
            log_inc[i] = evaluate(locs[i], jm - jprev, rng);
            log_prod[i] += log_inc[i];
        }
        resample(static_cast<int>(stage));

        DesignLocation proposal(static_cast<std::size_t>(k));
        for (std::size_t i = 0; i < n; ++i) {
            auto rng = make_engine(seed, stream_key(stream::amzal_move, stage, i));
            bool on_grid = true;
            if (cfg.proposal == ProposalKind::uniform) {
                std::uniform_int_distribution<std::int32_t> unif(0, points - 1);
                for (auto& idx : proposal) idx = unif(rng);
            } else {
                on_grid = propose_on_grid(locs[i], kernel, rng, proposal);
            }
            ++result.proposed;
            if (!on_grid) {
                ++result.off_grid;
                continue;
            }
            const double log_star = evaluate(proposal, jm, rng);
            std::uniform_real_distribution<double> u01(0.0, 1.0);
            if (std::log(u01(rng)) < log_star - log_prod[i]) {
                locs[i] = proposal;
                log_prod[i] = log_star;
                ++result.accepted;
            }
        }
    }

    // Modal particle location; ties by higher running mean, then by location.
    std::unordered_map<DesignLocation, std::int64_t, LocationHash> counts;
    for (const auto& loc : locs) ++counts[canonicalize(loc, points)];
    const DesignLocation* best = nullptr;
    std::int64_t best_count = -1;
    for (const auto& [loc, count] : counts) {
        if (best == nullptr) {
            best = &loc;
            best_count = count;
            continue;
        }
        const double m_new = system.stats_at(loc)->mean;
        const double m_best = system.stats_at(*best)->mean;
        if (count > best_count || (count == best_count && m_new > m_best) ||
            (count == best_count && m_new == m_best && loc < *best)) {
            best = &loc;
            best_count = count;
        }
    }
    result.fill_best_from(system.row_for(*system.entry_at(*best)));
    result.top = system.top_designs(cfg.top_table);
    return result;
}

}  // namespace bode

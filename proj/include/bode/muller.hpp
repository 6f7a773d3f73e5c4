#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "bode/grid.hpp"
#include "bode/model.hpp"
#include "bode/particle_system.hpp"
#include "bode/result.hpp"
#include "bode/rng.hpp"
#include "bode/samplers.hpp"

namespace bode {

enum class ProposalKind { uniform, skellam };
enum class ModeEstimator { smoothed, histogram };

// Metropolis chain over designs whose stationary marginal is proportional to
// u(d)^J. The chain runs on raw (unsorted) coordinate vectors so the
// per-coordinate proposal stays symmetric; only logging and reporting
// collapse to canonical locations. Log-scale utilities are handled by
// summing logs, i.e. the product target is exponentiated implicitly.
struct MullerConfig {
    std::int64_t iterations = 1000;
    int replicates = 1;  // J
    ProposalKind proposal = ProposalKind::uniform;
    double lambda = 4.0;  // skellam proposal spread
    ModeEstimator mode = ModeEstimator::smoothed;
    std::optional<DesignLocation> initial;
    std::size_t top_table = 100;

    void validate() const {
        if (iterations < 1) throw std::domain_error("muller: iterations must be >= 1");
        if (replicates < 1) throw std::domain_error("muller: replicates must be >= 1");
        if (lambda < 0.0) throw std::domain_error("muller: lambda must be >= 0");
    }

    // Iteration count spending exactly `budget` utility evaluations.
    static std::int64_t iterations_for_budget(std::int64_t budget, int replicates) {
        if (budget < 2 * replicates) throw std::domain_error("muller: budget too small");
        return budget / replicates - 1;
    }
};

namespace detail {

// Mode of the empirical marginal over visited canonical locations. The raw
// histogram argmax is meaningless when the marginal is nearly flat, so the
// default smooths the visit counts with a Gaussian product kernel (Silverman
// bandwidth per coordinate) before taking the argmax.
class VisitAccumulator {
public:
    explicit VisitAccumulator(const TimeGrid& grid) : grid_(grid) {}

    void visit(const DesignLocation& canonical) { ++counts_[canonical]; }

    DesignLocation mode(ModeEstimator how, const ParticleSystem& stats) const {
        if (counts_.empty()) throw std::logic_error("no chain states recorded");
        std::vector<const std::pair<const DesignLocation, std::int64_t>*> items;
        items.reserve(counts_.size());
        std::int64_t total = 0;
        for (const auto& kv : counts_) {
            items.push_back(&kv);
            total += kv.second;
        }

        std::vector<double> score(items.size());
        if (how == ModeEstimator::histogram) {
            for (std::size_t i = 0; i < items.size(); ++i)
                score[i] = static_cast<double>(items[i]->second);
        } else {
            const int k = grid_.k;
            std::vector<double> bw(k);
            for (int j = 0; j < k; ++j) bw[j] = bandwidth(items, total, j);
            std::vector<std::vector<double>> times(items.size());
            for (std::size_t i = 0; i < items.size(); ++i)
                times[i] = location_to_design(grid_, items[i]->first);
            for (std::size_t i = 0; i < items.size(); ++i) {
                double acc = 0.0;
                for (std::size_t s = 0; s < items.size(); ++s) {
                    double q = 0.0;
                    for (int j = 0; j < k; ++j) {
                        const double z = (times[i][j] - times[s][j]) / bw[j];
                        q += z * z;
                    }
                    acc += static_cast<double>(items[s]->second) * std::exp(-0.5 * q);
                }
                score[i] = acc;
            }
        }

        std::size_t best = 0;
        for (std::size_t i = 1; i < items.size(); ++i) {
            if (score[i] > score[best]) {
                best = i;
            } else if (score[i] == score[best]) {
                const auto* a = stats.stats_at(items[i]->first);
                const auto* b = stats.stats_at(items[best]->first);
                const double ma = a ? a->mean : 0.0;
                const double mb = b ? b->mean : 0.0;
                if (ma > mb || (ma == mb && items[i]->first < items[best]->first)) best = i;
            }
        }
        return items[best]->first;
    }

private:
    double bandwidth(const std::vector<const std::pair<const DesignLocation, std::int64_t>*>& items,
                     std::int64_t total, int coord) const {
        std::vector<std::pair<double, std::int64_t>> vals;
        vals.reserve(items.size());
        for (const auto* kv : items)
            vals.emplace_back(grid_.time_at(kv->first[static_cast<std::size_t>(coord)]), kv->second);
        std::sort(vals.begin(), vals.end());

        double mean = 0.0;
        for (const auto& [v, c] : vals) mean += v * static_cast<double>(c);
        mean /= static_cast<double>(total);
        double var = 0.0;
        for (const auto& [v, c] : vals) var += static_cast<double>(c) * (v - mean) * (v - mean);
        var /= static_cast<double>(total);
        const double sd = std::sqrt(var);

        const auto quantile = [&](double p) {
            const auto target = static_cast<double>(total) * p;
            double cum = 0.0;
            for (const auto& [v, c] : vals) {
                cum += static_cast<double>(c);
                if (cum >= target) return v;
            }
            return vals.back().first;
        };
        const double iqr = quantile(0.75) - quantile(0.25);

        double spread = sd;
        if (iqr > 0.0) spread = std::min(spread, iqr / 1.34);
        double bw = 0.9 * spread * std::pow(static_cast<double>(total), -0.2);
        if (!(bw > 0.0)) bw = grid_.step;
        return bw;
    }

    TimeGrid grid_;
    std::unordered_map<DesignLocation, std::int64_t, LocationHash> counts_;
};

}  // namespace detail

template <UtilityModel M>
RunResult run_muller(const M& model, const TimeGrid& grid, const MullerConfig& cfg,
                     std::uint64_t seed) {
    cfg.validate();
    grid.validate();
    const int points = grid.points();
    const int k = grid.k;
    const int J = cfg.replicates;

    RunResult result;
    result.system = ParticleSystem(grid);
    ParticleSystem& system = result.system;
    detail::VisitAccumulator visits(grid);

    // J prior-predictive utility draws at a location; returns the log product
    // and logs every draw into the running statistics.
    const auto evaluate = [&](const DesignLocation& raw, std::mt19937_64& rng) {
        auto canonical = canonicalize(raw, points);
        const auto design = location_to_design(grid, canonical);
        double log_prod = 0.0;
        for (int j = 0; j < J; ++j) {
            const auto data = model.simulate(design, rng);
            const double u = model.utility(design, data, rng);
            system.record(canonical, u);
            log_prod += log_scale<M>(u);
            ++result.evaluations;
        }
        return log_prod;
    };

    auto rng0 = make_engine(seed, stream_key(stream::muller, 0));
    DesignLocation current(static_cast<std::size_t>(k));
    if (cfg.initial) {
        current = *cfg.initial;
        if (static_cast<int>(current.size()) != k)
            throw std::invalid_argument("muller: initial location has wrong dimension");
    } else {
        std::uniform_int_distribution<std::int32_t> unif(0, points - 1);
        for (auto& idx : current) idx = unif(rng0);
    }
    double log_u = evaluate(current, rng0);

    std::uniform_int_distribution<std::int32_t> unif_idx(0, points - 1);
    const PerturbKernel kernel{cfg.lambda, points, k};
    DesignLocation proposal(static_cast<std::size_t>(k));

    for (std::int64_t i = 1; i <= cfg.iterations; ++i) {
        auto rng = make_engine(seed, stream_key(stream::muller, static_cast<std::uint64_t>(i)));
        bool on_grid = true;
        if (cfg.proposal == ProposalKind::uniform) {
            for (auto& idx : proposal) idx = unif_idx(rng);
        } else {
            on_grid = propose_on_grid(current, kernel, rng, proposal);
        }
        ++result.proposed;
        if (on_grid) {
            const double log_u_star = evaluate(proposal, rng);
            std::uniform_real_distribution<double> u01(0.0, 1.0);
            if (std::log(u01(rng)) < log_u_star - log_u) {
                current = proposal;
                log_u = log_u_star;
                ++result.accepted;
            }
        } else {
            ++result.off_grid;
        }
        visits.visit(canonicalize(current, points));
    }

    const auto best_loc = visits.mode(cfg.mode, system);
    result.fill_best_from(system.row_for(*system.entry_at(best_loc)));
    result.top = system.top_designs(cfg.top_table);
    return result;
}

}  // namespace bode

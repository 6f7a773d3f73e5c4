#pragma once

#include <algorithm>
#include <map>
#include <random>
#include <stdexcept>
#include <vector>

#include "bode/grid.hpp"

namespace bode {

// Categorical draw over an explicit weight table. The optimizer hot path
// samples through ParticleSystem::sample_active instead; this form backs the
// generic contract and the tests.
template <typename Key, typename Rng>
Key sample_categorical(const std::map<Key, double>& weights, Rng& rng) {
    double total = 0.0;
    for (const auto& [key, w] : weights) {
        if (w < 0.0) throw std::domain_error("sample_categorical: negative weight");
        total += w;
    }
    if (!(total > 0.0)) throw std::domain_error("sample_categorical: all weights zero");
    std::uniform_real_distribution<double> unif(0.0, total);
    double u = unif(rng);
    for (const auto& [key, w] : weights) {
        u -= w;
        if (u <= 0.0) return key;
    }
    return weights.rbegin()->first;
}

// Random-walk kernel moving every coordinate by the difference of two
// independent Poisson(lambda) variates, clamped to the grid.
struct PerturbKernel {
    double lambda = 4.0;
    int grid_points = 2;
    int k = 1;

    void validate() const {
        if (lambda < 0.0) throw std::domain_error("perturb: lambda must be >= 0");
        if (grid_points < 2) throw std::domain_error("perturb: grid too small");
    }
};

template <typename Rng>
std::int32_t skellam_displacement(double lambda, Rng& rng) {
    if (lambda == 0.0) return 0;
    std::poisson_distribution<std::int32_t> pois(lambda);
    return pois(rng) - pois(rng);
}

// Perturb a canonical location; out-of-grid coordinates are clamped and the
// result re-canonicalized. lambda = 0 is the identity.
template <typename Rng>
DesignLocation perturb(const DesignLocation& loc, const PerturbKernel& kernel, Rng& rng) {
    if (kernel.lambda == 0.0) return loc;
    DesignLocation out(loc.size());
    const std::int32_t hi = kernel.grid_points - 1;
    for (std::size_t i = 0; i < loc.size(); ++i) {
        const std::int32_t moved = loc[i] + skellam_displacement(kernel.lambda, rng);
        out[i] = std::clamp(moved, std::int32_t{0}, hi);
    }
    std::sort(out.begin(), out.end());
    return out;
}

// Same kernel on a raw (unsorted) coordinate vector, rejecting moves that
// leave the grid: the Metropolis chains keep proposal symmetry this way
// instead of clamping. Returns false when the proposal was off-grid.
template <typename Rng>
bool propose_on_grid(const DesignLocation& current, const PerturbKernel& kernel, Rng& rng,
                     DesignLocation& proposal) {
    proposal.resize(current.size());
    bool inside = true;
    for (std::size_t i = 0; i < current.size(); ++i) {
        const std::int32_t moved = current[i] + skellam_displacement(kernel.lambda, rng);
        proposal[i] = moved;
        inside = inside && moved >= 0 && moved < kernel.grid_points;
    }
    return inside;
}

// N draws with replacement, probability proportional to weight.
template <typename Rng>
std::vector<std::size_t> multinomial_resample(const std::vector<double>& weights, std::size_t n,
                                              Rng& rng) {
    double total = 0.0;
    for (double w : weights) {
        if (w < 0.0) throw std::domain_error("multinomial_resample: negative weight");
        total += w;
    }
    if (!(total > 0.0)) throw std::domain_error("multinomial_resample: all weights zero");

    std::vector<double> cumulative(weights.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        acc += weights[i];
        cumulative[i] = acc;
    }
    std::uniform_real_distribution<double> unif(0.0, total);
    std::vector<std::size_t> picks(n);
    for (std::size_t j = 0; j < n; ++j) {
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), unif(rng));
        if (it == cumulative.end()) --it;
        picks[j] = static_cast<std::size_t>(it - cumulative.begin());
    }
    return picks;
}

}  // namespace bode

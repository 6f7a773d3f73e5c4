#pragma once

#include <cmath>
#include <concepts>
#include <random>
#include <stdexcept>
#include <vector>

namespace bode {

// Contract every benchmark model satisfies: simulate a prior-predictive
// dataset at a design and score a (design, dataset) pair. Models whose
// natural utility already lives on the log scale (so values may be negative)
// declare log_scale_utility = true.
template <typename M>
concept UtilityModel = requires(const M& m, const std::vector<double>& design,
                                std::mt19937_64& rng, const typename M::Dataset& y) {
    typename M::Dataset;
    { m.simulate(design, rng) } -> std::same_as<typename M::Dataset>;
    { m.utility(design, y, rng) } -> std::convertible_to<double>;
    { M::log_scale_utility } -> std::convertible_to<bool>;
};

// Utility on the log scale, as needed by the product targets of the
// Metropolis-based optimizers. Positive-scale models must produce u > 0.
template <UtilityModel M>
double log_scale(double u) {
    if constexpr (M::log_scale_utility) {
        return u;
    } else {
        if (!(u > 0.0))
            throw std::domain_error(
                "utility must be positive for a product target; shift the utility or use a "
                "log-scale model with exponentiation enabled");
        return std::log(u);
    }
}

}  // namespace bode

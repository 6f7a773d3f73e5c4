#pragma once

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

namespace bode {

// 15-dimensional benchmark utility: a scaled Gaussian bump centred at
// mu = (0.5, 1.5, ..., 14.5) times multiplicative lognormal noise. Cheap to
// evaluate, unimodal and fairly flat, so it exercises high-dimensional
// search behaviour without a real inference problem attached.
struct ToyModel {
    using Dataset = double;  // the lognormal noise factor
    static constexpr bool log_scale_utility = false;

    double noise_sdlog = 0.03;
    int dimension = 15;

    static std::vector<double> optimum(int dimension = 15) {
        std::vector<double> mu(static_cast<std::size_t>(dimension));
        for (int i = 0; i < dimension; ++i) mu[static_cast<std::size_t>(i)] = i + 0.5;
        return mu;
    }

    double bump(const std::vector<double>& design) const {
        if (static_cast<int>(design.size()) != dimension)
            throw std::invalid_argument("toy: wrong design dimension");
        double ss = 0.0;
        for (std::size_t i = 0; i < design.size(); ++i) {
            const double d = design[i] - (static_cast<double>(i) + 0.5);
            ss += d * d;
        }
        return std::exp(-ss / 20.0);
    }

    Dataset simulate(const std::vector<double>&, std::mt19937_64& rng) const {
        std::normal_distribution<double> stdnorm(0.0, 1.0);
        return std::exp(noise_sdlog * stdnorm(rng));
    }

    double utility(const std::vector<double>& design, const Dataset& noise,
                   std::mt19937_64&) const {
        return bump(design) * noise;
    }

    // Oracle for scoring search output; the lognormal mean factor is common
    // to all designs so it never changes the argmax.
    double true_expected_utility(const std::vector<double>& design) const {
        return bump(design) * std::exp(0.5 * noise_sdlog * noise_sdlog);
    }
};

}  // namespace bode

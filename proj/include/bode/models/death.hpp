#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <mutex>
#include <random>
#include <shared_mutex>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "bode/math/gauss_hermite.hpp"

namespace bode {

// Pure death process: population n thins binomially with per-capita rate
// beta, observed at the design's timepoints. beta carries a lognormal prior
// and the utility is the posterior precision 1/Var(beta | y), computed from
// the moments K_i = integral of beta^i * likelihood * prior via
// Gauss-Hermite quadrature under the lognormal substitution.
struct DeathModel {
    using Dataset = std::vector<int>;
    static constexpr bool log_scale_utility = false;

    int population = 50;
    double prior_meanlog = -0.005;
    double prior_varlog = 0.01;
    int quad_points = 64;
    // When set, evaluations return the exact expected utility instead of a
    // noisy prior-predictive draw. The paper-style algorithm comparison runs
    // this way; the model is simple enough that no stochastic estimate is
    // needed.
    bool exact_evaluation = false;

    DeathModel() { init(); }
    DeathModel(int n, double meanlog, double varlog, int quad, bool exact = false)
        : population(n), prior_meanlog(meanlog), prior_varlog(varlog), quad_points(quad),
          exact_evaluation(exact) {
        init();
    }
    DeathModel(const DeathModel& other)
        : population(other.population), prior_meanlog(other.prior_meanlog),
          prior_varlog(other.prior_varlog), quad_points(other.quad_points),
          exact_evaluation(other.exact_evaluation) {
        init();
    }
    DeathModel& operator=(const DeathModel&) = delete;

    Dataset simulate(const std::vector<double>& design, std::mt19937_64& rng) const {
        if (exact_evaluation) return {};
        check_design(design);
        std::normal_distribution<double> stdnorm(0.0, 1.0);
        const double beta = std::exp(prior_meanlog + sdlog_ * stdnorm(rng));
        Dataset counts(design.size());
        int current = population;
        double t_prev = 0.0;
        for (std::size_t i = 0; i < design.size(); ++i) {
            const double dt = design[i] - t_prev;
            if (dt > 0.0 && current > 0) {
                std::binomial_distribution<int> thin(current, std::exp(-beta * dt));
                current = thin(rng);
            }
            counts[i] = current;
            t_prev = design[i];
        }
        return counts;
    }

    double utility(const std::vector<double>& design, const Dataset& counts,
                   std::mt19937_64&) const {
        if (exact_evaluation) return exact_expected_utility_cached(design);
        return utility_from_moments(posterior_moments(design, counts));
    }

    // K_i(y) = E_prior[ beta^i L(y|beta) ], i = 0,1,2. Likelihood terms are
    // accumulated in log space and exponentiated with a max shift.
    std::array<double, 3> posterior_moments(const std::vector<double>& design,
                                            const Dataset& counts) const {
        check_design(design);
        if (counts.size() != design.size())
            throw std::invalid_argument("death: dataset size differs from design size");
        const auto q = static_cast<std::size_t>(quad_points);
        std::vector<double> ll(q);
        for (std::size_t j = 0; j < q; ++j) {
            double acc = 0.0;
            int prev = population;
            double t_prev = 0.0;
            for (std::size_t i = 0; i < design.size(); ++i) {
                acc += log_transition(prev, counts[i], beta_[j] * (design[i] - t_prev));
                prev = counts[i];
                t_prev = design[i];
            }
            ll[j] = acc;
        }
        double shift = ll[0];
        for (std::size_t j = 1; j < q; ++j) shift = std::max(shift, ll[j]);
        if (!std::isfinite(shift))
            throw std::runtime_error("death: zero likelihood for dataset (non-monotone counts?)");
        std::array<double, 3> k{0.0, 0.0, 0.0};
        for (std::size_t j = 0; j < q; ++j) {
            const double term = wq_[j] * std::exp(ll[j] - shift);
            k[0] += term;
            k[1] += term * beta_[j];
            k[2] += term * beta_[j] * beta_[j];
        }
        const double scale = std::exp(shift);
        return {k[0] * scale, k[1] * scale, k[2] * scale};
    }

    static double utility_from_moments(const std::array<double, 3>& k) {
        const double denom = k[2] * k[0] - k[1] * k[1];
        if (!(k[0] > 0.0) || !(denom > 0.0))
            throw std::runtime_error("death: degenerate posterior moments");
        return k[0] * k[0] / denom;
    }

    // Eq.-style exact expected utility: sum of K0^3 / (K2 K0 - K1^2) over
    // all monotone outcome vectors. Feasible for k <= 2.
    double exact_expected_utility(const std::vector<double>& design) const {
        check_design(design);
        if (design.size() > 2)
            throw std::domain_error(
                "death: exact enumeration supported for k <= 2 only; use Monte Carlo estimation");
        const auto q = static_cast<std::size_t>(quad_points);

        // log transition tables per node and interval
        std::vector<std::vector<double>> lp(design.size()), l1p(design.size());
        double t_prev = 0.0;
        for (std::size_t i = 0; i < design.size(); ++i) {
            lp[i].resize(q);
            l1p[i].resize(q);
            const double dt = design[i] - t_prev;
            for (std::size_t j = 0; j < q; ++j) {
                const double x = beta_[j] * dt;
                lp[i][j] = -x;
                l1p[i][j] = x > 0.0 ? std::log(-std::expm1(-x)) : -std::numeric_limits<double>::infinity();
            }
            t_prev = design[i];
        }

        const auto accumulate = [&](const std::vector<double>& ll) {
            double shift = ll[0];
            for (std::size_t j = 1; j < q; ++j) shift = std::max(shift, ll[j]);
            if (!std::isfinite(shift)) return 0.0;
            double k0 = 0.0, k1 = 0.0, k2 = 0.0;
            for (std::size_t j = 0; j < q; ++j) {
                const double term = wq_[j] * std::exp(ll[j] - shift);
                k0 += term;
                k1 += term * beta_[j];
                k2 += term * beta_[j] * beta_[j];
            }
            const double denom = k2 * k0 - k1 * k1;
            if (!(denom > 0.0)) throw std::runtime_error("death: degenerate outcome moments");
            return std::exp(shift) * k0 * k0 * k0 / denom;
        };

        std::vector<double> ll(q);
        double total = 0.0;
        if (design.size() == 1) {
            for (int y = 0; y <= population; ++y) {
                for (std::size_t j = 0; j < q; ++j)
                    ll[j] = log_pmf(population, y, lp[0][j], l1p[0][j]);
                total += accumulate(ll);
            }
        } else {
            for (int y1 = 0; y1 <= population; ++y1) {
                for (int y2 = 0; y2 <= y1; ++y2) {
                    for (std::size_t j = 0; j < q; ++j)
                        ll[j] = log_pmf(population, y1, lp[0][j], l1p[0][j]) +
                                log_pmf(y1, y2, lp[1][j], l1p[1][j]);
                    total += accumulate(ll);
                }
            }
        }
        return total;
    }

    double exact_expected_utility_cached(const std::vector<double>& design) const {
        {
            std::shared_lock lock(cache_mutex_);
            auto it = cache_.find(design);
            if (it != cache_.end()) return it->second;
        }
        const double value = exact_expected_utility(design);
        std::unique_lock lock(cache_mutex_);
        cache_.emplace(design, value);
        return value;
    }

private:
    void init() {
        if (population < 1) throw std::domain_error("death: population must be >= 1");
        if (!(prior_varlog > 0.0)) throw std::domain_error("death: prior_varlog must be > 0");
        if (quad_points < 16) throw std::domain_error("death: need at least 16 quadrature nodes");
        sdlog_ = std::sqrt(prior_varlog);
        const auto rule = gauss_hermite(quad_points);
        const auto q = static_cast<std::size_t>(quad_points);
        beta_.resize(q);
        wq_.resize(q);
        const double inv_sqrt_pi = 1.0 / std::sqrt(std::acos(-1.0));
        for (std::size_t j = 0; j < q; ++j) {
            beta_[j] = std::exp(prior_meanlog + sdlog_ * std::sqrt(2.0) * rule.nodes[j]);
            wq_[j] = rule.weights[j] * inv_sqrt_pi;
        }
        log_choose_.assign((population + 1) * (population + 1), 0.0);
        for (int a = 0; a <= population; ++a)
            for (int b = 0; b <= a; ++b)
                log_choose_[static_cast<std::size_t>(a * (population + 1) + b)] =
                    std::lgamma(a + 1.0) - std::lgamma(b + 1.0) - std::lgamma(a - b + 1.0);
    }

    static void check_design(const std::vector<double>& design) {
        double prev = 0.0;
        for (double t : design) {
            if (t < prev) throw std::invalid_argument("death: design times must be non-decreasing");
            prev = t;
        }
    }

    // log Bin(y | y_prev, e^{-x}) with lp = -x and l1p = log(1 - e^{-x}).
    double log_pmf(int y_prev, int y, double lp, double l1p) const {
        if (y > y_prev) return -std::numeric_limits<double>::infinity();
        if (lp == 0.0) return y == y_prev ? 0.0 : -std::numeric_limits<double>::infinity();
        double acc = log_choose_[static_cast<std::size_t>(y_prev * (population + 1) + y)] +
                     y * lp;
        if (y_prev > y) acc += (y_prev - y) * l1p;
        return acc;
    }

    double log_transition(int y_prev, int y, double x) const {
        if (x == 0.0) return y == y_prev ? 0.0 : -std::numeric_limits<double>::infinity();
        const double l1p = std::log(-std::expm1(-x));
        return log_pmf(y_prev, y, -x, l1p);
    }

    struct TimesHash {
        std::size_t operator()(const std::vector<double>& v) const {
            std::uint64_t h = 1469598103934665603ULL;
            for (double d : v) {
                std::uint64_t bits;
                static_assert(sizeof(bits) == sizeof(d));
                __builtin_memcpy(&bits, &d, sizeof(bits));
                h ^= bits;
                h *= 1099511628211ULL;
            }
            return static_cast<std::size_t>(h);
        }
    };

    double sdlog_ = 0.1;
    std::vector<double> beta_;
    std::vector<double> wq_;
    std::vector<double> log_choose_;
    mutable std::shared_mutex cache_mutex_;
    mutable std::unordered_map<std::vector<double>, double, TimesHash> cache_;
};

}  // namespace bode

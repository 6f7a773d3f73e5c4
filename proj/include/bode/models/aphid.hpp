#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "bode/math/rk4.hpp"

namespace bode {

// Aphid birth-death process, normal moment-closure approximation: births at
// rate birth*N(t), deaths at rate death*N(t)*C(t) with C the cumulative count.
struct AphidParams {
    double birth = 0.246;
    double death = 0.000134;
};

// First two moments of (N, C): means m1, m2 and (co)variances v11, v12, v22.
struct MomentState {
    double m1 = 0.0, m2 = 0.0, v11 = 0.0, v12 = 0.0, v22 = 0.0;

    MomentState operator+(const MomentState& o) const {
        return {m1 + o.m1, m2 + o.m2, v11 + o.v11, v12 + o.v12, v22 + o.v22};
    }
    MomentState operator*(double s) const { return {m1 * s, m2 * s, v11 * s, v12 * s, v22 * s}; }
    bool finite() const {
        return std::isfinite(m1) && std::isfinite(m2) && std::isfinite(v11) &&
               std::isfinite(v12) && std::isfinite(v22);
    }
};

// Moment-closure ODE right-hand side; third central moments are closed to
// zero under the normal approximation.
inline MomentState moment_rhs(const MomentState& s, const AphidParams& p) {
    MomentState d;
    d.m1 = p.birth * s.m1 - p.death * (s.m1 * s.m2 + s.v12);
    d.m2 = p.birth * s.m1;
    d.v11 = p.death * (s.v12 - 2.0 * s.m1 * s.v12 + s.m2 * (s.m1 - 2.0 * s.v11)) +
            p.birth * (s.m1 + 2.0 * s.v11);
    d.v12 = p.birth * (s.m1 + s.v11 + s.v12) - p.death * (s.m1 * s.v22 + s.m2 * s.v12);
    d.v22 = p.birth * (s.m1 + 2.0 * s.v12);
    return d;
}

inline MomentState integrate_moments(const MomentState& init, const AphidParams& p,
                                     double dt_total, double h = 0.05) {
    const auto out = rk4_integrate(init, dt_total, h, [&](const MomentState& s) {
        return moment_rhs(s, p);
    });
    if (!out.finite())
        throw std::runtime_error("aphid: moment integration diverged at birth=" +
                                 std::to_string(p.birth) + " death=" + std::to_string(p.death));
    return out;
}

struct AphidPrior {
    double mean_birth = 0.246;
    double mean_death = 0.000134;
    double sd_birth = 0.0079;
    double sd_death = 0.00002;
    double covariance = 5.8e-8;

    double correlation() const { return covariance / (sd_birth * sd_death); }

    void validate() const {
        if (!(sd_birth > 0.0 && sd_death > 0.0))
            throw std::domain_error("aphid prior: standard deviations must be > 0");
        if (std::abs(correlation()) >= 1.0)
            throw std::domain_error("aphid prior: covariance not positive definite");
    }

    // Rejection sample from the positive quadrant. The untruncated mass
    // outside is negligible, so a long rejection loop means a broken setup.
    template <typename Rng>
    AphidParams draw_truncated(Rng& rng) const {
        std::normal_distribution<double> stdnorm(0.0, 1.0);
        const double rho = correlation();
        const double tail = std::sqrt(1.0 - rho * rho);
        for (int attempt = 0; attempt < 1000; ++attempt) {
            const double z1 = stdnorm(rng);
            const double z2 = stdnorm(rng);
            AphidParams p;
            p.birth = mean_birth + sd_birth * z1;
            p.death = mean_death + sd_death * (rho * z1 + tail * z2);
            if (p.birth > 0.0 && p.death > 0.0) return p;
        }
        throw std::runtime_error("aphid prior: rejection sampling failed 1000 times");
    }

    double log_density(const AphidParams& p) const {
        if (p.birth <= 0.0 || p.death <= 0.0) return -std::numeric_limits<double>::infinity();
        const double rho = correlation();
        const double z1 = (p.birth - mean_birth) / sd_birth;
        const double z2 = (p.death - mean_death) / sd_death;
        const double quad = (z1 * z1 - 2.0 * rho * z1 * z2 + z2 * z2) / (1.0 - rho * rho);
        return -0.5 * quad - std::log(2.0 * std::acos(-1.0) * sd_birth * sd_death *
                                      std::sqrt(1.0 - rho * rho));
    }
};

struct AphidDataset {
    std::vector<double> days;                       // distinct, ascending
    std::vector<std::pair<double, double>> counts;  // (n, c) at each day
    AphidParams generating;                         // chain initializer
};

struct AphidMCMCConfig {
    int iterations = 10000;
    int burn_in = 500;
    double proposal_sd_birth = 0.0009;
    double proposal_sd_death = 0.000004;

    void validate() const {
        if (!(iterations > burn_in && burn_in >= 0))
            throw std::domain_error("aphid mcmc: need iterations > burn_in >= 0");
    }
};

struct AphidPosterior {
    std::vector<AphidParams> draws;
    double acceptance_rate = 0.0;
    std::vector<std::string> warnings;
};

struct AphidModel {
    using Dataset = AphidDataset;
    static constexpr bool log_scale_utility = false;

    AphidPrior prior;
    AphidMCMCConfig mcmc;
    double n0 = 28.0;
    double c0 = 28.0;
    double rk4_step = 0.05;

    // Prior-predictive walk: between observations the moments are integrated
    // from the last observed state (variances reset to zero) and the next
    // (n, c) is a bivariate normal draw, clamped to n >= 0 and c >= n.
    Dataset simulate(const std::vector<double>& design, std::mt19937_64& rng) const {
        Dataset data;
        data.days = collapse_days(design);
        data.generating = prior.draw_truncated(rng);
        std::normal_distribution<double> stdnorm(0.0, 1.0);
        double n = n0, c = c0, t_prev = 0.0;
        for (double day : data.days) {
            const auto m = integrate_moments({n, c, 0.0, 0.0, 0.0}, data.generating,
                                             day - t_prev, rk4_step);
            const auto [l11, l21, l22] = cholesky2(m.v11, m.v12, m.v22);
            const double z1 = stdnorm(rng);
            const double z2 = stdnorm(rng);
            n = std::max(m.m1 + l11 * z1, 0.0);
            c = std::max(m.m2 + l21 * z1 + l22 * z2, n);
            data.counts.emplace_back(n, c);
            t_prev = day;
        }
        return data;
    }

    // Sum of log bivariate normal transition densities, each conditioned on
    // the previous observed state.
    double log_likelihood(const AphidParams& p, const Dataset& data) const {
        double acc = 0.0;
        double n = n0, c = c0, t_prev = 0.0;
        for (std::size_t i = 0; i < data.days.size(); ++i) {
            const auto m = integrate_moments({n, c, 0.0, 0.0, 0.0}, p, data.days[i] - t_prev,
                                             rk4_step);
            acc += log_bvn(data.counts[i].first, data.counts[i].second, m);
            n = data.counts[i].first;
            c = data.counts[i].second;
            t_prev = data.days[i];
        }
        return acc;
    }

    // Random-walk Metropolis on (birth, death), initialized at the parameter
    // values that generated the dataset; proposal correlation equals the
    // prior correlation.
    AphidPosterior posterior(const Dataset& data, std::mt19937_64& rng) const {
        mcmc.validate();
        AphidPosterior out;
        const double rho = prior.correlation();
        const double tail = std::sqrt(1.0 - rho * rho);
        std::normal_distribution<double> stdnorm(0.0, 1.0);
        std::uniform_real_distribution<double> u01(0.0, 1.0);

        AphidParams cur = data.generating;
        double cur_lp = prior.log_density(cur) + log_likelihood(cur, data);
        out.draws.reserve(static_cast<std::size_t>(mcmc.iterations - mcmc.burn_in));
        std::int64_t accepted = 0;
        for (int it = 0; it < mcmc.iterations; ++it) {
            const double z1 = stdnorm(rng);
            const double z2 = stdnorm(rng);
            AphidParams prop;
            prop.birth = cur.birth + mcmc.proposal_sd_birth * z1;
            prop.death = cur.death + mcmc.proposal_sd_death * (rho * z1 + tail * z2);
            double prop_lp = -std::numeric_limits<double>::infinity();
            if (prop.birth > 0.0 && prop.death > 0.0) {
                try {
                    prop_lp = prior.log_density(prop) + log_likelihood(prop, data);
                } catch (const std::exception&) {
                    prop_lp = -std::numeric_limits<double>::infinity();
                }
            }
            if (std::log(u01(rng)) < prop_lp - cur_lp) {
                cur = prop;
                cur_lp = prop_lp;
                ++accepted;
            }
            if (it >= mcmc.burn_in) out.draws.push_back(cur);
        }
        out.acceptance_rate = static_cast<double>(accepted) / mcmc.iterations;
        if (out.acceptance_rate < 0.01)
            out.warnings.push_back("mcmc acceptance rate below 1%");
        if (out.acceptance_rate > 0.99)
            out.warnings.push_back("mcmc acceptance rate above 99%");
        return out;
    }

    // Generalized precision 1/det of the posterior sample covariance.
    double utility(const std::vector<double>&, const Dataset& data, std::mt19937_64& rng) const {
        const auto post = posterior(data, rng);
        double mb = 0.0, md = 0.0;
        for (const auto& d : post.draws) {
            mb += d.birth;
            md += d.death;
        }
        const auto n = static_cast<double>(post.draws.size());
        mb /= n;
        md /= n;
        double cbb = 0.0, cbd = 0.0, cdd = 0.0;
        for (const auto& d : post.draws) {
            const double a = d.birth - mb;
            const double b = d.death - md;
            cbb += a * a;
            cbd += a * b;
            cdd += b * b;
        }
        cbb /= n - 1.0;
        cbd /= n - 1.0;
        cdd /= n - 1.0;
        const double det = cbb * cdd - cbd * cbd;
        if (!(det > 0.0))
            throw std::runtime_error("aphid: singular posterior sample covariance (stuck chain?)");
        return 1.0 / det;
    }

    static std::vector<double> collapse_days(const std::vector<double>& design) {
        std::vector<double> days(design);
        std::sort(days.begin(), days.end());
        days.erase(std::unique(days.begin(), days.end()), days.end());
        if (!days.empty() && days.front() <= 0.0)
            throw std::invalid_argument("aphid: observation days must be > 0");
        return days;
    }

private:
    // Cholesky factor of [[v11, v12],[v12, v22]] with a small diagonal
    // regularizer; rejects matrices that are indefinite beyond integration
    // tolerance.
    static std::tuple<double, double, double> cholesky2(double v11, double v12, double v22) {
        const double det = v11 * v22 - v12 * v12;
        if (det < -1e-9 * std::max(1.0, std::abs(v11 * v22)))
            throw std::runtime_error("aphid: transition covariance not positive semidefinite");
        v11 += 1e-8;
        v22 += 1e-8;
        const double l11 = std::sqrt(v11);
        const double l21 = v12 / l11;
        const double rest = std::max(v22 - l21 * l21, 1e-12);
        return {l11, l21, std::sqrt(rest)};
    }

    static double log_bvn(double x1, double x2, const MomentState& m) {
        double v11 = m.v11, v12 = m.v12, v22 = m.v22;
        double det = v11 * v22 - v12 * v12;
        if (det < -1e-9 * std::max(1.0, std::abs(v11 * v22)))
            throw std::runtime_error("aphid: transition covariance not positive semidefinite");
        v11 += 1e-8;
        v22 += 1e-8;
        det = v11 * v22 - v12 * v12;
        const double d1 = x1 - m.m1;
        const double d2 = x2 - m.m2;
        const double quad = (v22 * d1 * d1 - 2.0 * v12 * d1 * d2 + v11 * d2 * d2) / det;
        return -std::log(2.0 * std::acos(-1.0)) - 0.5 * std::log(det) - 0.5 * quad;
    }
};

}  // namespace bode

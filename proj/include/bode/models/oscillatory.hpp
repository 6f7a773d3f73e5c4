#pragma once

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

namespace bode {

// Damped oscillation y_t = theta e^{-t} sin(6 pi t) + noise with conjugate
// normal-gamma prior: theta | sigma ~ N(b, sigma^2/c), sigma^-2 ~ Ga(g, h).
struct NGPrior {
    double b = 10.0;
    double c = 0.01;
    double g = 3.0;
    double h = 3.0;

    void validate() const {
        if (!(c > 0.0 && g > 0.0 && h > 0.0))
            throw std::domain_error("ng prior: c, g, h must be > 0");
    }
};

// Posterior carries both readings of the rate update. H_standard is the
// completion-of-squares form h + (sum y^2 + b^2 c - B^2 C)/2; H_display is
// h + [sum{y_i - P f_i/Q}^2 + b^2 c + P^2 c/(Q C)]/2. They differ by
// exactly cb(cb + 2P)/(2C); numerical integration of the true posterior
// agrees with the standard form, so that is the default everywhere.
struct NGPosterior {
    double B = 0.0;
    double C = 0.0;
    double G = 0.0;
    double H_standard = 0.0;
    double H_display = 0.0;
    bool q_degenerate = false;  // all regressor values were zero
};

enum class HForm { standard, display };

inline double oscillation_regressor(double t) {
    return std::exp(-t) * std::sin(6.0 * std::acos(-1.0) * t);
}

inline NGPosterior conjugate_update(const NGPrior& prior, const std::vector<double>& design,
                                    const std::vector<double>& y) {
    prior.validate();
    if (design.size() != y.size())
        throw std::invalid_argument("oscillatory: design and data sizes differ");
    const auto k = design.size();

    double p = 0.0, q = 0.0, sum_y2 = 0.0;
    std::vector<double> f(k);
    for (std::size_t i = 0; i < k; ++i) {
        f[i] = oscillation_regressor(design[i]);
        p += f[i] * y[i];
        q += f[i] * f[i];
        sum_y2 += y[i] * y[i];
    }

    NGPosterior post;
    post.C = prior.c + q;
    post.B = (prior.b * prior.c + p) / post.C;
    post.G = prior.g + static_cast<double>(k) / 2.0;
    post.H_standard =
        prior.h + 0.5 * (sum_y2 + prior.b * prior.b * prior.c - post.B * post.B * post.C);

    if (q > 0.0) {
        double resid = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            const double r = y[i] - p * f[i] / q;
            resid += r * r;
        }
        post.H_display = prior.h + 0.5 * (resid + prior.b * prior.b * prior.c +
                                          p * p * prior.c / (q * post.C));
    } else {
        post.H_display = post.H_standard;
        post.q_degenerate = k > 0;
    }
    return post;
}

struct OscillatoryModel {
    using Dataset = std::vector<double>;
    static constexpr bool log_scale_utility = true;

    NGPrior prior;
    HForm h_form = HForm::standard;

    Dataset simulate(const std::vector<double>& design, std::mt19937_64& rng) const {
        prior.validate();
        std::gamma_distribution<double> gamma(prior.g, 1.0 / prior.h);
        std::normal_distribution<double> stdnorm(0.0, 1.0);
        const double sigma = 1.0 / std::sqrt(gamma(rng));
        const double theta = prior.b + sigma / std::sqrt(prior.c) * stdnorm(rng);
        Dataset y(design.size());
        for (std::size_t i = 0; i < design.size(); ++i)
            y[i] = theta * oscillation_regressor(design[i]) + sigma * stdnorm(rng);
        return y;
    }

    // Logged generalized precision, log C - 3 log H.
    double utility(const std::vector<double>& design, const Dataset& y, std::mt19937_64&) const {
        const auto post = conjugate_update(prior, design, y);
        const double H = h_form == HForm::standard ? post.H_standard : post.H_display;
        if (!(H > 0.0)) throw std::runtime_error("oscillatory: nonpositive posterior rate");
        return std::log(post.C) - 3.0 * std::log(H);
    }
};

}  // namespace bode

// Test-only oracle: posterior moments for the conjugate oscillation model by
// brute-force 2-d quadrature over (theta, log sigma). Deliberately avoids the
// closed-form update it is used to check.
#pragma once

#include <cmath>
#include <vector>

#include "bode/models/oscillatory.hpp"

namespace bode::testing {

struct NGOracleMoments {
    double mean_theta = 0.0;
    double var_theta = 0.0;
    double mean_precision = 0.0;
    double var_precision = 0.0;
};

inline NGOracleMoments ng_quadrature_oracle(const NGPrior& prior,
                                            const std::vector<double>& design,
                                            const std::vector<double>& y, int cells = 1200) {
    // integration window from crude data summaries, then verified wide enough
    double p = 0.0, q = 0.0, sum_y2 = 0.0;
    std::vector<double> f(design.size());
    for (std::size_t i = 0; i < design.size(); ++i) {
        f[i] = oscillation_regressor(design[i]);
        p += f[i] * y[i];
        q += f[i] * f[i];
        sum_y2 += y[i] * y[i];
    }
    const double center_theta = q > 0 ? (prior.b * prior.c + p) / (prior.c + q) : prior.b;
    const double scale_sigma2 = (prior.h + 0.5 * sum_y2 + 1.0) / (prior.g + 1.0);
    const double sd_guess = std::sqrt(scale_sigma2 * 10.0 / (prior.c + q));
    const double th_lo = center_theta - 14.0 * sd_guess;
    const double th_hi = center_theta + 14.0 * sd_guess;
    const double s_lo = 0.5 * std::log(scale_sigma2) - 5.0;
    const double s_hi = 0.5 * std::log(scale_sigma2) + 5.0;

    const int n = cells;
    const double dth = (th_hi - th_lo) / n;
    const double ds = (s_hi - s_lo) / n;

    // first pass for the max log integrand, second for the sums
    double peak = -1e300;
    const auto log_post = [&](double theta, double s) {
        const double sigma2 = std::exp(2.0 * s);
        const double prec = 1.0 / sigma2;
        double lp = 0.5 * std::log(prior.c / (2.0 * M_PI * sigma2)) -
                    0.5 * prior.c * (theta - prior.b) * (theta - prior.b) / sigma2;
        lp += prior.g * std::log(prior.h) - std::lgamma(prior.g) +
              (prior.g - 1.0) * std::log(prec) - prior.h * prec + std::log(2.0 * prec);
        for (std::size_t i = 0; i < design.size(); ++i) {
            const double r = y[i] - theta * f[i];
            lp += -0.5 * std::log(2.0 * M_PI * sigma2) - 0.5 * r * r / sigma2;
        }
        return lp;
    };
    for (int a = 0; a <= n; a += 8)
        for (int b = 0; b <= n; b += 8)
            peak = std::max(peak, log_post(th_lo + a * dth, s_lo + b * ds));

    double z = 0.0, sth = 0.0, sth2 = 0.0, spr = 0.0, spr2 = 0.0;
    for (int a = 0; a <= n; ++a) {
        const double theta = th_lo + a * dth;
        for (int b = 0; b <= n; ++b) {
            const double s = s_lo + b * ds;
            const double w = std::exp(log_post(theta, s) - peak);
            const double prec = std::exp(-2.0 * s);
            z += w;
            sth += w * theta;
            sth2 += w * theta * theta;
            spr += w * prec;
            spr2 += w * prec * prec;
        }
    }
    NGOracleMoments out;
    out.mean_theta = sth / z;
    out.var_theta = sth2 / z - out.mean_theta * out.mean_theta;
    out.mean_precision = spr / z;
    out.var_precision = spr2 / z - out.mean_precision * out.mean_precision;
    return out;
}

}  // namespace bode::testing

#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace bode {

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// Gauss-Hermite rule for the weight exp(-x^2): Newton iteration on the
// orthonormal Hermite recurrence with the usual asymptotic first guesses.
// With the substitution x = z/sqrt(2), sum_q w_q f(x_q) / sqrt(pi)
// approximates a standard-normal expectation of f.
inline QuadratureRule gauss_hermite(int n) {
    if (n < 1) throw std::domain_error("gauss_hermite: need n >= 1");
    QuadratureRule rule;
    rule.nodes.assign(n, 0.0);
    rule.weights.assign(n, 0.0);

    const double pim4 = 0.7511255444649425;  // pi^(-1/4)
    const int half = (n + 1) / 2;
    double z = 0.0;
    for (int i = 0; i < half; ++i) {
        if (i == 0) {
            z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
        } else if (i == 1) {
            z -= 1.14 * std::pow(n, 0.426) / z;
        } else if (i == 2) {
            z = 1.86 * z - 0.86 * rule.nodes[0];
        } else if (i == 3) {
            z = 1.91 * z - 0.91 * rule.nodes[1];
        } else {
            z = 2.0 * z - rule.nodes[i - 2];
        }

        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p1 = pim4;
            double p2 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = z * std::sqrt(2.0 / (j + 1)) * p2 - std::sqrt(double(j) / (j + 1)) * p3;
            }
            pp = std::sqrt(2.0 * n) * p2;
            const double dz = p1 / pp;
            z -= dz;
            if (std::abs(dz) <= 1e-15 * (1.0 + std::abs(z))) break;
        }
        rule.nodes[i] = z;
        rule.nodes[n - 1 - i] = -z;
        rule.weights[i] = 2.0 / (pp * pp);
        rule.weights[n - 1 - i] = rule.weights[i];
    }
    // store ascending
    for (int i = 0; i < n / 2; ++i) {
        std::swap(rule.nodes[i], rule.nodes[n - 1 - i]);
        std::swap(rule.weights[i], rule.weights[n - 1 - i]);
    }
    return rule;
}

}  // namespace bode

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "bode/models/toy.hpp"
#include "bode/rng.hpp"

using namespace bode;

TEST_CASE("bump geometry", "[toy]") {
    ToyModel model;
    const auto mu = ToyModel::optimum();
    CHECK(model.bump(mu) == 1.0);

    auto shifted = mu;
    shifted[7] = 7.5 + 1.0;
    std::sort(shifted.begin(), shifted.end());
    CHECK(model.bump(shifted) == Catch::Approx(0.951229424500714).epsilon(1e-12));

    // moving any single coordinate by delta scales the bump by exp(-delta^2/20)
    for (int coord : {0, 4, 14}) {
        auto d = mu;
        d[coord] += 0.37;
        std::sort(d.begin(), d.end());
        CHECK(model.bump(d) == Catch::Approx(std::exp(-0.37 * 0.37 / 20.0)).epsilon(1e-12));
    }
}

TEST_CASE("noise distribution", "[toy]") {
    ToyModel model;
    const auto mu = ToyModel::optimum();
    auto rng = make_engine(21, 0);

    SECTION("median utility at the optimum is one") {
        const int reps = 100000;
        std::vector<double> u(reps);
        for (int i = 0; i < reps; ++i) u[i] = model.utility(mu, model.simulate(mu, rng), rng);
        std::nth_element(u.begin(), u.begin() + reps / 2, u.end());
        CHECK(std::abs(u[reps / 2] - 1.0) < 0.002);
    }
    SECTION("log utility at a fixed design is normal with sd 0.03") {
        const int reps = 10000;
        std::vector<double> z(reps);
        for (int i = 0; i < reps; ++i)
            z[i] = std::log(model.utility(mu, model.simulate(mu, rng), rng)) / 0.03;
        std::sort(z.begin(), z.end());
        double ks = 0.0;
        for (int i = 0; i < reps; ++i) {
            const double cdf = 0.5 * std::erfc(-z[i] / std::sqrt(2.0));
            ks = std::max(ks, std::abs(cdf - (i + 1.0) / reps));
            ks = std::max(ks, std::abs(cdf - static_cast<double>(i) / reps));
        }
        CHECK(ks < 1.63 / std::sqrt(static_cast<double>(reps)));  // 1% critical value
    }
    SECTION("utility is always positive") {
        for (int i = 0; i < 10000; ++i)
            CHECK(model.utility(mu, model.simulate(mu, rng), rng) > 0.0);
    }
}

TEST_CASE("true expected utility oracle", "[toy]") {
    ToyModel model;
    const auto mu = ToyModel::optimum();
    CHECK(model.true_expected_utility(mu) == Catch::Approx(1.0004501012651892).epsilon(1e-12));

    auto rng = make_engine(22, 0);
    std::uniform_real_distribution<double> jitter(-2.0, 2.0);
    for (int trial = 0; trial < 100; ++trial) {
        auto d = mu;
        for (auto& x : d) x = std::clamp(x + jitter(rng), 0.0, 15.0);
        std::sort(d.begin(), d.end());
        const double v = model.true_expected_utility(d);
        CHECK(v > 0.0);
        CHECK(v <= 1.0004501012651892 + 1e-12);
        // ratios reduce to bump ratios
        CHECK(v / model.true_expected_utility(mu) ==
              Catch::Approx(model.bump(d) / model.bump(mu)).epsilon(1e-12));
    }
}

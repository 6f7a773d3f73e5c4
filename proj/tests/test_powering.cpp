#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <vector>

#include "bode/powering.hpp"

using namespace bode;

TEST_CASE("uniform utilities need just over alpha of the designs", "[powering]") {
    const std::vector<double> u(1000, 3.7);
    CHECK(powering_correspondence(u, 1, 0.5) == 501);
    CHECK(powering_correspondence(u, 50, 0.5) == 501);
    CHECK(powering_correspondence(u, 1, 0.25) == 251);
}

TEST_CASE("input validation", "[powering]") {
    CHECK_THROWS_AS(powering_correspondence({}, 1, 0.5), std::domain_error);
    CHECK_THROWS_AS(powering_correspondence({1.0, -2.0}, 1, 0.5), std::domain_error);
    CHECK_THROWS_AS(powering_correspondence({1.0, 0.0}, 1, 0.5), std::domain_error);
    CHECK_THROWS_AS(powering_correspondence({1.0, 2.0}, 0, 0.5), std::domain_error);
    CHECK_THROWS_AS(powering_correspondence({1.0, 2.0}, 1, 0.0), std::domain_error);
    CHECK_THROWS_AS(powering_correspondence({1.0, 2.0}, 1, 1.0), std::domain_error);
}

TEST_CASE("monotone in J and alpha", "[powering]") {
    std::mt19937_64 rng(99);
    std::lognormal_distribution<double> draw(0.0, 0.4);
    std::vector<double> u(500);
    for (auto& v : u) v = draw(rng);

    std::size_t prev = u.size();
    for (int j = 1; j <= 20; ++j) {
        const auto k = powering_correspondence(u, j, 0.5);
        CHECK(k <= prev);
        prev = k;
    }
    for (int j : {1, 5, 20}) {
        CHECK(powering_correspondence(u, j, 0.25) <= powering_correspondence(u, j, 0.5));
        CHECK(powering_correspondence(u, j, 0.125) <= powering_correspondence(u, j, 0.25));
    }
}

TEST_CASE("large powers stay finite in log space", "[powering]") {
    const std::vector<double> u{1e-8, 2e-8, 1e8, 9.9e7};
    const auto k = powering_correspondence(u, 100, 0.5);
    CHECK(k >= 1);
    CHECK(k <= 2);
}

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "bode/particle_system.hpp"

using namespace bode;

namespace {
const TimeGrid kGrid{0.0, 1.0, 0.1, 1};  // 11 points
}

TEST_CASE("running statistics update", "[particles]") {
    ParticleStats s;
    s.add(5.0);
    CHECK(s.n == 1);
    CHECK(s.mean == 5.0);
    CHECK(s.m2 == 0.0);
    s.add(7.0);
    CHECK(s.n == 2);
    CHECK(s.mean == Catch::Approx(6.0));
    CHECK(s.m2 == Catch::Approx(2.0));           // sample variance of {5,7} is 2
    CHECK(s.variance() == Catch::Approx(2.0));
}

TEST_CASE("mean matches a retained log to 1e-10 relative", "[particles]") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> draw(3.0, 20.0);
    ParticleSystem system(kGrid);
    std::vector<double> log;
    for (int i = 0; i < 160; ++i) {
        const double u = draw(rng);
        log.push_back(u);
        system.record({4}, u);
    }
    const auto* st = system.stats_at({4});
    REQUIRE(st != nullptr);
    CHECK(st->n == 160);
    double exact = 0.0;
    for (double u : log) exact += u;
    exact /= static_cast<double>(log.size());
    CHECK(std::abs(st->mean - exact) <= 1e-10 * std::abs(exact));

    double m2 = 0.0;
    for (double u : log) m2 += (u - exact) * (u - exact);
    CHECK(st->m2 == Catch::Approx(m2).epsilon(1e-10));
}

TEST_CASE("non-finite utility is rejected", "[particles]") {
    ParticleSystem system(kGrid);
    CHECK_THROWS_AS(system.record({0}, std::numeric_limits<double>::quiet_NaN()),
                    std::runtime_error);
    CHECK_THROWS_AS(system.record({0}, std::numeric_limits<double>::infinity()),
                    std::runtime_error);
    CHECK(system.visited() == 0);
}

TEST_CASE("refresh retains the top means", "[particles]") {
    ParticleSystem system(kGrid);
    system.record({0}, 1.0);
    system.record({1}, 2.0);
    system.record({2}, 3.0);
    system.record({3}, 4.0);

    SECTION("alpha = 1 keeps every visited location") {
        system.refresh_weights(1.0);
        CHECK(system.active_count() == 4);
    }
    SECTION("alpha = 0.5 keeps the top half") {
        system.refresh_weights(0.5);
        CHECK(system.active_count() == 2);
        CHECK(system.entry_at({2})->weight > 0.0);
        CHECK(system.entry_at({3})->weight > 0.0);
        CHECK(system.entry_at({0})->weight == 0.0);
        CHECK(system.entry_at({1})->weight == 0.0);
    }
    SECTION("no visited locations is an error") {
        ParticleSystem empty(kGrid);
        CHECK_THROWS_AS(empty.refresh_weights(0.5), std::logic_error);
    }
}

TEST_CASE("negative means shift to positive weights, order preserved", "[particles]") {
    ParticleSystem system(kGrid);
    system.record({0}, -2.0);
    system.record({1}, -1.0);
    system.record({2}, 0.0);
    system.refresh_weights(1.0);
    const double w0 = system.entry_at({0})->weight;
    const double w1 = system.entry_at({1})->weight;
    const double w2 = system.entry_at({2})->weight;
    CHECK(w0 > 0.0);
    CHECK(w0 < w1);
    CHECK(w1 < w2);
}

TEST_CASE("ties at the cut are all retained", "[particles]") {
    ParticleSystem system(kGrid);
    system.record({0}, 1.0);
    system.record({1}, 5.0);
    system.record({2}, 5.0);
    system.record({3}, 5.0);
    system.record({4}, 9.0);
    system.refresh_weights(0.4);  // ceil(0.4*5)=2, cut value 5 -> ties keep 4
    CHECK(system.active_count() == 4);
    CHECK(system.entry_at({0})->weight == 0.0);
}

TEST_CASE("refresh is idempotent and respects the cut", "[particles]") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    std::uniform_int_distribution<std::int32_t> pick(0, 10);
    ParticleSystem system(kGrid);
    for (int i = 0; i < 300; ++i) system.record({pick(rng)}, u(rng));

    for (double alpha : {1.0, 0.7, 0.5, 0.25, 0.1}) {
        system.refresh_weights(alpha);
        std::vector<DesignLocation> first;
        for (const auto& e : system.entries())
            if (e.weight > 0.0) first.push_back(e.location);
        system.refresh_weights(alpha);
        std::vector<DesignLocation> second;
        for (const auto& e : system.entries())
            if (e.weight > 0.0) second.push_back(e.location);
        CHECK(first == second);

        double min_kept = std::numeric_limits<double>::infinity();
        double max_dropped = -std::numeric_limits<double>::infinity();
        for (const auto& e : system.entries()) {
            if (e.weight > 0.0)
                min_kept = std::min(min_kept, e.stats.mean);
            else
                max_dropped = std::max(max_dropped, e.stats.mean);
        }
        if (system.active_count() < system.visited()) CHECK(min_kept > max_dropped);
    }
}

TEST_CASE("top designs report normal-theory intervals", "[particles]") {
    ParticleSystem system(kGrid);
    // four values with mean 10 and sample variance 8/3: se = sqrt(8/12)
    for (double u : {8.0, 10.0, 10.0, 12.0}) system.record({3}, u);
    system.record({5}, 1.0);

    const auto rows = system.top_designs(10);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].location == (DesignLocation{3}));
    CHECK(rows[0].mean == Catch::Approx(10.0));
    const double var = (4.0 + 0.0 + 0.0 + 4.0) / 3.0;
    const double half = 1.96 * std::sqrt(var / 4.0);
    CHECK(rows[0].ci_low == Catch::Approx(10.0 - half));
    CHECK(rows[0].ci_high == Catch::Approx(10.0 + half));

    // single observation: unbounded interval
    CHECK(rows[1].n == 1);
    CHECK(std::isinf(rows[1].ci_low));
    CHECK(std::isinf(rows[1].ci_high));
}

TEST_CASE("single visited location appears alone", "[particles]") {
    ParticleSystem system(kGrid);
    system.record({7}, 2.5);
    CHECK(system.top_designs(100).size() == 1);
}

TEST_CASE("best active breaks ties toward the smaller location", "[particles]") {
    ParticleSystem system(kGrid);
    system.record({6}, 3.0);
    system.record({2}, 3.0);
    system.record({4}, 1.0);
    system.refresh_weights(1.0);
    CHECK(system.best_active().location == (DesignLocation{2}));
}

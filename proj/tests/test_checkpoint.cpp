#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "bode/io/checkpoint.hpp"
#include "bode/rng.hpp"

using namespace bode;

namespace {
const TimeGrid kGrid{0.01, 10.0, 0.01, 1};
}

TEST_CASE("empty system round-trips", "[checkpoint]") {
    ParticleSystem system(kGrid);
    const auto loaded = load_checkpoint(save_checkpoint(system));
    CHECK(loaded.grid() == kGrid);
    CHECK(loaded.visited() == 0);
    CHECK(loaded.step_index == 0);
}

TEST_CASE("populated system round-trips bit-exactly", "[checkpoint]") {
    ParticleSystem system(kGrid);
    auto rng = make_engine(1, 1);
    std::uniform_int_distribution<std::int32_t> loc(0, 999);
    std::normal_distribution<double> value(100.0, 17.0);
    for (int i = 0; i < 5000; ++i) system.record({loc(rng)}, value(rng));
    system.refresh_weights(0.25);
    system.step_index = 3;
    system.iter_in_step = 1234;

    const auto loaded = load_checkpoint(save_checkpoint(system));
    CHECK(loaded.grid() == system.grid());
    CHECK(loaded.step_index == 3);
    CHECK(loaded.iter_in_step == 1234);
    CHECK(loaded.evaluations == system.evaluations);
    REQUIRE(loaded.visited() == system.visited());
    for (std::size_t i = 0; i < system.entries().size(); ++i) {
        const auto& a = system.entries()[i];
        const auto& b = loaded.entries()[i];
        CHECK(a.location == b.location);
        CHECK(a.stats.n == b.stats.n);
        CHECK(a.stats.mean == b.stats.mean);  // exact, shortest-round-trip doubles
        CHECK(a.stats.m2 == b.stats.m2);
        CHECK(a.weight == b.weight);
    }
}

TEST_CASE("malformed checkpoints are rejected with a position", "[checkpoint]") {
    ParticleSystem system(kGrid);
    system.record({5}, 1.0);
    auto text = save_checkpoint(system);
    text[text.size() / 2] = '?';
    bool threw = false;
    try {
        load_checkpoint(text);
    } catch (const nlohmann::json::exception& e) {
        threw = true;
        CHECK(std::string(e.what()).find("parse error") != std::string::npos);
    } catch (const std::runtime_error&) {
        threw = true;  // corruption can also surface as a structure error
    }
    CHECK(threw);

    CHECK_THROWS_AS(load_checkpoint("{\"format\":\"something-else\"}"), std::runtime_error);
}

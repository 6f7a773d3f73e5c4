#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>

#include "bode/rng.hpp"
#include "bode/samplers.hpp"

using namespace bode;

TEST_CASE("categorical sampling follows the weights", "[samplers]") {
    auto rng = make_engine(1, 2);

    SECTION("single positive weight always wins") {
        std::map<int, double> w{{3, 0.0}, {7, 2.5}};
        for (int i = 0; i < 100; ++i) CHECK(sample_categorical(w, rng) == 7);
    }
    SECTION("equal weights split evenly") {
        std::map<int, double> w{{0, 1.0}, {1, 1.0}};
        int a = 0;
        for (int i = 0; i < 100000; ++i)
            if (sample_categorical(w, rng) == 0) ++a;
        CHECK(std::abs(a / 100000.0 - 0.5) < 0.01);
    }
    SECTION("3:1 weights give 0.75") {
        std::map<int, double> w{{0, 3.0}, {1, 1.0}};
        int a = 0;
        for (int i = 0; i < 100000; ++i)
            if (sample_categorical(w, rng) == 0) ++a;
        CHECK(std::abs(a / 100000.0 - 0.75) < 0.01);
    }
    SECTION("degenerate weights are rejected") {
        std::map<int, double> zero{{0, 0.0}};
        CHECK_THROWS_AS(sample_categorical(zero, rng), std::domain_error);
        std::map<int, double> neg{{0, 1.0}, {1, -0.5}};
        CHECK_THROWS_AS(sample_categorical(neg, rng), std::domain_error);
    }
}

TEST_CASE("perturbation kernel", "[samplers]") {
    auto rng = make_engine(3, 4);

    SECTION("lambda zero is the identity") {
        const DesignLocation loc{5, 9};
        CHECK(perturb(loc, {0.0, 100, 2}, rng) == loc);
    }
    SECTION("displacement variance is 2 lambda") {
        const PerturbKernel kernel{4.0, 100001, 1};
        const DesignLocation start{50000};  // interior, clamping never binds
        double sum = 0.0, sumsq = 0.0;
        const int reps = 100000;
        for (int i = 0; i < reps; ++i) {
            const double d = perturb(start, kernel, rng)[0] - 50000;
            sum += d;
            sumsq += d * d;
        }
        const double mean = sum / reps;
        const double var = sumsq / reps - mean * mean;
        CHECK(std::abs(var - 8.0) < 0.3);
    }
    SECTION("displacement is symmetric about zero") {
        double sum = 0.0;
        const int reps = 1000000;
        for (int i = 0; i < reps; ++i) sum += skellam_displacement(4.0, rng);
        CHECK(std::abs(sum / reps) < 0.02);
    }
    SECTION("clamping keeps indices in range") {
        const PerturbKernel kernel{4.0, 10, 1};
        for (int i = 0; i < 10000; ++i) {
            const auto moved = perturb({0}, kernel, rng);
            CHECK(moved[0] >= 0);
            CHECK(moved[0] <= 9);
        }
    }
    SECTION("result is canonical") {
        const PerturbKernel kernel{4.0, 50, 3};
        for (int i = 0; i < 1000; ++i) {
            const auto moved = perturb({10, 20, 30}, kernel, rng);
            CHECK(std::is_sorted(moved.begin(), moved.end()));
        }
    }
}

TEST_CASE("multinomial resampling", "[samplers]") {
    auto rng = make_engine(5, 6);

    SECTION("counts match expectations for equal weights") {
        const std::vector<double> w(10, 1.0);
        const int n = 100000;
        const auto picks = multinomial_resample(w, n, rng);
        std::vector<int> counts(10, 0);
        for (auto p : picks) ++counts[p];
        const double expect = n / 10.0;
        const double sigma = std::sqrt(n * 0.1 * 0.9);
        for (int c : counts) CHECK(std::abs(c - expect) < 3.0 * sigma);
    }
    SECTION("single positive weight takes everything") {
        const std::vector<double> w{0.0, 5.0, 0.0};
        for (auto p : multinomial_resample(w, 1000, rng)) CHECK(p == 1);
    }
    SECTION("zero draws give an empty result") {
        CHECK(multinomial_resample({1.0, 2.0}, 0, rng).empty());
    }
    SECTION("degenerate weights are rejected") {
        CHECK_THROWS_AS(multinomial_resample({0.0, 0.0}, 5, rng), std::domain_error);
        CHECK_THROWS_AS(multinomial_resample({1.0, -1.0}, 5, rng), std::domain_error);
    }
}

TEST_CASE("identical seed and stream reproduce draws", "[samplers]") {
    auto a = make_engine(42, 7);
    auto b = make_engine(42, 7);
    for (int i = 0; i < 100; ++i) CHECK(a() == b());
    auto c = make_engine(42, 8);
    bool all_equal = true;
    auto a2 = make_engine(42, 7);
    for (int i = 0; i < 100; ++i) all_equal = all_equal && (a2() == c());
    CHECK_FALSE(all_equal);
}

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bode/particle_system.hpp"

namespace bode {

// Snapshot taken after the initialization and after each step.
struct StepSummary {
    int step = 0;  // 0 = initialization
    double alpha = 1.0;
    double lambda = 0.0;
    std::int64_t evaluations = 0;  // cumulative
    TopDesignRow best;
};

struct RunResult {
    DesignLocation best_location;
    std::vector<double> best_design;
    double best_mean = 0.0;
    double best_ci_low = 0.0;
    double best_ci_high = 0.0;
    std::int64_t best_n = 0;

    std::vector<TopDesignRow> top;
    std::vector<StepSummary> steps;
    std::int64_t evaluations = 0;
    std::int64_t failures = 0;
    bool complete = true;  // false when stopped early at an evaluation cap

    // Metropolis diagnostics (Muller / Amzal moves).
    std::int64_t accepted = 0;
    std::int64_t proposed = 0;
    std::int64_t off_grid = 0;

    std::vector<std::string> warnings;

    ParticleSystem system;

    void fill_best_from(const TopDesignRow& row) {
        best_location = row.location;
        best_design = row.design;
        best_mean = row.mean;
        best_ci_low = row.ci_low;
        best_ci_high = row.ci_high;
        best_n = row.n;
    }
};

}  // namespace bode

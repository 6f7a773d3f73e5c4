#pragma once

#include <stdexcept>
#include <string>

#include "bode/particle_system.hpp"
#include "bode/result.hpp"
#include "json.hpp"

namespace bode {

// Checkpoint document: grid and schedule position in the header, one record
// per visited location (indices, count, running mean, squared-deviation sum,
// active weight) in first-visit order, plus the per-step snapshot table so a
// resumed run reports the same history as an uninterrupted one.

inline nlohmann::json grid_to_json(const TimeGrid& grid) {
    return {{"t_min", grid.t_min}, {"t_max", grid.t_max}, {"step", grid.step}, {"k", grid.k}};
}

inline TimeGrid grid_from_json(const nlohmann::json& j) {
    TimeGrid grid{j.at("t_min").get<double>(), j.at("t_max").get<double>(),
                  j.at("step").get<double>(), j.at("k").get<int>()};
    grid.validate();
    return grid;
}

inline nlohmann::json step_summary_to_json(const StepSummary& s) {
    return {{"step", s.step},
            {"alpha", s.alpha},
            {"lambda", s.lambda},
            {"evaluations", s.evaluations},
            {"best_location", s.best.location},
            {"best_mean", s.best.mean},
            {"ci_low", s.best.ci_low},
            {"ci_high", s.best.ci_high},
            {"n", s.best.n}};
}

inline nlohmann::json system_to_json(const ParticleSystem& system) {
    nlohmann::json records = nlohmann::json::array();
    for (const auto& e : system.entries()) {
        records.push_back({{"loc", e.location},
                           {"n", e.stats.n},
                           {"mean", e.stats.mean},
                           {"m2", e.stats.m2},
                           {"w", e.weight}});
    }
    return {{"grid", grid_to_json(system.grid())},
            {"step_index", system.step_index},
            {"iter_in_step", system.iter_in_step},
            {"evaluations", system.evaluations},
            {"records", std::move(records)}};
}

inline ParticleSystem system_from_json(const nlohmann::json& j) {
    ParticleSystem system(grid_from_json(j.at("grid")));
    system.step_index = j.at("step_index").get<int>();
    system.iter_in_step = j.at("iter_in_step").get<std::int64_t>();
    system.evaluations = j.at("evaluations").get<std::int64_t>();
    for (const auto& r : j.at("records")) {
        system.restore_entry(r.at("loc").get<DesignLocation>(), r.at("n").get<std::int64_t>(),
                             r.at("mean").get<double>(), r.at("m2").get<double>(),
                             r.at("w").get<double>());
    }
    return system;
}

inline std::string save_checkpoint(const ParticleSystem& system) {
    nlohmann::json j{{"format", "bode-checkpoint"},
                     {"version", 1},
                     {"state", system_to_json(system)}};
    return j.dump();
}

// Parse errors from nlohmann carry the byte position; invalid structure is
// reported with the offending key.
inline ParticleSystem load_checkpoint(const std::string& text) {
    const auto j = nlohmann::json::parse(text);  // throws parse_error with position
    if (j.value("format", "") != "bode-checkpoint")
        throw std::runtime_error("checkpoint: missing or wrong format marker");
    if (j.value("version", 0) != 1) throw std::runtime_error("checkpoint: unsupported version");
    return system_from_json(j.at("state"));
}

}  // namespace bode

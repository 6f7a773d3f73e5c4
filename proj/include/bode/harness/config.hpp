#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bode/grid.hpp"
#include "bode/io/checkpoint.hpp"
#include "json.hpp"

namespace bode {

// Configuration problems exit with code 1; runtime/numeric problems with 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    try {
        return nlohmann::json::parse(buf.str());
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

// Fully resolved experiment description. `raw` is the resolved echo written
// into every output document; re-running from that echo reproduces the run.
struct ExperimentConfig {
    nlohmann::json raw;

    std::string model_name;
    nlohmann::json model;
    TimeGrid grid;

    std::vector<nlohmann::json> algorithms;  // one for run, several for compare
    std::int64_t budget = 0;
    int repetitions = 1;
    std::uint64_t seed = 0;
    int workers = 1;
    std::int64_t batch = 0;  // 0 -> worker count
    std::size_t top_table = 100;
    std::optional<std::vector<double>> reference_optimum;
    bool exponentiate_log_utility = false;

    std::int64_t effective_batch() const { return batch > 0 ? batch : workers; }
};

namespace detail {

inline TimeGrid default_grid(const std::string& model) {
    if (model == "death") return {0.01, 10.0, 0.01, 1};
    if (model == "oscillatory") return {0.0, 1.0, 0.002, 2};
    if (model == "toy") return {0.0, 15.0, 0.01, 15};
    if (model == "aphid") return {1.0, 49.0, 1.0, 1};
    throw ConfigError("unknown model '" + model + "'");
}

inline int default_steps(const std::string& model) {
    if (model == "death") return 4;
    if (model == "oscillatory") return 9;
    if (model == "toy") return 14;
    return 8;  // aphid
}

inline double default_lambda(const std::string& model) { return model == "toy" ? 1.0 : 4.0; }

template <typename T>
T require(const nlohmann::json& j, const std::string& key) {
    if (!j.contains(key)) throw ConfigError("missing config key '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError("config key '" + key + "' has the wrong type");
    }
}

template <typename T>
T value_or(const nlohmann::json& j, const std::string& key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError("config key '" + key + "' has the wrong type");
    }
}

}  // namespace detail

inline ExperimentConfig parse_config(nlohmann::json j) {
    // accept a run summary as a config (it embeds the resolved config)
    if (j.contains("config") && j.contains("result")) j = j.at("config");

    ExperimentConfig cfg;
    if (!j.contains("model")) throw ConfigError("missing config key 'model'");
    cfg.model = j.at("model");
    cfg.model_name = detail::require<std::string>(cfg.model, "name");

    if (j.contains("grid")) {
        try {
            cfg.grid = grid_from_json(j.at("grid"));
        } catch (const std::exception& e) {
            throw ConfigError(std::string("config key 'grid': ") + e.what());
        }
    } else {
        cfg.grid = detail::default_grid(cfg.model_name);
        j["grid"] = grid_to_json(cfg.grid);
    }

    if (j.contains("algorithm") == j.contains("algorithms"))
        throw ConfigError("need exactly one of 'algorithm' or 'algorithms'");
    if (j.contains("algorithm")) {
        cfg.algorithms.push_back(j.at("algorithm"));
    } else {
        for (const auto& a : j.at("algorithms")) cfg.algorithms.push_back(a);
        if (cfg.algorithms.size() < 2)
            throw ConfigError("'algorithms' must list at least two entries");
    }
    for (const auto& a : cfg.algorithms) {
        const auto name = detail::require<std::string>(a, "name");
        if (name != "new" && name != "muller" && name != "amzal")
            throw ConfigError("unknown algorithm '" + name + "'");
    }

    cfg.budget = detail::require<std::int64_t>(j, "budget");
    if (cfg.budget < 1) throw ConfigError("config key 'budget' must be positive");
    cfg.repetitions = detail::value_or<int>(j, "repetitions", 1);
    if (cfg.repetitions < 1) throw ConfigError("config key 'repetitions' must be >= 1");
    cfg.seed = detail::value_or<std::uint64_t>(j, "seed", 0);
    cfg.workers = detail::value_or<int>(j, "workers", 1);
    if (cfg.workers < 1) throw ConfigError("config key 'workers' must be >= 1");
    cfg.batch = detail::value_or<std::int64_t>(j, "batch", 0);
    if (cfg.batch < 0) throw ConfigError("config key 'batch' must be >= 0");
    cfg.top_table = detail::value_or<std::size_t>(j, "top_table", 100);
    if (j.contains("reference_optimum"))
        cfg.reference_optimum = detail::require<std::vector<double>>(j, "reference_optimum");

    const auto log_mode = detail::value_or<std::string>(j, "log_utility", "");
    if (!log_mode.empty() && log_mode != "exponentiate")
        throw ConfigError("config key 'log_utility' only supports \"exponentiate\"");
    cfg.exponentiate_log_utility = log_mode == "exponentiate";

    const bool log_model = cfg.model_name == "oscillatory";
    for (const auto& a : cfg.algorithms) {
        const auto name = a.at("name").get<std::string>();
        if ((name == "muller" || name == "amzal") && log_model && !cfg.exponentiate_log_utility)
            throw ConfigError(
                "algorithm '" + name + "' targets a product of utilities, but model '" +
                cfg.model_name + "' reports log-scale utilities; set \"log_utility\": "
                "\"exponentiate\" to run it on the exponentiated scale");
    }

    cfg.raw = std::move(j);
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
    return parse_config(read_json_file(path));
}

}  // namespace bode

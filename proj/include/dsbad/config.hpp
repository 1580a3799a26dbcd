#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "dsbad/pipeline.hpp"

namespace dsbad {

/// Effective engine settings. Precedence: command-line flags > config file > defaults.
/// Defaults: alpha 0.1, warm-up 720, gamma 8, B 32.
struct EngineConfig {
    RoundConfig round;
    std::uint64_t seed = 0;
    std::size_t jobs = 1;

    EngineConfig();

    /// Applies one dotted key (gate.alpha, gate.warmup, gate.rewarm, round.gamma,
    /// round.budget, round.rounds, filter.strategy, filter.density_metric,
    /// filter.area_epsilon, seed, jobs). Throws Error on unknown keys or bad values.
    void set(const std::string& key, const std::string& value);

    /// Flat, key-sorted view used by --print-config.
    nlohmann::json to_json() const;
};

/// Reads key/value pairs from either a JSON object (nested objects flatten to dotted
/// keys) or a TOML-style file of `key = value` lines with optional [section] headers.
std::map<std::string, std::string> read_config_file(const std::filesystem::path& path);

void apply_config_file(EngineConfig& cfg, const std::filesystem::path& path);

}  // namespace dsbad

#pragma once

// JSON run configurations and task execution for the command-line front end.
// Configs are schema-validated (unknown keys rejected); every run writes its
// artifacts plus a manifest recording the config hash, code version and wall
// time. CSV floats use 12 significant digits so identical configs produce
// byte-identical artifacts.

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace mirrorqed {

inline constexpr const char* CODE_VERSION = "mirrorqed 0.1.0";

struct CliOverrides {
    std::string out;      // output directory ("" = config/env/default)
    int threads = 0;      // 0 = config/default
    double dt = 0.0;      // 0 = config/default
    std::uint64_t seed = 0;
    bool seed_set = false;
};

// Validates and executes; returns the list of artifact paths written.
// Throws ConfigError / RegimeError / IoError (exit codes 2 / 3 / 4).
std::vector<std::string> run_task(const std::string& task, const nlohmann::json& config,
                                  const CliOverrides& overrides = {});

// FNV-1a 64-bit over the canonical (sorted-key) JSON dump.
std::string config_hash(const nlohmann::json& config);

// Rejects keys outside `allowed`, naming the offender.
void expect_keys(const nlohmann::json& obj, const std::vector<std::string>& allowed,
                 const std::string& context);

std::vector<std::string> known_tasks();

} // namespace mirrorqed

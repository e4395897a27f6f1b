#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "mfgce/config.hpp"

namespace mfgce {

struct CommandOptions {
    std::filesystem::path config;
    std::optional<std::filesystem::path> out;
    std::optional<std::uint64_t> seed;
};

/// Loads the config and applies command-line overrides.
RunConfig resolve_config(const CommandOptions& opts);

/// Each command returns the process exit code; pipeline failures throw.
int cmd_validate(const RunConfig& cfg, std::ostream& log);
int cmd_solve(const RunConfig& cfg, std::ostream& log);
int cmd_iterate(const RunConfig& cfg, std::ostream& log);
int cmd_game(const RunConfig& cfg, std::ostream& log);
int cmd_study(const RunConfig& cfg, std::ostream& log);

int run_command(const std::string& name, const CommandOptions& opts, std::ostream& log);

}  // namespace mfgce

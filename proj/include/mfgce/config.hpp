#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mfgce/grid.hpp"
#include "mfgce/mfg.hpp"
#include "mfgce/model.hpp"

namespace mfgce {

struct GameSection {
    std::size_t N = 64;
    std::vector<std::size_t> Ns{16, 32, 64, 128, 256, 512};
    std::size_t replications = 32;
    std::size_t bootstrap = 1000;
};

struct RunConfig {
    std::string preset;
    PresetParams params;  // includes r, c0, T
    XDomain domain;
    InitialLaw initial_law;
    std::optional<double> decouple_at;  // freeze the drift at this m

    GridSize grid;
    StoppingOptions stopping;
    double tol_active = -1.0;
    SimConfig sim;
    MfgOptions mfg;
    double solve_m = 1.0;  // frozen flow for `solve`
    GameSection game;
    std::string output_dir = "out";
    std::uint64_t seed = 1;

    std::string source;  // raw config bytes (hashed into output metadata)

    ModelSpec build_model() const;
    Grid build_grid(const ModelSpec& model) const;
};

/// Parses YAML; unknown keys and type errors raise ConfigError with the
/// 1-based line/column of the offending node.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

}  // namespace mfgce

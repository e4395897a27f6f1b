#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mfgce/model.hpp"

namespace mfgce {

struct SimConfig {
    std::size_t n_paths = 10000;
    std::uint64_t seed = 1;
    int substeps = 1;  // Euler sub-steps per time-grid interval
    bool antithetic = false;
};

/// Fixed start used instead of draws from the initial law.
struct StartPoint {
    double x = 0.0;
    double y = 0.0;
};

/// X-paths on the time grid (natural coordinate), row-major per path.
struct Ensemble {
    std::vector<double> time_grid;
    std::size_t n_paths = 0;
    std::vector<double> x;
    std::vector<double> x0, y0;

    std::span<const double> path(std::size_t p) const {
        return {x.data() + p * time_grid.size(), time_grid.size()};
    }
};

/// One Euler step of the computational coordinate.
double euler_step(const ModelSpec& model, double s, double m, double dt, double z);

/// Initial draw of path `label` from the model's initial law.
std::pair<double, double> draw_initial(const ModelSpec& model, std::uint64_t seed,
                                       std::uint64_t label, bool antithetic, int stream_kind = 0);

/// Euler-Maruyama under m_flow; m is read right-continuously at sub-step
/// left endpoints. Path p draws from the stream keyed by (seed, p), so the
/// ensemble does not depend on thread count.
Ensemble simulate_x(const ModelSpec& model, const MeanFlow& m_flow, const SimConfig& cfg,
                    std::span<const double> time_grid, std::optional<StartPoint> start = {});

struct ComparisonReport {
    bool passed = true;
    double worst = 0.0;  // max over nodes of x_lo - x_hi
    std::size_t path = 0;
    std::size_t step = 0;
    bool identical = true;
};

/// Coupled simulation under two ordered flows with identical noise.
ComparisonReport comparison_check(const ModelSpec& model, const MeanFlow& m_lo,
                                  const MeanFlow& m_hi, const SimConfig& cfg,
                                  std::span<const double> time_grid, double tol_cmp = 1e-9);

}  // namespace mfgce

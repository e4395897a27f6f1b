#pragma once

#include <span>
#include <vector>

#include "mfgce/model.hpp"
#include "mfgce/stopping.hpp"

namespace mfgce {

struct ControlledPath {
    std::vector<double> time_grid;
    std::vector<double> x_path;
    std::vector<double> xi_path;  // cumulative control, xi_{0-} = 0
    std::vector<double> y_path;
    double y0 = 0.0;
};

/// Running-max reflection: xi_k = max_{j<=k} (c(t_j, x_j) - y0)^+.
ControlledPath reflect(const Boundary& boundary, std::span<const double> time_grid,
                       std::span<const double> x_path, double y0);

/// Same construction from the boundary values c(t_k, x_k) seen by the path.
ControlledPath reflect_values(std::span<const double> boundary_values,
                              std::span<const double> time_grid, std::span<const double> x_path,
                              double y0);

/// Trapezoid of e^{-rt} f(X,Y) minus the discounted cost of every increment
/// (the first one includes the jump at t = 0).
double payoff(const ModelSpec& model, const ControlledPath& path);

struct MinimalityReport {
    bool passed = true;
    double worst_a = 0.0;  // increment while already at/above the boundary
    double worst_b = 0.0;  // distance of post-increment level from boundary
    std::size_t node_a = 0;
    std::size_t node_b = 0;
};

MinimalityReport verify_minimality(const Boundary& boundary, const ControlledPath& path,
                                   double tol_refl = 1e-9);

}  // namespace mfgce

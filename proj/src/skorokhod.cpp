#include "mfgce/skorokhod.hpp"

#include <algorithm>
#include <cmath>

#include "mfgce/error.hpp"

namespace mfgce {

ControlledPath reflect_values(std::span<const double> c, std::span<const double> time_grid,
                              std::span<const double> x_path, double y0) {
    if (time_grid.size() != x_path.size() || c.size() != x_path.size() || x_path.empty())
        throw InvalidArgument("skorokhod", "path, boundary values and time grid differ in length");
    if (!(y0 >= 0.0 && y0 <= 1.0)) throw InvalidArgument("skorokhod", "y0 must lie in [0,1]");
    ControlledPath p;
    p.time_grid.assign(time_grid.begin(), time_grid.end());
    p.x_path.assign(x_path.begin(), x_path.end());
    p.y0 = y0;
    p.xi_path.resize(x_path.size());
    p.y_path.resize(x_path.size());
    double xi = 0.0;
    for (std::size_t k = 0; k < x_path.size(); ++k) {
        xi = std::max(xi, c[k] - y0);
        p.xi_path[k] = xi;
        p.y_path[k] = std::min(1.0, y0 + xi);
    }
    return p;
}

ControlledPath reflect(const Boundary& boundary, std::span<const double> time_grid,
                       std::span<const double> x_path, double y0) {
    std::vector<double> c(x_path.size());
    for (std::size_t k = 0; k < c.size() && k < time_grid.size(); ++k)
        c[k] = boundary.value(time_grid[k], x_path[k]);
    return reflect_values(c, time_grid, x_path, y0);
}

double payoff(const ModelSpec& model, const ControlledPath& path) {
    const auto& t = path.time_grid;
    const double r = model.discount_r;
    double running = 0.0;
    // Y is held at its post-jump level on [t_{k-1}, t_k), so the right end of
    // each trapezoid uses the left limit Y_{t_k-} = Y_{k-1}.
    for (std::size_t k = 1; k < t.size(); ++k) {
        const double y = path.y_path[k - 1];
        const double a = std::exp(-r * t[k - 1]) * model.profit(path.x_path[k - 1], y);
        const double b = std::exp(-r * t[k]) * model.profit(path.x_path[k], y);
        running += 0.5 * (t[k] - t[k - 1]) * (a + b);
    }
    // Discounting is relative to the start of the path.
    running *= std::exp(r * t[0]);
    double cost = 0.0;
    double last = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k) {
        const double d = path.xi_path[k] - last;
        if (d != 0.0) cost += std::exp(-r * (t[k] - t[0])) * d;
        last = path.xi_path[k];
    }
    return running - model.cost_c0 * cost;
}

MinimalityReport verify_minimality(const Boundary& boundary, const ControlledPath& path,
                                   double tol_refl) {
    MinimalityReport rep;
    double prev_y = path.y0;
    double prev_xi = 0.0;
    for (std::size_t k = 0; k < path.x_path.size(); ++k) {
        const double d = path.xi_path[k] - prev_xi;
        if (d > 0.0) {
            const double c = boundary.value(path.time_grid[k], path.x_path[k]);
            const double va = prev_y - c;  // must be < tol_refl
            const double vb = std::abs(path.y_path[k] - c);
            if (va > rep.worst_a) {
                rep.worst_a = va;
                rep.node_a = k;
            }
            if (vb > rep.worst_b) {
                rep.worst_b = vb;
                rep.node_b = k;
            }
            if (!(va < tol_refl) || vb > tol_refl) rep.passed = false;
        }
        prev_y = path.y_path[k];
        prev_xi = path.xi_path[k];
    }
    return rep;
}

}  // namespace mfgce

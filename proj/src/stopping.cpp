#include "mfgce/stopping.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mfgce/error.hpp"
#include "mfgce/parallel.hpp"

namespace mfgce {

// -------------------------------------------------------------- containers

ValueSurface::ValueSurface(Grid grid, double c0, std::vector<double> values)
    : grid_(std::move(grid)), c0_(c0), u_(std::move(values)) {
    if (u_.size() != grid_.n_t() * grid_.n_x() * grid_.n_y())
        throw InvalidArgument("stopping", "value surface size does not match its grid");
}

double ValueSurface::interpolate(std::size_t n, double x, double y) const {
    std::size_t i, j;
    double wx, wy;
    grid_.locate_s(grid_.to_s(x), i, wx);
    const double pos = std::clamp(y, 0.0, 1.0) / grid_.dy();
    j = std::min<std::size_t>(static_cast<std::size_t>(pos), grid_.n_y() - 2);
    wy = std::clamp(pos - double(j), 0.0, 1.0);
    const double a = (1 - wy) * at(n, i, j) + wy * at(n, i, j + 1);
    const double b = (1 - wy) * at(n, i + 1, j) + wy * at(n, i + 1, j + 1);
    return (1 - wx) * a + wx * b;
}

Boundary::Boundary(Grid grid, std::vector<double> values)
    : grid_(std::move(grid)), c_(std::move(values)) {
    if (c_.size() != grid_.n_t() * grid_.n_x())
        throw InvalidArgument("stopping", "boundary size does not match its grid");
    for (double v : c_)
        if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument("stopping", "boundary value outside [0,1]");
}

double Boundary::value_state(double t, double s) const {
    std::size_t n, i;
    double wt, wx;
    grid_.locate_t(t, n, wt);
    grid_.locate_s(s, i, wx);
    const double a = (1 - wx) * at(n, i) + wx * at(n, i + 1);
    const double b = (1 - wx) * at(n + 1, i) + wx * at(n + 1, i + 1);
    return (1 - wt) * a + wt * b;
}

double Boundary::value(double t, double x) const { return value_state(t, grid_.to_s(x)); }

// ------------------------------------------------------------------ solver

namespace {

struct StepCoefficients {
    std::vector<double> lower, upper, diag;
};

// Implicit step operator (1/dt + r) I - L with L the upwinded generator in
// the grid coordinate. Edge nodes carry no diffusion; their drift is kept
// only when it points into the domain.
StepCoefficients step_coefficients(const ModelSpec& model, const Grid& grid, double m) {
    const std::size_t nx = grid.n_x();
    const double ds = grid.ds(), dt = grid.dt(), r = model.discount_r;
    StepCoefficients c{std::vector<double>(nx), std::vector<double>(nx), std::vector<double>(nx)};
    for (std::size_t i = 0; i < nx; ++i) {
        const double s = grid.s()[i];
        const double a = model.state_drift(s, m);
        const double b = model.state_vol(s);
        if (!std::isfinite(a) || !std::isfinite(b)) {
            std::ostringstream os;
            os << "non-finite PDE coefficient at x = " << grid.x()[i]
               << " (truncation domain too wide?)";
            throw SolverError(os.str());
        }
        double lo = 0.0, up = 0.0;
        if (i == 0) {
            up = std::max(a, 0.0) / ds;
        } else if (i + 1 == nx) {
            lo = std::max(-a, 0.0) / ds;
        } else {
            const double d = 0.5 * b * b / (ds * ds);
            lo = d + std::max(-a, 0.0) / ds;
            up = d + std::max(a, 0.0) / ds;
        }
        c.lower[i] = lo;
        c.upper[i] = up;
        c.diag[i] = 1.0 / dt + r + lo + up;
    }
    return c;
}

struct SliceResult {
    int sweeps = 0;
    double residual = 0.0;
    bool converged = true;
};

// One backward step on one y-slice by projected SOR. `u` holds u^{n+1} on
// entry and u^n on exit; pinned nodes stay at the obstacle.
SliceResult psor_step(const StepCoefficients& k, const double* source,
                      const std::vector<std::uint8_t>& pinned, double c0, double dt,
                      const StoppingOptions& opts, double* u, std::size_t nx) {
    std::vector<double> rhs(nx);
    for (std::size_t i = 0; i < nx; ++i) rhs[i] = pinned[i] ? 0.0 : u[i] / dt + source[i];
    SliceResult res;
    for (int sweep = 1; sweep <= opts.max_iter; ++sweep) {
        double err = 0.0;
        for (std::size_t i = 0; i < nx; ++i) {
            if (pinned[i]) continue;
            double acc = rhs[i];
            if (i > 0) acc += k.lower[i] * u[i - 1];
            if (i + 1 < nx) acc += k.upper[i] * u[i + 1];
            const double gs = acc / k.diag[i];
            const double next = std::min(c0, u[i] + opts.omega * (gs - u[i]));
            err = std::max(err, std::abs(next - u[i]));
            u[i] = next;
        }
        res.sweeps = sweep;
        res.residual = err;
        if (err <= opts.psor_tol) return res;
    }
    res.converged = false;
    return res;
}

}  // namespace

ValueSurface solve_stopping(const ModelSpec& model, const MeanFlow& m_flow, const Grid& grid,
                            const StoppingOptions& opts) {
    const std::size_t nt = grid.n_t(), nx = grid.n_x(), ny = grid.n_y();
    const double c0 = model.cost_c0;
    if (m_flow.size() == 0) throw InvalidArgument("stopping", "empty mean flow");
    if (m_flow.time_grid().back() < grid.t().back() - 1e-12 * std::max(1.0, grid.t().back()))
        throw InvalidArgument("stopping", "mean flow does not cover [0,T]");

    // Source term per (x, y); infinite marginal profit pins the node at c0.
    bool singular_y0 = false;
    for (std::size_t i = 0; i < nx; ++i)
        singular_y0 = singular_y0 || std::isinf(model.profit_dy(grid.x()[i], 0.0));
    std::vector<double> source(nx * ny);
    std::vector<std::vector<std::uint8_t>> pinned(ny, std::vector<std::uint8_t>(nx, 0));
    for (std::size_t j = 0; j < ny; ++j) {
        double y = grid.y()[j];
        if (singular_y0 && j > 0) y = std::max(y, opts.y_floor);
        for (std::size_t i = 0; i < nx; ++i) {
            const double g = (singular_y0 && j == 0) ? INFINITY : model.profit_dy(grid.x()[i], y);
            if (std::isnan(g) || g == -INFINITY)
                throw SolverError("marginal profit is not a number at x = " +
                                  std::to_string(grid.x()[i]) + ", y = " + std::to_string(y));
            if (std::isinf(g)) pinned[j][i] = 1;
            source[j * nx + i] = std::isinf(g) ? 0.0 : g;
        }
    }

    std::vector<double> u(nt * nx * ny, c0);
    auto at = [&](std::size_t n, std::size_t i, std::size_t j) -> double& {
        return u[(n * nx + i) * ny + j];
    };

    SolveStats stats;
    stats.nodes = u.size();
    stats.flow_monotone = m_flow.monotone();

    // Slice-major scratch so each y-slice is contiguous for the sweep.
    std::vector<double> work(ny * nx, c0);
    std::vector<SliceResult> results(ny);

    for (std::size_t step = nt - 1; step-- > 0;) {
        const double t = grid.t()[step];
        const StepCoefficients k = step_coefficients(model, grid, m_flow(t));
        parallel_for(ny, [&](std::size_t j) {
            double* col = work.data() + j * nx;
            for (std::size_t i = 0; i < nx; ++i) col[i] = at(step + 1, i, j);
            results[j] = psor_step(k, source.data() + j * nx, pinned[j], c0, grid.dt(), opts, col, nx);
        });
        for (std::size_t j = 0; j < ny; ++j) {
            stats.max_sweeps = std::max(stats.max_sweeps, results[j].sweeps);
            stats.worst_residual = std::max(stats.worst_residual, results[j].residual);
            if (!results[j].converged) {
                std::ostringstream os;
                os << "PSOR did not converge after " << opts.max_iter << " sweeps at t = " << t
                   << ", y = " << grid.y()[j] << " (residual " << results[j].residual << ")";
                throw SolverError(os.str());
            }
        }
        for (std::size_t j = 0; j < ny; ++j)
            for (std::size_t i = 0; i < nx; ++i) at(step, i, j) = std::clamp(work[j * nx + i], 0.0, c0);

        // Isotone clean-up: small violations are clamped, large ones fail.
        auto note = [&](std::size_t& count, double v, const char* what, std::size_t i, std::size_t j) {
            if (!(v > 0.0)) return false;
            ++count;
            stats.worst_violation = std::max(stats.worst_violation, v);
            if (v > opts.tol_mono) {
                std::ostringstream os;
                os << "value surface not monotone in " << what << " by " << v << " at t = " << t
                   << ", x = " << grid.x()[i] << ", y = " << grid.y()[j];
                throw SolverError(os.str());
            }
            return true;
        };
        for (std::size_t i = 0; i < nx; ++i) {
            for (std::size_t j = 0; j < ny; ++j) {
                if (stats.flow_monotone &&
                    note(stats.violations_t, at(step, i, j) - at(step + 1, i, j), "t", i, j))
                    at(step, i, j) = at(step + 1, i, j);
                if (i > 0 && note(stats.violations_x, at(step, i - 1, j) - at(step, i, j), "x", i, j))
                    at(step, i, j) = at(step, i - 1, j);
                if (j > 0 && note(stats.violations_y, at(step, i, j) - at(step, i, j - 1), "y", i, j))
                    at(step, i, j) = at(step, i, j - 1);
            }
        }
    }

    ValueSurface out(grid, c0, std::move(u));
    out.stats = stats;
    return out;
}

// -------------------------------------------------------------- boundaries

Boundary extract_boundary(const ValueSurface& u, double tol_active) {
    const Grid& g = u.grid();
    if (tol_active < 0) tol_active = 1e-6 * u.c0();
    const double level = u.c0() - tol_active;
    std::vector<double> c(g.n_t() * g.n_x(), 1.0);
    for (std::size_t n = 0; n < g.n_t(); ++n) {
        for (std::size_t i = 0; i < g.n_x(); ++i) {
            double v = 1.0;
            for (std::size_t j = 0; j < g.n_y(); ++j) {
                const double uj = u.at(n, i, j);
                if (!(uj < level)) continue;
                if (j == 0) {
                    v = 0.0;
                } else {
                    const double up = u.at(n, i, j - 1);
                    const double frac = (up - level) / (up - uj);
                    v = g.y()[j - 1] + std::clamp(frac, 0.0, 1.0) * g.dy();
                }
                break;
            }
            c[n * g.n_x() + i] = std::clamp(v, 0.0, 1.0);
        }
    }
    return Boundary(g, std::move(c));
}

std::vector<std::uint8_t> continuation_mask(const ValueSurface& u, double tol_active) {
    if (tol_active < 0) tol_active = 1e-6 * u.c0();
    const double level = u.c0() - tol_active;
    std::vector<std::uint8_t> mask(u.values().size());
    for (std::size_t k = 0; k < mask.size(); ++k) mask[k] = u.values()[k] < level ? 1 : 0;
    return mask;
}

LipschitzEstimate estimate_lipschitz_x(const Boundary& c, SlopeCoordinate coord) {
    const Grid& g = c.grid();
    if (g.n_x() < 33)
        throw InvalidArgument("stopping", "Lipschitz estimate needs M_x >= 32");
    std::vector<double> z(g.n_x());
    for (std::size_t i = 0; i < g.n_x(); ++i)
        z[i] = coord == SlopeCoordinate::log ? std::log(g.x()[i]) : g.x()[i];
    LipschitzEstimate est;
    est.per_t.assign(g.n_t(), 0.0);
    for (std::size_t n = 0; n < g.n_t(); ++n) {
        for (std::size_t i = 0; i + 1 < g.n_x(); ++i) {
            const double slope = std::abs(c.at(n, i + 1) - c.at(n, i)) / (z[i + 1] - z[i]);
            est.per_t[n] = std::max(est.per_t[n], slope);
        }
        est.theta = std::max(est.theta, est.per_t[n]);
    }
    return est;
}

}  // namespace mfgce

#include "mfgce/mfg.hpp"

#include <algorithm>
#include <cmath>

#include "mfgce/error.hpp"
#include "mfgce/parallel.hpp"
#include "mfgce/rng.hpp"
#include "mfgce/skorokhod.hpp"

namespace mfgce {

namespace {

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
};

// Fixed-order two-pass mean and standard error.
MeanSe mean_se(const std::vector<double>& v) {
    MeanSe out;
    if (v.empty()) return out;
    double s = 0.0;
    for (double x : v) s += x;
    out.mean = s / double(v.size());
    if (v.size() < 2) return out;
    double ss = 0.0;
    for (double x : v) ss += (x - out.mean) * (x - out.mean);
    out.se = std::sqrt(ss / double(v.size() - 1) / double(v.size()));
    return out;
}

std::size_t node_index(const Grid& grid, double t) {
    std::size_t n;
    double w;
    grid.locate_t(t, n, w);
    if (w > 0.5) ++n;
    if (std::abs(grid.t()[n] - t) > 1e-9 * std::max(1.0, grid.t().back()))
        throw InvalidArgument("mfg", "probe time must be a grid node");
    return n;
}

}  // namespace

FlowEstimate update_mean_flow(const Ensemble& e, const Boundary& boundary) {
    const std::size_t nt = e.time_grid.size(), np = e.n_paths;
    FlowEstimate out;
    out.y.resize(np * nt);
    parallel_for(np, [&](std::size_t p) {
        const ControlledPath cp = reflect(boundary, e.time_grid, e.path(p), e.y0[p]);
        std::copy(cp.y_path.begin(), cp.y_path.end(), out.y.begin() + std::ptrdiff_t(p * nt));
    });
    std::vector<double> m(nt), col(np);
    out.se.resize(nt);
    for (std::size_t k = 0; k < nt; ++k) {
        for (std::size_t p = 0; p < np; ++p) col[p] = out.y[p * nt + k];
        const MeanSe ms = mean_se(col);
        m[k] = ms.mean;
        out.se[k] = ms.se;
    }
    out.mean_y0 = mean_se(e.y0).mean;
    out.flow = MeanFlow(e.time_grid, std::move(m));
    return out;
}

MfgSolution mfg_iterate(const ModelSpec& model, const Grid& grid, const SimConfig& sim,
                        const MfgOptions& opts, const IterationCallback& on_iter) {
    if (!(opts.tol_iter > 0)) throw InvalidArgument("mfg", "tol_iter must be positive");
    if (opts.max_iters < 1) throw InvalidArgument("mfg", "max_iters must be at least 1");
    const std::size_t nt = grid.n_t();

    MfgSolution sol;
    MeanFlow m_prev = MeanFlow::constant(grid.t(), 1.0);
    std::optional<ValueSurface> u_prev;
    std::optional<Boundary> c_prev;
    std::vector<double> y_prev;

    for (int n = 0; n < opts.max_iters; ++n) {
        ValueSurface u = solve_stopping(model, m_prev, grid, opts.stopping);
        Boundary c = extract_boundary(u, opts.tol_active);
        const Ensemble ens = simulate_x(model, m_prev, sim, grid.t());
        FlowEstimate fe = update_mean_flow(ens, c);

        IterationRecord rec;
        rec.n = n;
        rec.sup_gap = fe.flow.sup_distance(m_prev);
        rec.m = fe.flow.values();
        rec.flow_monotone = fe.flow.monotone();
        rec.sandwich_margin = INFINITY;
        for (double v : rec.m) rec.sandwich_margin = std::min(rec.sandwich_margin, v - fe.mean_y0);
        rec.solve = u.stats;
        if (u_prev) {
            double du = -INFINITY;
            for (std::size_t k = 0; k < u.values().size(); ++k)
                du = std::max(du, u.values()[k] - u_prev->values()[k]);
            rec.ladder_u = du;
            double dc = -INFINITY, gap = 0.0;
            for (std::size_t k = 0; k < c.values().size(); ++k) {
                const double d = c.values()[k] - c_prev->values()[k];
                dc = std::max(dc, d);
                gap = std::max(gap, std::abs(d));
            }
            rec.ladder_c = dc;
            rec.boundary_sup_gap = gap;
        }
        // m^[-1] = 1 dominates everything, so the first comparison is exact.
        {
            double excess = -INFINITY;
            std::vector<double> d(ens.n_paths);
            for (std::size_t k = 0; k < nt; ++k) {
                double se = 0.0;
                if (!y_prev.empty()) {
                    for (std::size_t p = 0; p < ens.n_paths; ++p) {
                        d[p] = fe.y[p * nt + k] - y_prev[p * nt + k];
                        rec.max_pathwise_increase = std::max(rec.max_pathwise_increase, d[p]);
                    }
                    se = mean_se(d).se;
                }
                excess = std::max(excess, fe.flow.values()[k] - m_prev.values()[k] - 3.0 * se);
            }
            rec.ladder_m_excess = excess;
        }
        sol.iterates.push_back(rec);
        if (on_iter) on_iter(sol.iterates.back());

        const bool done = rec.sup_gap <= opts.tol_iter;
        if (done || n + 1 == opts.max_iters) {
            sol.converged = done;
            sol.iterations = n + 1;
            sol.boundary = std::move(c);
            sol.u = std::move(u);
            sol.m_response = m_prev;
            sol.m_star = fe.flow;
            sol.m_star_se = fe.se;
            break;
        }
        m_prev = fe.flow;
        u_prev = std::move(u);
        c_prev = std::move(c);
        y_prev = std::move(fe.y);
    }
    return sol;
}

// -------------------------------------------------------- value estimators

namespace {

std::vector<double> tail_grid(const Grid& grid, std::size_t n) {
    return {grid.t().begin() + std::ptrdiff_t(n), grid.t().end()};
}

}  // namespace

Estimate value_by_integration(const ValueSurface& u, const ModelSpec& model,
                              const MeanFlow& m_flow, const SimConfig& sim, double t, double x,
                              double y) {
    const Grid& g = u.grid();
    if (!(y >= 0.0 && y <= 1.0)) throw InvalidArgument("mfg", "y must lie in [0,1]");
    const std::size_t n = node_index(g, t);
    const double r = model.discount_r;

    // int_y^1 u(t, x, z) dz by the trapezoid rule on the y-nodes.
    double integral = 0.0;
    {
        const double pos = y / g.dy();
        std::size_t j = std::min<std::size_t>(std::size_t(pos), g.n_y() - 1);
        double lo = y, ulo = u.interpolate(n, x, y);
        for (std::size_t k = j + 1; k < g.n_y(); ++k) {
            const double hi = g.y()[k];
            if (hi <= lo) continue;
            const double uhi = u.interpolate(n, x, hi);
            integral += 0.5 * (hi - lo) * (ulo + uhi);
            lo = hi;
            ulo = uhi;
        }
    }

    Estimate out;
    if (n + 1 >= g.n_t()) {
        out.value = -integral;
        return out;
    }
    const std::vector<double> tg = tail_grid(g, n);
    const Ensemble e = simulate_x(model, m_flow, sim, tg, StartPoint{x, y});
    std::vector<double> phi(e.n_paths);
    for (std::size_t p = 0; p < e.n_paths; ++p) {
        const auto path = e.path(p);
        double acc = 0.0, prev = model.profit(path[0], 1.0);
        for (std::size_t k = 1; k < tg.size(); ++k) {
            const double cur = std::exp(-r * (tg[k] - tg[0])) * model.profit(path[k], 1.0);
            acc += 0.5 * (tg[k] - tg[k - 1]) * (prev + cur);
            prev = cur;
        }
        phi[p] = acc;
    }
    const MeanSe ms = mean_se(phi);
    out.value = ms.mean - integral;
    out.se = ms.se;
    return out;
}

Estimate value_by_simulation(const ModelSpec& model, const MeanFlow& m_flow,
                             const Boundary& boundary, const SimConfig& sim, double t, double x,
                             double y) {
    const Grid& g = boundary.grid();
    const std::size_t n = node_index(g, t);
    if (n + 1 >= g.n_t()) {
        const double jump = std::max(0.0, boundary.value(t, x) - y);
        return {-model.cost_c0 * jump, 0.0};
    }
    const std::vector<double> tg = tail_grid(g, n);
    const Ensemble e = simulate_x(model, m_flow, sim, tg, StartPoint{x, y});
    std::vector<double> pay(e.n_paths);
    parallel_for(e.n_paths, [&](std::size_t p) {
        pay[p] = payoff(model, reflect(boundary, tg, e.path(p), y));
    });
    const MeanSe ms = mean_se(pay);
    return {ms.mean, ms.se};
}

Estimate value_at_initial_law(const ModelSpec& model, const MeanFlow& m_flow,
                              const Boundary& boundary, const SimConfig& sim) {
    const auto& tg = boundary.grid().t();
    const Ensemble e = simulate_x(model, m_flow, sim, tg);
    std::vector<double> pay(e.n_paths);
    parallel_for(e.n_paths, [&](std::size_t p) {
        pay[p] = payoff(model, reflect(boundary, tg, e.path(p), e.y0[p]));
    });
    const MeanSe ms = mean_se(pay);
    return {ms.mean, ms.se};
}

ConsistencyReport consistency_residual(const MfgSolution& solution, const ModelSpec& model,
                                       const SimConfig& sim, std::uint64_t fresh_seed) {
    SimConfig cfg = sim;
    cfg.seed = fresh_seed;
    const auto& tg = solution.boundary.grid().t();
    const Ensemble e = simulate_x(model, solution.m_star, cfg, tg);
    const FlowEstimate fe = update_mean_flow(e, solution.boundary);
    ConsistencyReport rep;
    rep.residual = fe.flow.sup_distance(solution.m_star);
    for (std::size_t k = 0; k < tg.size(); ++k) {
        const double s_star = k < solution.m_star_se.size() ? solution.m_star_se[k] : 0.0;
        rep.se = std::max(rep.se, std::sqrt(fe.se[k] * fe.se[k] + s_star * s_star));
    }
    rep.recomputed = fe.flow;
    return rep;
}

}  // namespace mfgce

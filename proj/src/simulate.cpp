#include "mfgce/simulate.hpp"

#include <cmath>

#include "mfgce/error.hpp"
#include "mfgce/parallel.hpp"
#include "mfgce/rng.hpp"

namespace mfgce {

double euler_step(const ModelSpec& model, double s, double m, double dt, double z) {
    return s + model.state_drift(s, m) * dt + model.state_vol(s) * std::sqrt(dt) * z;
}

std::pair<double, double> draw_initial(const ModelSpec& model, std::uint64_t seed,
                                       std::uint64_t label, bool antithetic, int stream_kind) {
    const bool mirror = antithetic && (label & 1u);
    const Stream id = stream_kind == 0 ? Stream::initial_state : Stream::game_initial;
    const KeyedStream rng(seed, id, antithetic ? (label & ~std::uint64_t(1)) : label);
    const auto u = rng.uniforms(0);
    InitialVariates v{u[0], u[1], rng.normal(1)};
    if (mirror) v = {1.0 - v.u_select, 1.0 - v.u_y, -v.z_x};
    return model.initial_law.sample(v);
}

Ensemble simulate_x(const ModelSpec& model, const MeanFlow& m_flow, const SimConfig& cfg,
                    std::span<const double> time_grid, std::optional<StartPoint> start) {
    if (cfg.n_paths == 0) throw InvalidArgument("simulate", "n_paths must be positive");
    if (cfg.substeps < 1) throw InvalidArgument("simulate", "substeps must be positive");
    if (time_grid.size() < 2) throw InvalidArgument("simulate", "time grid needs two nodes");
    Ensemble e;
    e.time_grid.assign(time_grid.begin(), time_grid.end());
    e.n_paths = cfg.n_paths;
    const std::size_t nt = time_grid.size();
    e.x.resize(cfg.n_paths * nt);
    e.x0.resize(cfg.n_paths);
    e.y0.resize(cfg.n_paths);
    const int q = cfg.substeps;

    parallel_for(cfg.n_paths, [&](std::size_t p) {
        double x0, y0;
        if (start) {
            x0 = start->x;
            y0 = start->y;
        } else {
            std::tie(x0, y0) = draw_initial(model, cfg.seed, p, cfg.antithetic);
        }
        e.x0[p] = x0;
        e.y0[p] = y0;
        const bool mirror = cfg.antithetic && (p & 1u);
        const KeyedStream rng(cfg.seed, Stream::brownian,
                              cfg.antithetic ? (p & ~std::size_t(1)) : p);
        double* row = e.x.data() + p * nt;
        row[0] = x0;
        double s = model.to_state(x0);
        if (!std::isfinite(s)) throw SimulationError("initial state outside the state space", p, 0);
        for (std::size_t k = 0; k + 1 < nt; ++k) {
            const double h = (time_grid[k + 1] - time_grid[k]) / q;
            for (int sub = 0; sub < q; ++sub) {
                const double t = time_grid[k] + sub * h;
                double z = rng.normal(std::uint64_t(k) * q + sub);
                if (mirror) z = -z;
                s = euler_step(model, s, m_flow(t), h, z);
            }
            const double x = model.to_natural(s);
            if (!std::isfinite(s) || !std::isfinite(x))
                throw SimulationError("non-finite state on path " + std::to_string(p) + " at step " +
                                          std::to_string(k + 1),
                                      p, k + 1);
            row[k + 1] = x;
        }
    });
    return e;
}

ComparisonReport comparison_check(const ModelSpec& model, const MeanFlow& m_lo,
                                  const MeanFlow& m_hi, const SimConfig& cfg,
                                  std::span<const double> time_grid, double tol_cmp) {
    const Ensemble lo = simulate_x(model, m_lo, cfg, time_grid);
    const Ensemble hi = simulate_x(model, m_hi, cfg, time_grid);
    ComparisonReport rep;
    const std::size_t nt = time_grid.size();
    bool first = true;
    for (std::size_t p = 0; p < cfg.n_paths; ++p) {
        for (std::size_t k = 0; k < nt; ++k) {
            const double a = lo.x[p * nt + k], b = hi.x[p * nt + k];
            if (a != b) rep.identical = false;
            const double d = a - b;
            if (first || d > rep.worst) {
                rep.worst = d;
                rep.path = p;
                rep.step = k;
                first = false;
            }
        }
    }
    rep.passed = rep.worst <= tol_cmp;
    return rep;
}

}  // namespace mfgce

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "mfgce/config.hpp"
#include "mfgce/mfg.hpp"
#include "mfgce/nplayer.hpp"
#include "mfgce/oracle.hpp"
#include "mfgce/skorokhod.hpp"
#include "mfgce/stopping.hpp"

using namespace mfgce;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

int failures = 0;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void report(int id, bool ok, double elapsed, double budget, const std::string& detail) {
    const bool in_time = budget <= 0 || elapsed <= budget;
    if (!(ok && in_time)) ++failures;
    std::printf("criterion %2d: %s  %s [%.1fs", id, ok && in_time ? "PASS" : "FAIL", detail.c_str(), elapsed);
    if (budget > 0) std::printf(" / %.0fs", budget);
    std::printf("]\n");
    std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

RunConfig shipped(const char* name) { return load_config(fs::path(MFGCE_CONFIG_DIR) / name); }

struct Instance {
    RunConfig cfg;
    ModelSpec model;
    Grid grid;
};

Instance instance(const char* name) {
    Instance in{shipped(name), {}, {}};
    in.model = in.cfg.build_model();
    in.grid = in.cfg.build_grid(in.model);
    return in;
}

SimConfig reseeded(SimConfig s, std::uint64_t seed, std::size_t n_paths = 0) {
    s.seed = seed;
    if (n_paths) s.n_paths = n_paths;
    return s;
}

// 25 probes: five times in the first half of the horizon, five x nodes across
// the middle half of the domain, interior fuel levels.
void criterion_1_2(const std::vector<Instance>& insts) {
    const auto t0 = Clock::now();
    bool ok1 = true;
    std::string d1;
    std::vector<ValueSurface> surfaces;
    for (const auto& in : insts) {
        const Grid& g = in.grid;
        const MeanFlow one = MeanFlow::constant(g.t(), 1.0);
        surfaces.push_back(solve_stopping(in.model, one, g, in.cfg.stopping));
        const ValueSurface& u = surfaces.back();
        const double tol = std::max(1e-2 * in.model.cost_c0, 5 * g.ds() * g.ds() + 5 * g.dt());
        double worst = 0.0;
        for (std::size_t a = 0; a < 5; ++a)
            for (std::size_t b = 0; b < 5; ++b) {
                const std::size_t n = a * g.n_t() / 10;
                const std::size_t i = g.n_x() / 4 + b * (g.n_x() / 2) / 5;
                const std::size_t j = 1 + (a + b) % 5 * (g.n_y() - 2) / 5;
                const double tree = tree_stopping_value(in.model, one, {1000, 50}, g.t()[n], g.x()[i], g.y()[j]);
                worst = std::max(worst, std::abs(u.at(n, i, j) - tree));
            }
        ok1 = ok1 && worst <= tol;
        d1 += fmt("%s max|dU| %.2e (tol %.2e); ", in.cfg.preset.c_str(), worst, tol);
    }
    report(1, ok1, seconds_since(t0), 120, "FD vs tree: " + d1);

    const auto t2 = Clock::now();
    bool ok2 = true;
    std::string d2;
    for (std::size_t s = 0; s < insts.size(); ++s) {
        const auto& in = insts[s];
        const ValueSurface& u = surfaces[s];
        const Grid& g = in.grid;
        const ModelSpec& m = in.model;
        const double c0 = m.cost_c0, tol = in.cfg.stopping.tol_mono;
        const std::size_t nx = g.n_x(), ny = g.n_y();
        std::size_t bounds = 0, mono = 0, terminal = 0, h_nodes = 0, h_missed = 0;
        for (std::size_t n = 0; n < g.n_t(); ++n)
            for (std::size_t i = 0; i < nx; ++i)
                for (std::size_t j = 0; j < ny; ++j) {
                    const double v = u.at(n, i, j);
                    if (!(v >= 0 && v <= c0)) ++bounds;
                    if (n + 1 < g.n_t() && v > u.at(n + 1, i, j) + tol) ++mono;
                    if (i + 1 < nx && v > u.at(n, i + 1, j) + tol) ++mono;
                    if (j + 1 < ny && v < u.at(n, i, j + 1) - tol) ++mono;
                    if (n + 1 == g.n_t() && v != c0) ++terminal;
                }
        const auto mask = continuation_mask(u, in.cfg.tol_active);
        const double margin = m.discount_r * c0 * g.dt();
        for (std::size_t n = 0; g.t()[n] < m.horizon_T - g.dt() - 1e-12; ++n)
            for (std::size_t i = 0; i < nx; ++i)
                for (std::size_t j = 1; j < ny; ++j)
                    if (m.profit_dy(g.x()[i], g.y()[j]) - m.discount_r * c0 < -margin) {
                        ++h_nodes;
                        if (!mask[(n * nx + i) * ny + j]) ++h_missed;
                    }
        const std::size_t pre = u.stats.violations();
        const bool ok = bounds == 0 && mono == 0 && terminal == 0 && h_missed == 0 && pre * 1000 <= u.stats.nodes;
        ok2 = ok2 && ok;
        d2 += fmt("%s bounds %zu mono %zu terminal %zu pre-clamp %zu/%zu H %zu/%zu missed; ", in.cfg.preset.c_str(),
                  bounds, mono, terminal, pre, u.stats.nodes, h_missed, h_nodes);
    }
    report(2, ok2, seconds_since(t2), 60, "invariants on the criterion 1 surfaces: " + d2);
}

struct Desk {
    Instance in;
    MfgSolution sol;
    double solve_seconds = 0.0;
};

void criterion_3(const Desk& d) {
    const auto& its = d.sol.iterates;
    const double budget = 2.0 * d.in.cfg.stopping.psor_tol;
    double lu = -INFINITY, lc = -INFINITY, lm = -INFINITY;
    for (std::size_t n = 1; n < its.size(); ++n) {
        lu = std::max(lu, its[n].ladder_u.value_or(INFINITY));
        lc = std::max(lc, its[n].ladder_c.value_or(INFINITY));
        lm = std::max(lm, its[n].ladder_m_excess.value_or(INFINITY));
    }
    const bool ok = d.sol.converged && d.sol.iterations <= 50 && its.back().sup_gap <= 5e-3 && lu <= budget &&
                    lc <= d.in.grid.dy() && lm <= 0.0;
    report(3, ok, d.solve_seconds, 300,
           fmt("ladder: %d iterations, final gap %.2e; max(u_n+1 - u_n) %.2e (<= %.0e), max(c_n+1 - c_n) %.2e "
               "(<= %.4f), max(m_n+1 - m_n - 3SE) %.2e (<= 0)",
               d.sol.iterations, its.back().sup_gap, lu, budget, lc, d.in.grid.dy(), lm));
}

void criterion_4(const Desk& d) {
    const auto t0 = Clock::now();
    const std::uint64_t fresh = d.in.cfg.seed + 0x9E3779B97F4A7C15ull;
    const ConsistencyReport c = consistency_residual(d.sol, d.in.model, d.in.cfg.sim, fresh);
    const double thr = std::max(2 * d.in.cfg.mfg.tol_iter, 4 * c.se);
    report(4, c.residual <= thr, seconds_since(t0),
           60, fmt("consistency: residual %.5f, SE %.5f, threshold %.5f", c.residual, c.se, thr));
}

void criterion_5(const Desk& d) {
    const auto t0 = Clock::now();
    const Grid& g = d.in.grid;
    const ModelSpec& m = d.in.model;
    const SimConfig a = reseeded(d.in.cfg.sim, d.in.cfg.seed + 101, 10000);
    const SimConfig b = reseeded(d.in.cfg.sim, d.in.cfg.seed + 202, 10000);
    struct Probe {
        std::size_t n;
        double x, y;
    };
    const std::size_t nt = g.n_t() - 1;
    const Probe probes[] = {{0, 0.0, 0.0}, {nt / 8, 0.5, 0.2}, {nt / 4, -0.5, 0.5}, {nt / 2, 1.0, 0.3}, {3 * nt / 4, 0.0, 0.7}};
    bool ok = true;
    double worst = 0.0;
    for (const Probe& p : probes) {
        const double t = g.t()[p.n];
        const Estimate vi = value_by_integration(d.sol.u, m, d.sol.m_response, a, t, p.x, p.y);
        const Estimate vs = value_by_simulation(m, d.sol.m_response, d.sol.boundary, b, t, p.x, p.y);
        const double z = std::abs(vi.value - vs.value) / std::hypot(vi.se, vs.se);
        worst = std::max(worst, z);
        ok = ok && z <= 3.0;
    }
    report(5, ok, seconds_since(t0), 120, fmt("control-stopping: worst |v_int - v_sim| / SE = %.2f (<= 3) over 5 probes", worst));
}

void criterion_6(const Desk& d) {
    const auto t0 = Clock::now();
    const Grid& g = d.in.grid;
    const Ensemble e = simulate_x(d.in.model, d.sol.m_response, reseeded(d.in.cfg.sim, d.in.cfg.seed + 303, 1000), g.t());
    std::size_t failed = 0;
    double wa = 0.0, wb = 0.0;
    for (std::size_t p = 0; p < e.n_paths; ++p) {
        const ControlledPath cp = reflect(d.sol.boundary, g.t(), e.path(p), e.y0[p]);
        const MinimalityReport r = verify_minimality(d.sol.boundary, cp, 1e-9);
        if (!r.passed) ++failed;
        wa = std::max(wa, r.worst_a);
        wb = std::max(wb, r.worst_b);
    }
    report(6, failed == 0, seconds_since(t0), 0,
           fmt("minimality: %zu/1000 paths fail, worst (a) %.1e, worst (b) %.1e (tol 1e-9)", failed, wa, wb));
}

void criterion_7() {
    const auto t0 = Clock::now();
    const Instance in = instance("ou_decoupled.yaml");
    const MfgSolution sol = mfg_iterate(in.model, in.grid, in.cfg.sim, in.cfg.mfg);
    const Estimate mv = value_at_initial_law(in.model, sol.m_star, sol.boundary, reseeded(in.cfg.sim, in.cfg.seed + 404));
    bool ok = sol.converged;
    std::string detail;
    for (std::size_t N : in.cfg.game.Ns) {
        const NashGapEstimate e =
            nash_gap(in.model, sol, N, in.cfg.sim, in.cfg.game.replications, in.cfg.stopping, in.cfg.tol_active);
        const double se = std::hypot(e.j_players_se, mv.se);
        const bool gap_ok = e.gap <= 3.0 * e.gap_se;
        const bool j_ok = std::abs(e.j_players - mv.value) <= 3.0 * se;
        ok = ok && gap_ok && j_ok;
        detail += fmt("N=%zu gap %.2e (3SE %.2e) |j_eq - j_mfg| %.4f (3SE %.4f); ", N, e.gap, 3 * e.gap_se,
                      std::abs(e.j_players - mv.value), 3 * se);
    }
    report(7, ok, seconds_since(t0), 120, "decoupled game: " + detail);
}

void criterion_8(const Desk& d) {
    const auto t0 = Clock::now();
    const RunConfig& cfg = d.in.cfg;
    const RateStudy st = rate_study(d.in.model, d.sol, cfg.game.Ns, cfg.sim, cfg.game.replications,
                                    cfg.stopping, cfg.tol_active, cfg.game.bootstrap);
    bool mono = true;
    for (std::size_t k = 1; k < st.rows.size(); ++k) {
        const auto &a = st.rows[k - 1], &b = st.rows[k];
        if (b.gap > a.gap + 3.0 * std::hypot(a.se, b.se)) mono = false;
    }
    const bool slope_ok = !st.fit.below_noise && st.fit.slope >= -0.8 && st.fit.slope <= -0.2;
    std::string rows;
    for (const auto& r : st.rows) rows += fmt(" %zu:%.4f", r.N, r.jdiff);
    report(8, slope_ok && mono, seconds_since(t0), 900,
           fmt("rate: slope %.3f CI [%.3f, %.3f] (in [-0.8, -0.2]), gap nonincreasing %s; |j_eq - j_mfg| by N:%s",
               st.fit.slope, st.fit.ci_lo, st.fit.ci_hi, mono ? "yes" : "no", rows.c_str()));
}

void criterion_9() {
    const auto t0 = Clock::now();
    const Instance gbm = instance("gbm_desk.yaml");
    const MfgSolution gs = mfg_iterate(gbm.model, gbm.grid, gbm.cfg.sim, gbm.cfg.mfg);
    const double alpha = gbm.cfg.params.at("alpha"), beta = gbm.cfg.params.at("beta");
    const double bound = 2.0 / (1.0 - beta) * std::exp(alpha * gbm.model.horizon_T);
    const double theta = estimate_lipschitz_x(gs.boundary, SlopeCoordinate::natural).theta;

    const Instance gw = instance("goodwill_desk.yaml");
    const MfgSolution ws = mfg_iterate(gw.model, gw.grid, gw.cfg.sim, gw.cfg.mfg);
    // f = x g(y), so g'/|g''| is the ratio of the y-derivatives at any x > 0.
    double kappa = 0.0;
    for (int k = 0; k <= 1000; ++k) {
        const double y = k / 1000.0;
        kappa = std::max(kappa, gw.model.profit_dy(1.0, y) / std::abs(gw.model.profit_dyy(1.0, y)));
    }
    const double slope = estimate_lipschitz_x(ws.boundary, SlopeCoordinate::log).theta;
    const bool ok = gs.converged && ws.converged && theta <= bound && slope <= kappa;
    report(9, ok, seconds_since(t0), 60,
           fmt("Lipschitz: gbm_lin_cd theta %.3f (<= %.3f); goodwill_gbm log-slope %.3f (<= kappa %.3f)", theta, bound,
               slope, kappa));
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void criterion_10() {
    const auto t0 = Clock::now();
    const fs::path root = fs::temp_directory_path() / "mfgce_acceptance_determinism";
    fs::remove_all(root);
    fs::create_directories(root);
    const std::string cfg = (fs::path(MFGCE_CONFIG_DIR) / "ou_desk.yaml").string();
    int status = 0;
    for (const char* threads : {"1", "8"}) {
        const std::string cmd = std::string("\"") + MFGCE_CLI_PATH + "\" iterate --config \"" + cfg + "\" --out \"" +
                                (root / threads).string() + "\" --threads " + threads + " > \"" +
                                (root / (std::string(threads) + ".log")).string() + "\" 2>&1";
        status |= std::system(cmd.c_str());
    }
    std::size_t files = 0, differ = 0;
    for (const auto& e : fs::directory_iterator(root / "1")) {
        ++files;
        const fs::path other = root / "8" / e.path().filename();
        if (!fs::exists(other) || slurp(e.path()) != slurp(other)) ++differ;
    }
    std::size_t other_files = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(root / "8")) ++other_files;
    const bool ok = status == 0 && files > 0 && files == other_files && differ == 0;
    report(10, ok, seconds_since(t0), 0,
           fmt("determinism: iterate at --threads 1 and 8, %zu files, %zu differ, exit status %d", files, differ, status));
}

}  // namespace

int main() {
    try {
        criterion_1_2({instance("ou_desk.yaml"), instance("gbm_desk.yaml"), instance("goodwill_desk.yaml")});

        Desk desk{instance("ou_desk.yaml"), {}, 0.0};
        const auto t0 = Clock::now();
        desk.sol = mfg_iterate(desk.in.model, desk.in.grid, desk.in.cfg.sim, desk.in.cfg.mfg);
        desk.solve_seconds = seconds_since(t0);
        criterion_3(desk);
        criterion_4(desk);
        criterion_5(desk);
        criterion_6(desk);
        criterion_7();
        criterion_8(desk);
        criterion_9();
        criterion_10();
    } catch (const std::exception& e) {
        std::printf("acceptance aborted: %s\n", e.what());
        return 2;
    }
    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}

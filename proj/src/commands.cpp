#include "mfgce/commands.hpp"

#include <cmath>
#include <ostream>

#include "mfgce/error.hpp"
#include "mfgce/io.hpp"
#include "mfgce/nplayer.hpp"
#include "mfgce/rng.hpp"

namespace mfgce {

using nlohmann::ordered_json;

namespace {

OutputMeta meta_for(const RunConfig& cfg, const std::string& command) {
    return {command, hex64(fnv1a64(cfg.source)), cfg.seed};
}

std::filesystem::path out_dir(const RunConfig& cfg) { return cfg.output_dir; }

ordered_json num(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

ordered_json iteration_json(const IterationRecord& r) {
    ordered_json j;
    j["n"] = r.n;
    j["sup_gap"] = num(r.sup_gap);
    j["boundary_sup_gap"] = r.boundary_sup_gap ? num(*r.boundary_sup_gap) : ordered_json(nullptr);
    j["m"] = r.m;
    return j;
}

std::uint64_t fresh_seed(std::uint64_t seed) { return splitmix64(seed ^ 0xC0FFEE123456789Full); }

struct Solved {
    ModelSpec model;
    Grid grid;
    MfgSolution solution;
};

Solved solve_mfg(const RunConfig& cfg, const OutputMeta& meta, const std::string& log_name) {
    Solved s{cfg.build_model(), {}, {}};
    s.grid = cfg.build_grid(s.model);
    JsonlWriter log(out_dir(cfg) / log_name, meta);
    s.solution = mfg_iterate(s.model, s.grid, cfg.sim, cfg.mfg,
                             [&](const IterationRecord& r) { log.write(iteration_json(r)); });
    return s;
}

std::vector<std::vector<double>> flow_rows(const MfgSolution& sol) {
    std::vector<std::vector<double>> rows;
    const auto& t = sol.m_star.time_grid();
    for (std::size_t k = 0; k < t.size(); ++k)
        rows.push_back({t[k], sol.m_star.values()[k], sol.m_star_se[k], sol.m_response.values()[k]});
    return rows;
}

}  // namespace

RunConfig resolve_config(const CommandOptions& opts) {
    RunConfig cfg = load_config(opts.config);
    if (opts.out) cfg.output_dir = opts.out->string();
    if (opts.seed) {
        cfg.seed = *opts.seed;
        cfg.sim.seed = *opts.seed;
    }
    return cfg;
}

int cmd_validate(const RunConfig& cfg, std::ostream& log) {
    const ModelSpec model = cfg.build_model();
    const Grid grid = cfg.build_grid(model);
    const AuditReport rep = audit_assumptions(model, grid);
    ordered_json j;
    j["meta"] = meta_for(cfg, "validate").to_json();
    j["all_passed"] = rep.all_passed();
    j["checks"] = ordered_json::array();
    for (const auto& c : rep.checks)
        j["checks"].push_back({{"name", c.name},
                               {"passed", c.passed},
                               {"worst", num(c.worst)},
                               {"worst_x", num(c.worst_x)},
                               {"worst_y", num(c.worst_y)}});
    j["warnings"] = rep.warnings;
    log << j.dump(2) << "\n";
    return rep.all_passed() ? 0 : 1;
}

int cmd_solve(const RunConfig& cfg, std::ostream& log) {
    const ModelSpec model = cfg.build_model();
    const Grid grid = cfg.build_grid(model);
    const OutputMeta meta = meta_for(cfg, "solve");
    const MeanFlow flow = MeanFlow::constant(grid.t(), cfg.solve_m);
    const ValueSurface u = solve_stopping(model, flow, grid, cfg.stopping);
    const Boundary c = extract_boundary(u, cfg.tol_active);
    const auto dir = out_dir(cfg);
    write_value_surface(dir, meta, u);
    write_boundary(dir, meta, c);

    ordered_json body;
    body["frozen_m"] = cfg.solve_m;
    const auto add_slope = [&](const char* key, SlopeCoordinate sc) {
        const LipschitzEstimate est = estimate_lipschitz_x(c, sc);
        body[key] = {{"theta", est.theta}, {"per_t", est.per_t}};
    };
    if (grid.n_x() >= 33) {
        add_slope("lipschitz_x", SlopeCoordinate::natural);
        if (grid.coordinate() == Coordinate::log) add_slope("lipschitz_log_x", SlopeCoordinate::log);
    }
    const SolveStats& st = u.stats;
    body["solve_stats"] = {{"nodes", st.nodes},
                           {"violations_t", st.violations_t},
                           {"violations_x", st.violations_x},
                           {"violations_y", st.violations_y},
                           {"worst_violation", st.worst_violation},
                           {"max_sweeps", st.max_sweeps},
                           {"worst_residual", st.worst_residual}};
    write_json(dir / "solve_report.json", meta, body);
    log << "solve: wrote value surface and boundary to " << dir.string() << "\n";
    return 0;
}

int cmd_iterate(const RunConfig& cfg, std::ostream& log) {
    const OutputMeta meta = meta_for(cfg, "iterate");
    const Solved s = solve_mfg(cfg, meta, "iterations.jsonl");
    const auto dir = out_dir(cfg);
    write_boundary(dir, meta, s.solution.boundary);
    write_tensor(dir / "value_surface.bin", meta,
                 {s.grid.n_t(), s.grid.n_x(), s.grid.n_y()}, s.solution.u.values());
    write_csv(dir / "mean_flow.csv", meta, {"t", "m_star", "se", "m_response"}, flow_rows(s.solution));
    const std::uint64_t fs = fresh_seed(cfg.seed);
    const ConsistencyReport cr = consistency_residual(s.solution, s.model, cfg.sim, fs);
    ordered_json body;
    body["converged"] = s.solution.converged;
    body["iterations"] = s.solution.iterations;
    body["final_sup_gap"] = s.solution.iterates.back().sup_gap;
    body["consistency_residual"] = cr.residual;
    body["consistency_se"] = cr.se;
    body["consistency_seed"] = fs;
    write_json(dir / "iterate_summary.json", meta, body);
    log << "iterate: " << (s.solution.converged ? "converged" : "not converged") << " after "
        << s.solution.iterations << " iterations; consistency residual " << cr.residual << "\n";
    return s.solution.converged ? 0 : 3;
}

int cmd_game(const RunConfig& cfg, std::ostream& log) {
    const OutputMeta meta = meta_for(cfg, "game");
    const Solved s = solve_mfg(cfg, meta, "mfg_iterations.jsonl");
    const auto dir = out_dir(cfg);
    const std::size_t N = cfg.game.N;
    const NashGapEstimate est =
        nash_gap(s.model, s.solution, N, cfg.sim, cfg.game.replications, cfg.stopping, cfg.tol_active);
    const GameRun run = simulate_game(s.model, s.solution.boundary, N, cfg.sim, s.grid.t());
    std::vector<std::vector<double>> rows;
    for (std::size_t k = 0; k < s.grid.n_t(); ++k)
        rows.push_back({s.grid.t()[k], run.m_N[k], est.m_hat[k], s.solution.m_star.values()[k]});
    write_csv(dir / "game_flow.csv", meta, {"t", "m_N", "m_hat", "m_star"}, rows);
    ordered_json body;
    body["N"] = N;
    body["replications"] = est.replications;
    body["j_equilibrium"] = est.j_equilibrium;
    body["j_equilibrium_se"] = est.j_equilibrium_se;
    body["j_best_response"] = est.j_best_response;
    body["j_best_response_se"] = est.j_best_response_se;
    body["gap"] = est.gap;
    body["gap_se"] = est.gap_se;
    body["j_players"] = est.j_players;
    body["j_players_se"] = est.j_players_se;
    body["j_mfg"] = est.j_mfg;
    body["j_mfg_se"] = est.j_mfg_se;
    body["jdiff"] = est.jdiff;
    body["jdiff_se"] = est.jdiff_se;
    body["method"] = est.method;
    write_json(dir / "game.json", meta, body);
    log << "game: N = " << N << ", gap " << est.gap << " +- " << est.gap_se << "\n";
    return 0;
}

int cmd_study(const RunConfig& cfg, std::ostream& log) {
    const OutputMeta meta = meta_for(cfg, "study");
    const Solved s = solve_mfg(cfg, meta, "mfg_iterations.jsonl");
    const auto dir = out_dir(cfg);
    const RateStudy st = rate_study(s.model, s.solution, cfg.game.Ns, cfg.sim, cfg.game.replications,
                                    cfg.stopping, cfg.tol_active, cfg.game.bootstrap);
    std::vector<std::vector<double>> rows;
    for (const auto& r : st.rows) rows.push_back({double(r.N), r.gap, r.se, r.jdiff, r.jdiff_se});
    write_csv(dir / "rate_study.csv", meta, {"N", "gap", "se", "jdiff", "jdiff_se"}, rows);
    ordered_json body;
    body["slope"] = num(st.fit.slope);
    body["ci_lo"] = num(st.fit.ci_lo);
    body["ci_hi"] = num(st.fit.ci_hi);
    body["floor_hits"] = st.fit.floor_hits;
    body["status"] = st.fit.below_noise ? "below noise" : "ok";
    write_json(dir / "rate_summary.json", meta, body);
    log << "study: slope " << st.fit.slope << " [" << st.fit.ci_lo << ", " << st.fit.ci_hi << "]\n";
    return 0;
}

int run_command(const std::string& name, const CommandOptions& opts, std::ostream& log) {
    const RunConfig cfg = resolve_config(opts);
    if (name == "validate") return cmd_validate(cfg, log);
    if (name == "solve") return cmd_solve(cfg, log);
    if (name == "iterate") return cmd_iterate(cfg, log);
    if (name == "game") return cmd_game(cfg, log);
    if (name == "study") return cmd_study(cfg, log);
    throw InvalidArgument("cli", "unknown command '" + name + "'");
}

}  // namespace mfgce

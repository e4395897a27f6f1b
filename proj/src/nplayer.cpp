#include "mfgce/nplayer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mfgce/error.hpp"
#include "mfgce/parallel.hpp"
#include "mfgce/rng.hpp"
#include "mfgce/skorokhod.hpp"

namespace mfgce {

double exchangeable_mean(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    double s = 0.0;
    for (double x : v) s += x;
    return s / double(v.size());
}

GameRun simulate_game(const ModelSpec& model, const Boundary& boundary, std::size_t N,
                      const SimConfig& sim, std::span<const double> time_grid,
                      const GameOptions& opts) {
    if (N < 2) throw InvalidArgument("nplayer", "the game needs N >= 2 players");
    if (!opts.labels.empty() && opts.labels.size() != N)
        throw InvalidArgument("nplayer", "one stream label per player required");
    if (opts.replication >= (std::uint64_t(1) << 32))
        throw InvalidArgument("nplayer", "replication index too large");
    const std::size_t nt = time_grid.size();
    const int q = std::max(1, sim.substeps);

    GameRun run;
    run.N = N;
    run.seed = sim.seed;
    run.time_grid.assign(time_grid.begin(), time_grid.end());
    run.x.resize(N * nt);
    run.y.resize(N * nt);
    run.x0.resize(N);
    run.y0.resize(N);
    run.m_N.resize(nt);
    run.payoffs.resize(N);

    std::vector<KeyedStream> rng;
    rng.reserve(N);
    std::vector<double> s(N), xi(N, 0.0), ycur(N);
    auto boundary_of = [&](std::size_t i) -> const Boundary& {
        return (i == 0 && opts.deviation) ? *opts.deviation : boundary;
    };
    for (std::size_t i = 0; i < N; ++i) {
        const std::uint64_t label =
            (opts.replication << 32) | (opts.labels.empty() ? std::uint64_t(i) : opts.labels[i]);
        rng.emplace_back(sim.seed, Stream::game_brownian, label);
        const auto [x0, y0] = draw_initial(model, sim.seed, label, false, 1);
        run.x0[i] = x0;
        run.y0[i] = y0;
        s[i] = model.to_state(x0);
        if (!std::isfinite(s[i])) throw SimulationError("initial state outside the state space", i, 0);
        run.x[i * nt] = x0;
        xi[i] = std::max(0.0, boundary_of(i).value(time_grid[0], x0) - y0);
        ycur[i] = std::min(1.0, y0 + xi[i]);
        run.y[i * nt] = ycur[i];
    }
    run.m_N[0] = exchangeable_mean(ycur);

    for (std::size_t k = 0; k + 1 < nt; ++k) {
        const double h = (time_grid[k + 1] - time_grid[k]) / q;
        const double m = run.m_N[k];
        for (std::size_t i = 0; i < N; ++i) {
            for (int sub = 0; sub < q; ++sub)
                s[i] = euler_step(model, s[i], m, h, rng[i].normal(std::uint64_t(k) * q + sub));
            const double x = model.to_natural(s[i]);
            if (!std::isfinite(x))
                throw SimulationError("non-finite state for player " + std::to_string(i), i, k + 1);
            run.x[i * nt + k + 1] = x;
            xi[i] = std::max(xi[i], boundary_of(i).value(time_grid[k + 1], x) - run.y0[i]);
            ycur[i] = std::min(1.0, run.y0[i] + xi[i]);
            run.y[i * nt + k + 1] = ycur[i];
        }
        run.m_N[k + 1] = exchangeable_mean(ycur);
    }

    for (std::size_t i = 0; i < N; ++i) {
        const std::span<const double> xp(run.x.data() + i * nt, nt);
        run.payoffs[i] = payoff(model, reflect(boundary_of(i), time_grid, xp, run.y0[i]));
    }

    if (opts.benchmark_flow) {
        // Same noise and initial draw, deterministic flow, common boundary.
        run.benchmark_payoffs.resize(N);
        std::vector<double> xb(nt);
        for (std::size_t i = 0; i < N; ++i) {
            double sb = model.to_state(run.x0[i]);
            xb[0] = run.x0[i];
            for (std::size_t k = 0; k + 1 < nt; ++k) {
                const double h = (time_grid[k + 1] - time_grid[k]) / q;
                for (int sub = 0; sub < q; ++sub)
                    sb = euler_step(model, sb, (*opts.benchmark_flow)(time_grid[k] + sub * h), h,
                                    rng[i].normal(std::uint64_t(k) * q + sub));
                xb[k + 1] = model.to_natural(sb);
                if (!std::isfinite(xb[k + 1]))
                    throw SimulationError("non-finite benchmark state", i, k + 1);
            }
            run.benchmark_payoffs[i] = payoff(model, reflect(boundary, time_grid, xb, run.y0[i]));
        }
    }
    return run;
}

namespace {

struct MeanSe {
    double mean = 0.0, se = 0.0;
};

MeanSe mean_se(const std::vector<double>& v) {
    MeanSe o;
    if (v.empty()) return o;
    for (double x : v) o.mean += x;
    o.mean /= double(v.size());
    if (v.size() < 2) return o;
    double ss = 0.0;
    for (double x : v) ss += (x - o.mean) * (x - o.mean);
    o.se = std::sqrt(ss / double(v.size() - 1) / double(v.size()));
    return o;
}

}  // namespace

NashGapEstimate nash_gap(const ModelSpec& model, const MfgSolution& solution, std::size_t N,
                         const SimConfig& sim, std::size_t replications,
                         const StoppingOptions& stopping, double tol_active) {
    if (replications < 2) throw InvalidArgument("nplayer", "replications must be at least 2");
    const Grid& grid = solution.boundary.grid();
    const auto& tg = grid.t();
    const std::size_t nt = tg.size();

    std::vector<double> eq1(replications), all(replications), bench(replications),
        d(replications), dev1(replications);
    std::vector<std::vector<double>> mN(replications);
    parallel_for(replications, [&](std::size_t r) {
        GameOptions o;
        o.replication = r;
        o.benchmark_flow = &solution.m_star;
        const GameRun run = simulate_game(model, solution.boundary, N, sim, tg, o);
        eq1[r] = run.payoffs[0];
        all[r] = exchangeable_mean(run.payoffs);
        bench[r] = exchangeable_mean(run.benchmark_payoffs);
        std::vector<double> diff(N);
        for (std::size_t i = 0; i < N; ++i) diff[i] = run.payoffs[i] - run.benchmark_payoffs[i];
        d[r] = exchangeable_mean(diff);
        mN[r] = run.m_N;
    });

    std::vector<double> m_hat(nt, 0.0);
    for (std::size_t k = 0; k < nt; ++k) {
        for (std::size_t r = 0; r < replications; ++r) m_hat[k] += mN[r][k];
        m_hat[k] = std::clamp(m_hat[k] / double(replications), 0.0, 1.0);
    }
    const MeanFlow frozen(tg, m_hat);
    const ValueSurface u_dev = solve_stopping(model, frozen, grid, stopping);
    const Boundary c_dev = extract_boundary(u_dev, tol_active);

    parallel_for(replications, [&](std::size_t r) {
        GameOptions o;
        o.replication = r;
        o.deviation = &c_dev;
        const GameRun run = simulate_game(model, solution.boundary, N, sim, tg, o);
        dev1[r] = run.payoffs[0];
    });

    NashGapEstimate est;
    est.N = N;
    est.replications = replications;
    est.m_hat = m_hat;
    est.d_rep = d;
    MeanSe a = mean_se(eq1), b = mean_se(dev1), p = mean_se(all), bm = mean_se(bench),
           sd = mean_se(d);
    est.j_equilibrium = a.mean;
    est.j_equilibrium_se = a.se;
    est.j_best_response = b.mean;
    est.j_best_response_se = b.se;
    std::vector<double> paired(replications);
    for (std::size_t r = 0; r < replications; ++r) paired[r] = dev1[r] - eq1[r];
    const MeanSe g = mean_se(paired);
    est.gap = std::max(0.0, g.mean);
    est.gap_se = g.se;
    est.j_players = p.mean;
    est.j_players_se = p.se;
    est.j_mfg = bm.mean;
    est.j_mfg_se = bm.se;
    est.jdiff_signed = sd.mean;
    est.jdiff_signed_se = sd.se;
    std::vector<double> absd(replications);
    for (std::size_t r = 0; r < replications; ++r) absd[r] = std::abs(d[r]);
    const MeanSe ad = mean_se(absd);
    est.jdiff = ad.mean;
    est.jdiff_se = ad.se;
    return est;
}

namespace {

double ols_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = double(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

struct FloorFit {
    double slope = 0.0;
    std::size_t hits = 0;
};

FloorFit floored_fit(const std::vector<std::size_t>& Ns, const std::vector<double>& jd,
                     const std::vector<double>& se) {
    std::vector<double> lx, ly;
    FloorFit f;
    for (std::size_t i = 0; i < Ns.size(); ++i) {
        const double floor = 0.5 * se[i];
        if (jd[i] <= floor) ++f.hits;
        lx.push_back(std::log(double(Ns[i])));
        ly.push_back(std::log(std::max(jd[i], floor)));
    }
    if (f.hits < Ns.size()) f.slope = ols_slope(lx, ly);
    return f;
}

}  // namespace

RateFit fit_rate(const std::vector<RateRow>& rows) {
    if (rows.size() < 2) throw InvalidArgument("nplayer", "rate fit needs at least two sizes");
    std::vector<std::size_t> Ns;
    std::vector<double> jd, se;
    for (const auto& r : rows) {
        Ns.push_back(r.N);
        jd.push_back(r.jdiff);
        se.push_back(r.jdiff_se);
    }
    const FloorFit f = floored_fit(Ns, jd, se);
    RateFit out;
    out.floor_hits = f.hits;
    out.below_noise = f.hits == rows.size();
    out.slope = out.below_noise ? NAN : f.slope;
    out.ci_lo = out.ci_hi = out.slope;
    return out;
}

RateStudy rate_study(const ModelSpec& model, const MfgSolution& solution,
                     const std::vector<std::size_t>& Ns, const SimConfig& sim,
                     std::size_t replications, const StoppingOptions& stopping, double tol_active,
                     std::size_t bootstrap) {
    if (Ns.size() < 2) throw InvalidArgument("nplayer", "rate study needs at least two sizes");
    RateStudy study;
    for (std::size_t N : Ns) {
        SimConfig cfg = sim;
        cfg.seed = splitmix64(sim.seed ^ (0x5851F42D4C957F2Dull * N));
        NashGapEstimate est = nash_gap(model, solution, N, cfg, replications, stopping, tol_active);
        study.rows.push_back({N, est.gap, est.gap_se, est.jdiff, est.jdiff_se});
        study.estimates.push_back(std::move(est));
    }
    study.fit = fit_rate(study.rows);
    if (study.fit.below_noise || bootstrap == 0) return study;

    // Percentile interval from resampling replications within every N.
    std::vector<double> slopes;
    slopes.reserve(bootstrap);
    const std::size_t R = replications;
    for (std::size_t b = 0; b < bootstrap; ++b) {
        const KeyedStream rng(sim.seed, Stream::bootstrap, b);
        std::vector<double> jd(Ns.size()), se(Ns.size());
        std::uint64_t ctr = 0;
        for (std::size_t i = 0; i < Ns.size(); ++i) {
            std::vector<double> sample(R);
            for (std::size_t r = 0; r < R; ++r) {
                const std::size_t pick =
                    std::min<std::size_t>(R - 1, std::size_t(rng.uniforms(ctr++)[0] * double(R)));
                sample[r] = std::abs(study.estimates[i].d_rep[pick]);
            }
            const MeanSe ms = mean_se(sample);
            jd[i] = ms.mean;
            se[i] = ms.se;
        }
        const FloorFit f = floored_fit(Ns, jd, se);
        if (f.hits < Ns.size()) slopes.push_back(f.slope);
    }
    if (!slopes.empty()) {
        std::sort(slopes.begin(), slopes.end());
        auto q = [&](double p) {
            const double pos = p * double(slopes.size() - 1);
            const std::size_t lo = std::size_t(pos);
            const std::size_t hi = std::min(slopes.size() - 1, lo + 1);
            return slopes[lo] + (pos - double(lo)) * (slopes[hi] - slopes[lo]);
        };
        study.fit.ci_lo = q(0.025);
        study.fit.ci_hi = q(0.975);
    }
    return study;
}

}  // namespace mfgce

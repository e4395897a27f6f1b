#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mfgce/mfg.hpp"

namespace mfgce {

struct GameOptions {
    /// Stream label per player (defaults to 0..N-1). Permuting labels
    /// permutes per-player outputs.
    std::vector<std::uint64_t> labels;
    /// Boundary used by player 0 instead of the common one.
    const Boundary* deviation = nullptr;
    /// When set, each player also drives a copy of its own state under this
    /// deterministic flow with the same noise (the mean-field benchmark).
    const MeanFlow* benchmark_flow = nullptr;
    std::uint64_t replication = 0;
};

struct GameRun {
    std::size_t N = 0;
    std::uint64_t seed = 0;
    std::vector<double> time_grid;
    std::vector<double> x, y;       // N x n_t, row-major per player
    std::vector<double> x0, y0;
    std::vector<double> m_N;        // empirical mean flow per node
    std::vector<double> payoffs;    // per player
    std::vector<double> benchmark_payoffs;
};

/// Explicit same-step coupling: the drift over [t_k, t_{k+1}) reads m^N(t_k),
/// all players then move, reflect at t_{k+1}, and m^N is recomputed.
GameRun simulate_game(const ModelSpec& model, const Boundary& boundary, std::size_t N,
                      const SimConfig& sim, std::span<const double> time_grid,
                      const GameOptions& opts = {});

/// Order-independent mean (sorted summation).
double exchangeable_mean(std::vector<double> v);

struct NashGapEstimate {
    std::size_t N = 0;
    std::size_t replications = 0;
    double j_equilibrium = 0.0, j_equilibrium_se = 0.0;    // player 1, equilibrium arm
    double j_best_response = 0.0, j_best_response_se = 0.0;
    double gap = 0.0, gap_se = 0.0;                        // paired difference
    double j_players = 0.0, j_players_se = 0.0;            // all-player average
    double j_mfg = 0.0, j_mfg_se = 0.0;                    // coupled mean-field benchmark
    double jdiff = 0.0, jdiff_se = 0.0;                    // mean_r |D_r|
    double jdiff_signed = 0.0, jdiff_signed_se = 0.0;      // mean_r D_r
    std::vector<double> d_rep;                             // D_r per replication
    std::vector<double> m_hat;                             // replication-averaged m^N
    std::string method = "frozen-flow best response; own 1/N feedback ignored";
};

NashGapEstimate nash_gap(const ModelSpec& model, const MfgSolution& solution, std::size_t N,
                         const SimConfig& sim, std::size_t replications,
                         const StoppingOptions& stopping = {}, double tol_active = -1.0);

struct RateRow {
    std::size_t N = 0;
    double gap = 0.0, se = 0.0, jdiff = 0.0, jdiff_se = 0.0;
};

struct RateFit {
    bool below_noise = false;
    double slope = 0.0, ci_lo = 0.0, ci_hi = 0.0;
    std::size_t floor_hits = 0;
};

/// OLS of log max(jdiff, 0.5 jdiff_se) on log N.
RateFit fit_rate(const std::vector<RateRow>& rows);

struct RateStudy {
    std::vector<RateRow> rows;
    std::vector<NashGapEstimate> estimates;
    RateFit fit;
};

RateStudy rate_study(const ModelSpec& model, const MfgSolution& solution,
                     const std::vector<std::size_t>& Ns, const SimConfig& sim,
                     std::size_t replications, const StoppingOptions& stopping = {},
                     double tol_active = -1.0, std::size_t bootstrap = 1000);

}  // namespace mfgce

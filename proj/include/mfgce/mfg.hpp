#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "mfgce/grid.hpp"
#include "mfgce/model.hpp"
#include "mfgce/simulate.hpp"
#include "mfgce/stopping.hpp"

namespace mfgce {

struct MfgOptions {
    double tol_iter = 5e-3;
    int max_iters = 50;
    double tol_active = -1.0;  // negative: 1e-6 * c0
    StoppingOptions stopping;
};

/// Mean of Y over an ensemble reflected at a boundary.
struct FlowEstimate {
    MeanFlow flow;
    std::vector<double> se;  // standard error per time node
    std::vector<double> y;   // per-path Y, row-major like Ensemble::x
    double mean_y0 = 0.0;    // mean of the initial fuel draws
};

FlowEstimate update_mean_flow(const Ensemble& ensemble, const Boundary& boundary);

struct IterationRecord {
    int n = 0;
    double sup_gap = 0.0;                    // sup_t |m^[n] - m^[n-1]|
    std::optional<double> boundary_sup_gap;  // sup |c_n - c_{n-1}|
    std::vector<double> m;
    bool flow_monotone = true;
    double sandwich_margin = 0.0;            // min_t m^[n](t) - mean y0 draw
    // Ladder against the previous iterate; positive excess is a violation.
    std::optional<double> ladder_u;          // max (u_n - u_{n-1})
    std::optional<double> ladder_c;          // max (c_n - c_{n-1})
    std::optional<double> ladder_m_excess;   // max (m^[n] - m^[n-1] - 3 SE_diff)
    double max_pathwise_increase = 0.0;      // max over paths/nodes of Y^[n] - Y^[n-1]
    SolveStats solve;
};

struct MfgSolution {
    Boundary boundary;     // c_n of the last iteration
    ValueSurface u;        // u_n of the last iteration
    MeanFlow m_star;       // m^[n]
    MeanFlow m_response;   // m^[n-1], the flow u_n and c_n respond to
    std::vector<double> m_star_se;
    std::vector<IterationRecord> iterates;
    bool converged = false;
    int iterations = 0;
};

using IterationCallback = std::function<void(const IterationRecord&)>;

/// Monotone scheme started from m^[-1] = 1, with the same noise at every
/// iteration so successive ensembles are pathwise comparable.
MfgSolution mfg_iterate(const ModelSpec& model, const Grid& grid, const SimConfig& sim,
                        const MfgOptions& opts = {}, const IterationCallback& on_iter = {});

struct Estimate {
    double value = 0.0;
    double se = 0.0;
};

/// Phi(t,x) - int_y^1 u(t,x,z) dz with Phi by Monte Carlo; t must be a grid node.
Estimate value_by_integration(const ValueSurface& u, const ModelSpec& model,
                              const MeanFlow& m_flow, const SimConfig& sim, double t, double x,
                              double y);

/// Mean payoff of the reflected control started at (t, x, y).
Estimate value_by_simulation(const ModelSpec& model, const MeanFlow& m_flow,
                             const Boundary& boundary, const SimConfig& sim, double t, double x,
                             double y);

/// Mean payoff over the initial law of the reflected control.
Estimate value_at_initial_law(const ModelSpec& model, const MeanFlow& m_flow,
                              const Boundary& boundary, const SimConfig& sim);

struct ConsistencyReport {
    double residual = 0.0;  // sup_t |recomputed - m_star|
    double se = 0.0;        // sup_t SE of the difference of the two estimates
    MeanFlow recomputed;
};

ConsistencyReport consistency_residual(const MfgSolution& solution, const ModelSpec& model,
                                       const SimConfig& sim, std::uint64_t fresh_seed);

}  // namespace mfgce

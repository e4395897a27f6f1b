#pragma once

#include <vector>

#include "mfgce/model.hpp"

namespace mfgce {

struct TreeSpec {
    int steps = 400;        // at most 2000
    int fuel_levels = 50;   // fuel grid has fuel_levels + 1 points, at most 51
};

/// Trinomial lattice in the computational coordinate rooted at (t, x).
/// Spacing ds = sigma_ref * sqrt(3 dt); each node branches around the node
/// nearest to its Euler mean, with probabilities matching the first two
/// Euler moments.
class RecombiningTree {
public:
    RecombiningTree(const ModelSpec& model, const MeanFlow& m_flow, const TreeSpec& spec, double t,
                    double x);

    struct Layer {
        long lo = 0;                            // index of first node
        std::vector<long> centre;               // branch centre per node
        std::vector<double> pd, pm, pu;         // probabilities per node
    };

    int steps() const { return int(layers_.size()) - 1; }
    double dt() const { return dt_; }
    double t0() const { return t0_; }
    double node_x(long k) const;
    const Layer& layer(int n) const { return layers_[n]; }

private:
    const ModelSpec* model_;
    double t0_, dt_, s0_, ds_;
    std::vector<Layer> layers_;
};

/// Backward induction V = min(c0, w * d_y f + e^{-r dt} E[V']).
double tree_stopping_value(const ModelSpec& model, const MeanFlow& m_flow, const TreeSpec& tree,
                           double t, double x, double y);

struct ControlValue {
    double value = 0.0;
    double action_boundary = 0.0;  // lowest fuel level where no action is taken at the root
};

/// DP over (node, fuel level): add k fuel quanta now at cost c0 * k * dy.
/// At T the tank is topped up, matching c(T, x) = 1. Off-grid y is linearly
/// interpolated between fuel levels.
ControlValue tree_control_value(const ModelSpec& model, const MeanFlow& m_flow,
                                const TreeSpec& tree, double t, double x, double y);

}  // namespace mfgce

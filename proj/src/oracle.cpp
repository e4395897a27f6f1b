#include "mfgce/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mfgce/error.hpp"

namespace mfgce {

RecombiningTree::RecombiningTree(const ModelSpec& model, const MeanFlow& m_flow,
                                 const TreeSpec& spec, double t, double x)
    : model_(&model), t0_(t) {
    if (spec.steps < 1 || spec.steps > 2000)
        throw InvalidArgument("oracle", "tree steps must lie in [1, 2000]");
    if (!(t < model.horizon_T)) throw InvalidArgument("oracle", "tree root must precede T");
    const int n = spec.steps;
    dt_ = (model.horizon_T - t) / n;
    s0_ = model.to_state(x);
    const double sigma_ref = model.state_vol(s0_);
    ds_ = sigma_ref * std::sqrt(3.0 * dt_);
    if (!(ds_ > 0) || !std::isfinite(ds_)) throw InvalidArgument("oracle", "degenerate tree spacing");

    layers_.resize(n + 1);
    layers_[0].lo = 0;
    long lo = 0, hi = 0;
    for (int step = 0; step < n; ++step) {
        Layer& L = layers_[step];
        L.lo = lo;
        const std::size_t width = std::size_t(hi - lo + 1);
        L.centre.resize(width);
        L.pd.resize(width);
        L.pm.resize(width);
        L.pu.resize(width);
        const double m = m_flow(t + step * dt_);
        long next_lo = lo, next_hi = hi;
        bool first = true;
        for (long k = lo; k <= hi; ++k) {
            const double s = s0_ + k * ds_;
            const double mean = model.state_drift(s, m) * dt_;
            const double vol = model.state_vol(s);
            const long j = std::lround(mean / ds_);
            const double eta = (mean - j * ds_) / ds_;
            const double q = vol * vol * dt_ / (ds_ * ds_) + eta * eta;
            const double pu = 0.5 * (q + eta), pd = 0.5 * (q - eta), pm = 1.0 - q;
            if (!(pu >= -1e-12 && pd >= -1e-12 && pm >= -1e-12) || !std::isfinite(q)) {
                std::ostringstream os;
                os << "tree probabilities leave [0,1] at x = " << model.to_natural(s)
                   << " (volatility varies too much against the reference; increase steps or "
                      "narrow the probe range)";
                throw InvalidArgument("oracle", os.str());
            }
            const std::size_t idx = std::size_t(k - lo);
            L.centre[idx] = k + j;
            L.pd[idx] = std::max(pd, 0.0);
            L.pm[idx] = std::max(pm, 0.0);
            L.pu[idx] = std::max(pu, 0.0);
            if (first || k + j - 1 < next_lo) next_lo = k + j - 1;
            if (first || k + j + 1 > next_hi) next_hi = k + j + 1;
            first = false;
        }
        lo = next_lo;
        hi = next_hi;
    }
    layers_[n].lo = lo;
    layers_[n].centre.assign(std::size_t(hi - lo + 1), 0);
}

double RecombiningTree::node_x(long k) const { return model_->to_natural(s0_ + k * ds_); }

namespace {

double running_weight(double r, double dt) { return r > 0 ? (1 - std::exp(-r * dt)) / r : dt; }

}  // namespace

double tree_stopping_value(const ModelSpec& model, const MeanFlow& m_flow, const TreeSpec& spec,
                           double t, double x, double y) {
    const double c0 = model.cost_c0;
    if (t >= model.horizon_T) return c0;
    if (y <= 0.0 && std::isinf(model.profit_dy(x, 0.0))) return c0;
    const RecombiningTree tree(model, m_flow, spec, t, x);
    const int n = tree.steps();
    const double w = running_weight(model.discount_r, tree.dt());
    const double disc = std::exp(-model.discount_r * tree.dt());

    std::vector<double> next(tree.layer(n).centre.size(), c0), cur;
    long next_lo = tree.layer(n).lo;
    for (int step = n - 1; step >= 0; --step) {
        const auto& L = tree.layer(step);
        cur.resize(L.centre.size());
        for (std::size_t i = 0; i < cur.size(); ++i) {
            const long c = L.centre[i] - next_lo;
            const double ev = L.pd[i] * next[c - 1] + L.pm[i] * next[c] + L.pu[i] * next[c + 1];
            const double g = model.profit_dy(tree.node_x(L.lo + long(i)), y);
            cur[i] = std::min(c0, w * g + disc * ev);
        }
        next.swap(cur);
        next_lo = L.lo;
    }
    return next[0];
}

ControlValue tree_control_value(const ModelSpec& model, const MeanFlow& m_flow,
                                const TreeSpec& spec, double t, double x, double y) {
    if (spec.fuel_levels < 1 || spec.fuel_levels > 50)
        throw InvalidArgument("oracle", "fuel grid must have between 2 and 51 levels");
    if (!(y >= 0.0 && y <= 1.0)) throw InvalidArgument("oracle", "fuel level outside [0,1]");
    const int nl = spec.fuel_levels + 1;
    const double dy = 1.0 / spec.fuel_levels;
    const double c0 = model.cost_c0;
    // inf of an empty continuation set is 1: what is left is bought at T.
    if (t >= model.horizon_T) return {-c0 * (1.0 - y), 1.0};

    const RecombiningTree tree(model, m_flow, spec, t, x);
    const int n = tree.steps();
    const double w = running_weight(model.discount_r, tree.dt());
    const double disc = std::exp(-model.discount_r * tree.dt());

    std::vector<double> next(tree.layer(n).centre.size() * nl), cur, hold(nl);
    for (std::size_t k = 0; k < next.size(); ++k) next[k] = -c0 * (1.0 - double(k % nl) * dy);
    long next_lo = tree.layer(n).lo;
    std::vector<int> root_choice(nl);
    for (int step = n - 1; step >= 0; --step) {
        const auto& L = tree.layer(step);
        cur.assign(L.centre.size() * nl, 0.0);
        for (std::size_t i = 0; i < L.centre.size(); ++i) {
            const long c = L.centre[i] - next_lo;
            const double xi = tree.node_x(L.lo + long(i));
            for (int l = 0; l < nl; ++l) {
                const double ev = L.pd[i] * next[(c - 1) * nl + l] + L.pm[i] * next[c * nl + l] +
                                  L.pu[i] * next[(c + 1) * nl + l];
                hold[l] = w * model.profit(xi, l * dy) + disc * ev;
            }
            // V(l) = max_{l' >= l} [hold(l') - c0 (l' - l) dy], via suffix maxima.
            double best = -INFINITY;
            int arg = nl - 1;
            for (int l = nl - 1; l >= 0; --l) {
                const double cand = hold[l] - c0 * l * dy;
                if (cand > best) {
                    best = cand;
                    arg = l;
                }
                cur[i * nl + l] = best + c0 * l * dy;
                if (step == 0) root_choice[l] = arg;
            }
        }
        next.swap(cur);
        next_lo = L.lo;
    }

    ControlValue out;
    const double pos = y / dy;
    const int l0 = std::min(nl - 2, int(pos));
    const double wy = std::clamp(pos - l0, 0.0, 1.0);
    out.value = (1 - wy) * next[l0] + wy * next[l0 + 1];
    out.action_boundary = 1.0;
    for (int l = 0; l < nl; ++l)
        if (root_choice[l] == l) {
            out.action_boundary = l * dy;
            break;
        }
    return out;
}

}  // namespace mfgce

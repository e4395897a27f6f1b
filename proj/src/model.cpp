#include "mfgce/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "mfgce/error.hpp"
#include "mfgce/grid.hpp"

namespace mfgce {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double require(const PresetParams& p, const std::string& key) {
    auto it = p.find(key);
    if (it == p.end()) throw InvalidArgument("model", "missing preset parameter '" + key + "'");
    if (!std::isfinite(it->second))
        throw InvalidArgument("model", "preset parameter '" + key + "' is not finite");
    return it->second;
}

void check_known(const PresetParams& p, std::initializer_list<const char*> keys) {
    for (const auto& [k, v] : p) {
        (void)v;
        bool known = false;
        for (const char* c : keys) known = known || k == c;
        if (!known) throw InvalidArgument("model", "unknown preset parameter '" + k + "'");
    }
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

}  // namespace

// ---------------------------------------------------------------- InitialLaw

InitialLaw::InitialLaw() : law_(Product{}) {}

InitialLaw InitialLaw::product(XDistribution x, YDistribution y) {
    if (x.kind != XDistribution::Kind::point && !(x.b >= 0.0))
        throw InvalidArgument("model", "initial x-distribution needs a nonnegative spread");
    switch (y.kind) {
        case YDistribution::Kind::point:
            if (!(y.value >= 0.0 && y.value <= 1.0))
                throw InvalidArgument("model", "initial y must lie in [0,1]");
            break;
        case YDistribution::Kind::uniform:
            break;
        case YDistribution::Kind::discrete: {
            if (y.values.empty() || y.values.size() != y.weights.size())
                throw InvalidArgument("model", "discrete y law needs matching values and weights");
            double sum = 0.0;
            for (std::size_t i = 0; i < y.values.size(); ++i) {
                if (!(y.values[i] >= 0.0 && y.values[i] <= 1.0))
                    throw InvalidArgument("model", "initial y must lie in [0,1]");
                if (!(y.weights[i] >= 0.0))
                    throw InvalidArgument("model", "negative weight in discrete y law");
                sum += y.weights[i];
            }
            if (std::abs(sum - 1.0) > 1e-12)
                throw InvalidArgument("model", "discrete y weights sum to " + fmt(sum) + ", not 1");
            break;
        }
    }
    InitialLaw law;
    law.law_ = Product{x, std::move(y)};
    return law;
}

InitialLaw InitialLaw::atoms(std::vector<Atom> atoms) {
    if (atoms.empty()) throw InvalidArgument("model", "atom list is empty");
    double sum = 0.0;
    for (const auto& a : atoms) {
        if (!std::isfinite(a.x)) throw InvalidArgument("model", "atom x is not finite");
        if (!(a.y >= 0.0 && a.y <= 1.0)) throw InvalidArgument("model", "atom y must lie in [0,1]");
        if (!(a.w >= 0.0)) throw InvalidArgument("model", "negative atom weight");
        sum += a.w;
    }
    if (std::abs(sum - 1.0) > 1e-12)
        throw InvalidArgument("model", "atom weights sum to " + fmt(sum) + ", not 1");
    InitialLaw law;
    law.law_ = std::move(atoms);
    return law;
}

InitialLaw InitialLaw::point(double x, double y) {
    return product({XDistribution::Kind::point, x, 0.0}, {YDistribution::Kind::point, y, {}, {}});
}

namespace {

std::size_t select(double u, const std::vector<double>& weights) {
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
        acc += weights[i];
        if (u < acc) return i;
    }
    return weights.size() - 1;
}

}  // namespace

std::pair<double, double> InitialLaw::sample(const InitialVariates& v) const {
    if (const auto* list = std::get_if<std::vector<Atom>>(&law_)) {
        std::vector<double> w(list->size());
        for (std::size_t i = 0; i < w.size(); ++i) w[i] = (*list)[i].w;
        const Atom& a = (*list)[select(v.u_select, w)];
        return {a.x, a.y};
    }
    const auto& p = std::get<Product>(law_);
    double x = p.x.a;
    if (p.x.kind == XDistribution::Kind::normal) x = p.x.a + p.x.b * v.z_x;
    if (p.x.kind == XDistribution::Kind::lognormal) x = std::exp(p.x.a + p.x.b * v.z_x);
    double y = p.y.value;
    if (p.y.kind == YDistribution::Kind::uniform) y = v.u_y;
    if (p.y.kind == YDistribution::Kind::discrete) y = p.y.values[select(v.u_select, p.y.weights)];
    return {x, y};
}

double InitialLaw::mean_y() const {
    if (const auto* list = std::get_if<std::vector<Atom>>(&law_)) {
        double m = 0.0;
        for (const auto& a : *list) m += a.w * a.y;
        return m;
    }
    const auto& y = std::get<Product>(law_).y;
    switch (y.kind) {
        case YDistribution::Kind::point: return y.value;
        case YDistribution::Kind::uniform: return 0.5;
        case YDistribution::Kind::discrete:
            return std::inner_product(y.values.begin(), y.values.end(), y.weights.begin(), 0.0);
    }
    return 0.0;
}

// ----------------------------------------------------------------- ModelSpec

double ModelSpec::to_state(double x) const {
    return coordinate == Coordinate::log ? std::log(x) : x;
}

double ModelSpec::to_natural(double s) const {
    return coordinate == Coordinate::log ? std::exp(s) : s;
}

double ModelSpec::state_drift(double s, double m) const {
    const double x = to_natural(s);
    if (coordinate == Coordinate::linear) return drift(x, m);
    const double v = vol(x) / x;
    return drift(x, m) / x - 0.5 * v * v;
}

double ModelSpec::state_vol(double s) const {
    const double x = to_natural(s);
    return coordinate == Coordinate::log ? vol(x) / x : vol(x);
}

// ------------------------------------------------------------------- presets

double profit_derivative_mismatch(const ModelSpec& model, std::span<const double> x_nodes,
                                  std::span<const double> y_nodes) {
    double worst = 0.0;
    auto rel = [](double exact, double approx) {
        return std::abs(exact - approx) / std::max(std::abs(exact), 1e-12);
    };
    for (std::size_t i = 1; i + 1 < x_nodes.size(); ++i) {
        for (std::size_t j = 1; j + 1 < y_nodes.size(); ++j) {
            const double x = x_nodes[i], y = y_nodes[j];
            // Separate steps balance truncation against round-off per stencil.
            const double hx = 1e-4 * std::max(1.0, std::abs(x));
            const double h1 = 1e-5 * y, h2 = 1e-3 * y, hm = 1e-4 * y;
            const auto& f = model.profit;
            const double fy = (f(x, y + h1) - f(x, y - h1)) / (2 * h1);
            const double fyy = (f(x, y + h2) - 2 * f(x, y) + f(x, y - h2)) / (h2 * h2);
            const double fxy = (f(x + hx, y + hm) - f(x + hx, y - hm) - f(x - hx, y + hm) +
                                f(x - hx, y - hm)) /
                               (4 * hx * hm);
            worst = std::max(worst, rel(model.profit_dy(x, y), fy));
            worst = std::max(worst, rel(model.profit_dyy(x, y), fyy));
            worst = std::max(worst, rel(model.profit_dxy(x, y), fxy));
        }
    }
    return worst;
}

ModelSpec preset_model(std::string_view name, const PresetParams& params, InitialLaw law,
                       XDomain domain) {
    ModelSpec m;
    m.name = std::string(name);
    m.params = params;
    m.initial_law = std::move(law);
    m.x_domain = domain;
    m.discount_r = require(params, "r");
    m.cost_c0 = require(params, "c0");
    m.horizon_T = require(params, "T");
    if (m.discount_r < 0) throw InvalidArgument("model", "discount r must be nonnegative");
    if (!(m.cost_c0 > 0)) throw InvalidArgument("model", "cost c0 must be positive");
    if (!(m.horizon_T > 0)) throw InvalidArgument("model", "horizon T must be positive");
    if (!(domain.lo < domain.hi)) throw InvalidArgument("model", "x domain needs x_lo < x_hi");

    if (name == "ou_exp_cd") {
        check_known(params, {"r", "c0", "T", "alpha", "sigma", "beta"});
        const double alpha = require(params, "alpha");
        const double sigma = require(params, "sigma");
        const double beta = require(params, "beta");
        if (!(alpha > 0)) throw InvalidArgument("model", "ou_exp_cd needs alpha > 0");
        if (!(sigma > 0)) throw InvalidArgument("model", "ou_exp_cd needs sigma > 0");
        if (!(beta > 0 && beta < 1)) throw InvalidArgument("model", "beta must lie in (0,1)");
        m.drift = [alpha](double x, double mm) { return alpha * (mm - x); };
        m.vol = [sigma](double) { return sigma; };
        m.profit = [beta](double x, double y) { return std::exp(x) * std::pow(y, beta); };
        m.profit_dy = [beta](double x, double y) {
            return y <= 0 ? kInf : beta * std::exp(x) * std::pow(y, beta - 1);
        };
        m.profit_dyy = [beta](double x, double y) {
            return y <= 0 ? -kInf : beta * (beta - 1) * std::exp(x) * std::pow(y, beta - 2);
        };
        m.profit_dxy = [beta](double x, double y) {
            return y <= 0 ? kInf : beta * std::exp(x) * std::pow(y, beta - 1);
        };
        m.coordinate = Coordinate::linear;
        m.drift_x_bound = 0.0;  // d/dx a = -alpha
    } else if (name == "gbm_lin_cd") {
        check_known(params, {"r", "c0", "T", "alpha", "sigma", "beta"});
        const double alpha = require(params, "alpha");
        const double sigma = require(params, "sigma");
        const double beta = require(params, "beta");
        if (!(alpha > 0)) throw InvalidArgument("model", "gbm_lin_cd needs alpha > 0");
        if (!(sigma > 0)) throw InvalidArgument("model", "gbm_lin_cd needs sigma > 0");
        if (!(beta > 0 && beta < 1)) throw InvalidArgument("model", "beta must lie in (0,1)");
        if (!(m.discount_r * m.cost_c0 > beta))
            throw InvalidArgument("model", "gbm_lin_cd requires r*c0 > beta (got r*c0 = " +
                                               fmt(m.discount_r * m.cost_c0) + ", beta = " +
                                               fmt(beta) + ")");
        if (!(domain.lo > 0)) throw InvalidArgument("model", "gbm_lin_cd lives on x > 0");
        m.drift = [alpha](double x, double mm) { return alpha * mm * x; };
        m.vol = [sigma](double x) { return sigma * x; };
        m.profit = [beta](double x, double y) { return (1 + x) * std::pow(1 + y, beta); };
        m.profit_dy = [beta](double x, double y) { return beta * (1 + x) * std::pow(1 + y, beta - 1); };
        m.profit_dyy = [beta](double x, double y) {
            return beta * (beta - 1) * (1 + x) * std::pow(1 + y, beta - 2);
        };
        m.profit_dxy = [beta](double, double y) { return beta * std::pow(1 + y, beta - 1); };
        m.coordinate = Coordinate::log;
        m.drift_x_bound = alpha;  // d/dx a = alpha m <= alpha
    } else if (name == "goodwill_gbm") {
        check_known(params, {"r", "c0", "T", "mu", "sigma", "g_exponent"});
        const double mu = require(params, "mu");
        const double sigma = require(params, "sigma");
        const double p = require(params, "g_exponent");
        if (!(sigma > 0)) throw InvalidArgument("model", "goodwill_gbm needs sigma > 0");
        if (!(p > 0 && p < 1)) throw InvalidArgument("model", "g_exponent must lie in (0,1)");
        if (!(domain.lo > 0)) throw InvalidArgument("model", "goodwill_gbm lives on x > 0");
        m.drift = [mu](double x, double mm) { return (mu + mm) * x; };
        m.vol = [sigma](double x) { return sigma * x; };
        m.profit = [p](double x, double y) { return x * std::pow(1 + y, p); };
        m.profit_dy = [p](double x, double y) { return p * x * std::pow(1 + y, p - 1); };
        m.profit_dyy = [p](double x, double y) { return p * (p - 1) * x * std::pow(1 + y, p - 2); };
        m.profit_dxy = [p](double, double y) { return p * std::pow(1 + y, p - 1); };
        m.coordinate = Coordinate::log;
        m.drift_x_bound = mu + 1.0;
    } else {
        throw InvalidArgument("model", "unknown preset '" + std::string(name) + "'");
    }

    // Self-check of the closed-form derivatives on a coarse interior lattice.
    std::vector<double> xs, ys;
    for (int i = 0; i <= 10; ++i) {
        const double w = i / 10.0;
        xs.push_back(m.to_natural((1 - w) * m.to_state(domain.lo) + w * m.to_state(domain.hi)));
        ys.push_back(0.05 + 0.9 * w);
    }
    const double mismatch = profit_derivative_mismatch(m, xs, ys);
    if (mismatch > 1e-6)
        throw InvalidArgument("model", "profit derivatives disagree with finite differences (" +
                                           fmt(mismatch) + ")");
    return m;
}

ModelSpec decoupled(const ModelSpec& model, double m_fixed) {
    ModelSpec out = model;
    auto base = model.drift;
    out.drift = [base, m_fixed](double x, double) { return base(x, m_fixed); };
    out.name = model.name + "_decoupled";
    return out;
}

// ------------------------------------------------------------------ MeanFlow

MeanFlow::MeanFlow(std::vector<double> time_grid, std::vector<double> values)
    : time_grid_(std::move(time_grid)), values_(std::move(values)) {
    if (time_grid_.empty() || time_grid_.size() != values_.size())
        throw InvalidArgument("model", "mean flow needs one value per time node");
    for (std::size_t k = 1; k < time_grid_.size(); ++k)
        if (!(time_grid_[k] > time_grid_[k - 1]))
            throw InvalidArgument("model", "mean-flow time grid must be strictly increasing");
    for (double& v : values_) {
        if (!(v >= -1e-12 && v <= 1.0 + 1e-12))
            throw InvalidArgument("model", "mean-flow value " + fmt(v) + " outside [0,1]");
        v = std::clamp(v, 0.0, 1.0);
    }
    for (std::size_t k = 1; k < values_.size(); ++k)
        if (values_[k] < values_[k - 1]) monotone_ = false;
}

MeanFlow MeanFlow::constant(std::vector<double> time_grid, double value) {
    std::vector<double> v(time_grid.size(), value);
    return MeanFlow(std::move(time_grid), std::move(v));
}

double MeanFlow::operator()(double t) const {
    // Right-continuous step function: node k holds on [t_k, t_{k+1}).
    auto it = std::upper_bound(time_grid_.begin(), time_grid_.end(), t);
    if (it == time_grid_.begin()) return values_.front();
    return values_[static_cast<std::size_t>(it - time_grid_.begin()) - 1];
}

double MeanFlow::sup_distance(const MeanFlow& other) const {
    double d = 0.0;
    for (double t : time_grid_) d = std::max(d, std::abs((*this)(t) - other(t)));
    for (double t : other.time_grid_) d = std::max(d, std::abs((*this)(t) - other(t)));
    return d;
}

// --------------------------------------------------------------------- audit

bool AuditReport::all_passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const AuditCheck& c) { return c.passed; });
}

const AuditCheck& AuditReport::check(std::string_view name) const {
    for (const auto& c : checks)
        if (c.name == name) return c;
    throw InvalidArgument("model", "no audit check named '" + std::string(name) + "'");
}

namespace {

// Tracks the most adverse margin; a check passes iff every margin is
// positive (strict) or nonnegative (weak).
struct Tracker {
    AuditCheck c;
    bool strict;
    bool seen = false;

    Tracker(std::string name, bool strict_) : strict(strict_) { c.name = std::move(name); }

    void add(double margin, double x, double y) {
        if (!seen || margin < c.worst || std::isnan(margin)) {
            c.worst = margin;
            c.worst_x = x;
            c.worst_y = y;
            seen = true;
        }
        if (std::isnan(margin) || (strict ? !(margin > 0) : margin < 0)) c.passed = false;
    }
};

constexpr double kWeakSlack = 1e-12;

}  // namespace

AuditReport audit_assumptions(const ModelSpec& model, const Grid& grid) {
    const auto& xs = grid.x();
    const auto& ys = grid.y();
    const double rc0 = model.discount_r * model.cost_c0;

    Tracker vol_pos("volatility positive", true);
    Tracker f_nonneg("profit nonnegative", false);
    Tracker drift_m("drift monotone in m", false);
    Tracker f_x("profit nondecreasing in x", false);
    Tracker f_y("profit nondecreasing in y", false);
    Tracker fy_x("marginal profit nondecreasing in x", false);
    Tracker concave("profit strictly concave in y", true);
    Tracker cross("cross derivative positive", true);
    Tracker sandwich("marginal profit sandwich", true);

    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double x = xs[i];
        vol_pos.add(model.vol(x), x, 0.0);
        for (std::size_t j = 0; j < ys.size(); ++j) {
            const double y = ys[j];
            f_nonneg.add(model.profit(x, y), x, y);
            if (j + 1 < ys.size())
                drift_m.add(model.drift(x, ys[j + 1]) - model.drift(x, y) + kWeakSlack, x, y);
            if (j + 1 < ys.size())
                f_y.add(model.profit(x, ys[j + 1]) - model.profit(x, y) + kWeakSlack, x, y);
            if (i + 1 < xs.size())
                f_x.add(model.profit(xs[i + 1], y) - model.profit(x, y) + kWeakSlack, x, y);
            const bool interior_y = j > 0 && j + 1 < ys.size();
            if (!interior_y) continue;
            if (i + 1 < xs.size()) {
                const double a = model.profit_dy(x, y), b = model.profit_dy(xs[i + 1], y);
                fy_x.add(b - a + kWeakSlack * std::max(1.0, std::abs(a)), x, y);
            }
            concave.add(-model.profit_dyy(x, y), x, y);
            if (i > 0 && i + 1 < xs.size()) cross.add(model.profit_dxy(x, y), x, y);
        }
    }
    for (std::size_t j = 1; j + 1 < ys.size(); ++j) {
        const double y = ys[j];
        const double lo = rc0 - model.profit_dy(xs.front(), y);
        const double hi = model.profit_dy(xs.back(), y) - rc0;
        if (lo <= hi)
            sandwich.add(lo, xs.front(), y);
        else
            sandwich.add(hi, xs.back(), y);
    }

    AuditReport rep;
    for (Tracker* t : {&vol_pos, &f_nonneg, &drift_m, &f_x, &f_y, &fy_x, &concave, &cross, &sandwich})
        rep.checks.push_back(t->c);

    // Domain width in the computational coordinate against spread of X_T.
    double max_vol = 0.0;
    for (double s : grid.s()) max_vol = std::max(max_vol, model.state_vol(s));
    const double width = grid.s().back() - grid.s().front();
    const double sd = max_vol * std::sqrt(model.horizon_T);
    if (width < 4.0 * sd)
        rep.warnings.push_back("x-domain spans " + fmt(width) + " in the grid coordinate, less than 4 "
                               "standard deviations (" + fmt(4.0 * sd) + ")");
    return rep;
}

}  // namespace mfgce

#pragma once

#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace mfgce {

/// Coordinate in which the PDE grid is uniform and in which paths are
/// integrated. `log` means s = ln x (positive state spaces).
enum class Coordinate { linear, log };

struct XDomain {
    double lo = -4.0;
    double hi = 4.0;
};

struct XDistribution {
    enum class Kind { point, normal, lognormal };
    Kind kind = Kind::point;
    double a = 0.0;  // point value | mean | log-mean
    double b = 0.0;  // unused | sd | log-sd
};

struct YDistribution {
    enum class Kind { point, uniform, discrete };
    Kind kind = Kind::point;
    double value = 0.0;
    std::vector<double> values;
    std::vector<double> weights;
};

struct Atom {
    double x = 0.0;
    double y = 0.0;
    double w = 1.0;
};

/// Uniform/normal variates an initial-state draw consumes.
struct InitialVariates {
    double u_select = 0.5;  // atom / discrete-y selection
    double u_y = 0.5;       // uniform y
    double z_x = 0.0;       // normal / lognormal x
};

/// Law of (X_0, Y_{0-}). Either a product of named marginals or a finite
/// weighted atom list. Only finite-second-moment families can be built.
class InitialLaw {
public:
    InitialLaw();

    static InitialLaw product(XDistribution x, YDistribution y);
    static InitialLaw atoms(std::vector<Atom> atoms);
    static InitialLaw point(double x, double y);

    std::pair<double, double> sample(const InitialVariates& v) const;
    double mean_y() const;
    bool is_atomic() const { return std::holds_alternative<std::vector<Atom>>(law_); }

private:
    struct Product {
        XDistribution x;
        YDistribution y;
    };
    std::variant<Product, std::vector<Atom>> law_;
};

/// Problem datum. All functions take the natural state x; `coordinate`
/// only selects the computational coordinate.
struct ModelSpec {
    std::string name = "custom";
    std::function<double(double, double)> drift;  // a(x, m)
    std::function<double(double)> vol;            // sigma(x)
    std::function<double(double, double)> profit;       // f(x, y)
    std::function<double(double, double)> profit_dy;    // may be +inf at y = 0
    std::function<double(double, double)> profit_dyy;
    std::function<double(double, double)> profit_dxy;
    double discount_r = 0.0;
    double cost_c0 = 1.0;
    double horizon_T = 1.0;
    static constexpr double fuel_cap = 1.0;
    InitialLaw initial_law;
    XDomain x_domain;
    Coordinate coordinate = Coordinate::linear;
    /// Upper bound on d/dx a(x, m) (the constant used by the Lipschitz
    /// bounds); NaN when unknown.
    double drift_x_bound = 0.0;
    /// Preset parameters as given (empty for custom models).
    std::map<std::string, double> params;

    double to_state(double x) const;
    double to_natural(double s) const;
    /// Drift and volatility of the computational coordinate.
    double state_drift(double s, double m) const;
    double state_vol(double s) const;
};

using PresetParams = std::map<std::string, double>;

/// Builds one of the preset families:
///   ou_exp_cd    a = alpha (m - x), sigma const, f = e^x y^beta
///   gbm_lin_cd   a = alpha m x, sigma x, f = (1 + x)(1 + y)^beta
///   goodwill_gbm a = (mu + m) x, sigma x, f = x (1 + y)^g_exponent
/// Common keys: r, c0, T. Derivatives are checked against finite
/// differences of f at construction.
ModelSpec preset_model(std::string_view name, const PresetParams& params,
                       InitialLaw law, XDomain domain);

/// Replaces the drift by x -> a(x, m_fixed): the mean-field coupling is
/// switched off while everything else is kept.
ModelSpec decoupled(const ModelSpec& model, double m_fixed);

/// Largest relative mismatch between the analytic profit derivatives and
/// centred finite differences of f over the interior of the given nodes.
double profit_derivative_mismatch(const ModelSpec& model, std::span<const double> x_nodes,
                                  std::span<const double> y_nodes);

/// Piecewise-constant, right-continuous function of time with values in
/// [0, 1].
class MeanFlow {
public:
    MeanFlow() = default;
    MeanFlow(std::vector<double> time_grid, std::vector<double> values);

    static MeanFlow constant(std::vector<double> time_grid, double value);

    double operator()(double t) const;
    const std::vector<double>& time_grid() const { return time_grid_; }
    const std::vector<double>& values() const { return values_; }
    std::size_t size() const { return values_.size(); }
    bool monotone() const { return monotone_; }
    double sup_distance(const MeanFlow& other) const;

private:
    std::vector<double> time_grid_;
    std::vector<double> values_;
    bool monotone_ = true;
};

struct AuditCheck {
    std::string name;
    bool passed = true;
    double worst = 0.0;  // most adverse margin (negative when failing)
    double worst_x = 0.0;
    double worst_y = 0.0;
};

struct AuditReport {
    std::vector<AuditCheck> checks;
    std::vector<std::string> warnings;

    bool all_passed() const;
    const AuditCheck& check(std::string_view name) const;
};

class Grid;

/// Checks the standing monotonicity/concavity/sandwich assumptions on the
/// grid's x-nodes (natural coordinate) and y-nodes (also used as m-nodes).
AuditReport audit_assumptions(const ModelSpec& model, const Grid& grid);

}  // namespace mfgce

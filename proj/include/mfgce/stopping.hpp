#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mfgce/grid.hpp"
#include "mfgce/model.hpp"

namespace mfgce {

struct StoppingOptions {
    double omega = 1.5;
    double psor_tol = 1e-10;
    int max_iter = 10000;
    double tol_mono = 1e-8;
    double y_floor = 1e-3;
};

struct SolveStats {
    std::size_t nodes = 0;
    // Monotonicity violations seen before clamping (strictly positive ones).
    std::size_t violations_t = 0;
    std::size_t violations_x = 0;
    std::size_t violations_y = 0;
    double worst_violation = 0.0;
    int max_sweeps = 0;
    double worst_residual = 0.0;
    bool flow_monotone = true;

    std::size_t violations() const { return violations_t + violations_x + violations_y; }
};

/// u(t,x,y) on the grid; storage is t-major, then x, then y.
class ValueSurface {
public:
    ValueSurface() = default;
    ValueSurface(Grid grid, double c0, std::vector<double> values);

    const Grid& grid() const { return grid_; }
    double c0() const { return c0_; }
    const std::vector<double>& values() const { return u_; }
    double at(std::size_t n, std::size_t i, std::size_t j) const {
        return u_[(n * grid_.n_x() + i) * grid_.n_y() + j];
    }
    /// Linear in the grid coordinate and in y, at time node n.
    double interpolate(std::size_t n, double x, double y) const;

    SolveStats stats;

private:
    Grid grid_;
    double c0_ = 1.0;
    std::vector<double> u_;
};

/// c(t,x) on the (t,x) part of a grid; storage is t-major.
class Boundary {
public:
    Boundary() = default;
    Boundary(Grid grid, std::vector<double> values);

    const Grid& grid() const { return grid_; }
    const std::vector<double>& values() const { return c_; }
    double at(std::size_t n, std::size_t i) const { return c_[n * grid_.n_x() + i]; }
    /// Bilinear in (t, grid coordinate of x); clamped outside the grid.
    double value(double t, double x) const;
    double value_state(double t, double s) const;

private:
    Grid grid_;
    std::vector<double> c_;
};

ValueSurface solve_stopping(const ModelSpec& model, const MeanFlow& m_flow, const Grid& grid,
                            const StoppingOptions& opts = {});

/// Negative tol_active selects the default 1e-6 * c0.
Boundary extract_boundary(const ValueSurface& u, double tol_active = -1.0);

std::vector<std::uint8_t> continuation_mask(const ValueSurface& u, double tol_active = -1.0);

enum class SlopeCoordinate { natural, log };

struct LipschitzEstimate {
    double theta = 0.0;
    std::vector<double> per_t;  // max slope at each time node
};

LipschitzEstimate estimate_lipschitz_x(const Boundary& c, SlopeCoordinate coord);

}  // namespace mfgce

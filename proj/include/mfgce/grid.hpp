#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "mfgce/model.hpp"

namespace mfgce {

struct GridSize {
    int m_t = 64;
    int m_x = 64;
    int m_y = 32;
};

/// Tensor grid on [0,T] x [x_lo,x_hi] x [0,1]. The x-axis is uniform in the
/// model's computational coordinate (uniform in ln x for log models).
class Grid {
public:
    Grid() = default;

    /// Enforces m_t, m_x >= 16 and m_y >= 8.
    static Grid make(const ModelSpec& model, GridSize size);
    /// Same nodes without the size floor (audit grids, tests).
    static Grid make_unchecked(const ModelSpec& model, GridSize size);

    const std::vector<double>& t() const { return t_; }
    const std::vector<double>& s() const { return s_; }   // computational coordinate
    const std::vector<double>& x() const { return x_; }   // natural coordinate
    const std::vector<double>& y() const { return y_; }
    Coordinate coordinate() const { return coordinate_; }
    double to_s(double x) const { return coordinate_ == Coordinate::log ? std::log(x) : x; }

    std::size_t n_t() const { return t_.size(); }
    std::size_t n_x() const { return s_.size(); }
    std::size_t n_y() const { return y_.size(); }
    double dt() const { return dt_; }
    double ds() const { return ds_; }
    double dy() const { return dy_; }
    GridSize size() const { return {int(n_t()) - 1, int(n_x()) - 1, int(n_y()) - 1}; }

    /// Position of state s on the x-axis: index i and weight w so that
    /// s ~ (1-w) s_i + w s_{i+1}; clamps outside the domain.
    void locate_s(double s, std::size_t& i, double& w) const;
    void locate_t(double t, std::size_t& k, double& w) const;

private:
    std::vector<double> t_, s_, x_, y_;
    Coordinate coordinate_ = Coordinate::linear;
    double dt_ = 0.0, ds_ = 0.0, dy_ = 0.0;
};

/// n+1 equally spaced nodes on [lo, hi] with exact endpoints.
std::vector<double> uniform_nodes(double lo, double hi, int n);

}  // namespace mfgce

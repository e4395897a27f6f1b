#include "mfgce/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mfgce/error.hpp"

namespace mfgce {

std::vector<double> uniform_nodes(double lo, double hi, int n) {
    std::vector<double> out(static_cast<std::size_t>(n) + 1);
    const double h = (hi - lo) / n;
    for (int i = 0; i <= n; ++i) out[i] = lo + h * i;
    out.back() = hi;
    return out;
}

Grid Grid::make_unchecked(const ModelSpec& model, GridSize size) {
    if (size.m_t < 1 || size.m_x < 2 || size.m_y < 1)
        throw InvalidArgument("stopping", "grid needs m_t >= 1, m_x >= 2, m_y >= 1");
    if (!(model.x_domain.lo < model.x_domain.hi))
        throw InvalidArgument("stopping", "x_domain must satisfy x_lo < x_hi");
    if (model.coordinate == Coordinate::log && model.x_domain.lo <= 0.0)
        throw InvalidArgument("stopping", "log-coordinate models need x_lo > 0");

    Grid g;
    g.coordinate_ = model.coordinate;
    g.t_ = uniform_nodes(0.0, model.horizon_T, size.m_t);
    g.s_ = uniform_nodes(model.to_state(model.x_domain.lo), model.to_state(model.x_domain.hi),
                         size.m_x);
    g.x_.resize(g.s_.size());
    for (std::size_t i = 0; i < g.s_.size(); ++i) g.x_[i] = model.to_natural(g.s_[i]);
    g.x_.front() = model.x_domain.lo;
    g.x_.back() = model.x_domain.hi;
    g.y_ = uniform_nodes(0.0, 1.0, size.m_y);
    g.dt_ = model.horizon_T / size.m_t;
    g.ds_ = (g.s_.back() - g.s_.front()) / size.m_x;
    g.dy_ = 1.0 / size.m_y;
    return g;
}

Grid Grid::make(const ModelSpec& model, GridSize size) {
    if (size.m_t < 16 || size.m_x < 16 || size.m_y < 8)
        throw InvalidArgument("stopping", "grid invariant violated: need M_t >= 16, M_x >= 16, "
                                          "M_y >= 8 (got M_t=" + std::to_string(size.m_t) +
                                              ", M_x=" + std::to_string(size.m_x) +
                                              ", M_y=" + std::to_string(size.m_y) + ")");
    return make_unchecked(model, size);
}

namespace {

void locate_uniform(const std::vector<double>& nodes, double h, double v, std::size_t& i,
                    double& w) {
    const std::size_t last = nodes.size() - 1;
    if (v <= nodes.front()) {
        i = 0;
        w = 0.0;
        return;
    }
    if (v >= nodes.back()) {
        i = last - 1;
        w = 1.0;
        return;
    }
    const double pos = (v - nodes.front()) / h;
    i = std::min<std::size_t>(static_cast<std::size_t>(pos), last - 1);
    w = std::clamp(pos - static_cast<double>(i), 0.0, 1.0);
}

}  // namespace

void Grid::locate_s(double s, std::size_t& i, double& w) const {
    locate_uniform(s_, ds_, s, i, w);
}

void Grid::locate_t(double t, std::size_t& k, double& w) const {
    locate_uniform(t_, dt_, t, k, w);
}

}  // namespace mfgce

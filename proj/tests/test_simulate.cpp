#include <cmath>

#include "doctest.h"
#include "mfgce/error.hpp"
#include "mfgce/grid.hpp"
#include "mfgce/parallel.hpp"
#include "mfgce/rng.hpp"
#include "mfgce/simulate.hpp"

using namespace mfgce;

namespace {

ModelSpec ou() {
    return preset_model("ou_exp_cd", {{"alpha", 1}, {"sigma", 0.5}, {"beta", 0.5}, {"r", 0.5}, {"c0", 2}, {"T", 1}},
                        InitialLaw::point(0, 0), {-4, 4});
}

ModelSpec deterministic(std::function<double(double, double)> a, double x0) {
    ModelSpec m = ou();
    m.drift = std::move(a);
    m.vol = [](double) { return 0.0; };
    m.initial_law = InitialLaw::point(x0, 0.0);
    return m;
}

std::vector<double> nodes(int n, double T = 1.0) { return uniform_nodes(0.0, T, n); }

}  // namespace

TEST_CASE("Philox4x32-10 known-answer vectors") {
    using A = std::array<std::uint32_t, 4>;
    CHECK(philox4x32({0, 0, 0, 0}, {0, 0}) == A{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
          A{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
          A{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("keyed streams are addressable and distinct") {
    const KeyedStream a(42, Stream::brownian, 7), b(42, Stream::brownian, 7);
    const KeyedStream c(42, Stream::brownian, 8), d(42, Stream::initial_state, 7);
    CHECK(a.raw(3) == b.raw(3));
    CHECK(a.raw(3) != a.raw(4));
    CHECK(a.raw(3) != c.raw(3));
    CHECK(a.raw(3) != d.raw(3));
    for (std::uint64_t k = 0; k < 1000; ++k) {
        const auto u = a.uniforms(k);
        CHECK((u[0] > 0.0 && u[0] < 1.0 && u[1] > 0.0 && u[1] < 1.0));
    }
    double s = 0.0, ss = 0.0;
    const int n = 20000;
    for (int k = 0; k < n; ++k) {
        const auto z = a.normals(std::uint64_t(k));
        s += z[0] + z[1];
        ss += z[0] * z[0] + z[1] * z[1];
    }
    CHECK(std::abs(s / (2 * n)) < 4.0 / std::sqrt(2.0 * n));
    CHECK(std::abs(ss / (2 * n) - 1.0) < 0.03);
}

TEST_CASE("degenerate dynamics") {
    const auto t = nodes(16);
    SimConfig cfg;
    cfg.n_paths = 100;
    const ModelSpec still = deterministic([](double, double) { return 0.0; }, 1.0);
    const Ensemble e = simulate_x(still, MeanFlow::constant(t, 1.0), cfg, t);
    for (double x : e.x) CHECK(x == 1.0);

    const ModelSpec ramp = deterministic([](double, double m) { return m; }, 0.0);
    const Ensemble f = simulate_x(ramp, MeanFlow::constant(t, 1.0), cfg, t);
    for (std::size_t p = 0; p < f.n_paths; ++p) CHECK(f.path(p).back() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("OU ensemble mean at T") {
    const auto t = nodes(64);
    SimConfig cfg;
    cfg.n_paths = 10000;
    cfg.seed = 2024;
    cfg.substeps = 4;
    const Ensemble e = simulate_x(ou(), MeanFlow::constant(t, 1.0), cfg, t);
    double s = 0.0, ss = 0.0;
    for (std::size_t p = 0; p < e.n_paths; ++p) {
        const double x = e.path(p).back();
        s += x;
        ss += x * x;
    }
    const double n = double(e.n_paths), mean = s / n;
    const double se = std::sqrt((ss / n - mean * mean) / (n - 1));
    CHECK(std::abs(mean - (1.0 - std::exp(-1.0))) <= 3.0 * se);
}

TEST_CASE("comparison under ordered flows") {
    const auto t = nodes(32);
    SimConfig cfg;
    cfg.n_paths = 1000;
    cfg.seed = 5;
    const ModelSpec m = ou();
    const MeanFlow same = MeanFlow::constant(t, 0.5);
    const ComparisonReport eq = comparison_check(m, same, same, cfg, t);
    CHECK(eq.identical);
    CHECK(eq.worst == 0.0);

    const ModelSpec ramp = deterministic([](double, double mm) { return mm; }, 0.0);
    const Ensemble lo = simulate_x(ramp, MeanFlow::constant(t, 0.0), cfg, t);
    const Ensemble hi = simulate_x(ramp, MeanFlow::constant(t, 1.0), cfg, t);
    for (std::size_t k = 0; k < t.size(); ++k)
        CHECK(hi.path(0)[k] - lo.path(0)[k] == doctest::Approx(t[k]).epsilon(1e-12));

    const ComparisonReport ordered =
        comparison_check(m, MeanFlow::constant(t, 0.3), MeanFlow::constant(t, 0.9), cfg, t);
    CHECK(ordered.passed);
    CHECK_FALSE(ordered.identical);
}

TEST_CASE("ensembles do not depend on thread count or ensemble size") {
    const auto t = nodes(32);
    SimConfig cfg;
    cfg.n_paths = 400;
    cfg.seed = 99;
    const ModelSpec m = ou();
    const MeanFlow flow = MeanFlow::constant(t, 0.7);
    set_thread_cap(1);
    const Ensemble one = simulate_x(m, flow, cfg, t);
    set_thread_cap(8);
    const Ensemble eight = simulate_x(m, flow, cfg, t);
    set_thread_cap(0);
    CHECK(one.x == eight.x);
    cfg.n_paths = 50;
    const Ensemble small = simulate_x(m, flow, cfg, t);
    for (std::size_t p = 0; p < small.n_paths; ++p)
        for (std::size_t k = 0; k < t.size(); ++k) CHECK(small.path(p)[k] == one.path(p)[k]);
}

TEST_CASE("antithetic pairs mirror the noise") {
    const auto t = nodes(16);
    SimConfig cfg;
    cfg.n_paths = 10;
    cfg.antithetic = true;
    const ModelSpec m = deterministic([](double, double) { return 0.0; }, 0.0);
    ModelSpec bm = m;
    bm.vol = [](double) { return 1.0; };
    const Ensemble e = simulate_x(bm, MeanFlow::constant(t, 0.0), cfg, t);
    for (std::size_t p = 0; p < e.n_paths; p += 2)
        for (std::size_t k = 0; k < t.size(); ++k) CHECK(e.path(p)[k] == -e.path(p + 1)[k]);
}

TEST_CASE("log-coordinate models stay positive") {
    const ModelSpec gbm = preset_model(
        "gbm_lin_cd", {{"alpha", 1}, {"sigma", 0.8}, {"beta", 0.5}, {"r", 0.2}, {"c0", 5}, {"T", 1}},
        InitialLaw::point(1, 0), {0.1, 10});
    const auto t = nodes(16);
    SimConfig cfg;
    cfg.n_paths = 2000;
    const Ensemble e = simulate_x(gbm, MeanFlow::constant(t, 1.0), cfg, t);
    for (double x : e.x) CHECK(x > 0.0);
}

TEST_CASE("non-finite states abort with the path and step") {
    ModelSpec m = deterministic([](double x, double) { return 1e300 * (1.0 + x * x); }, 1.0);
    const auto t = nodes(16);
    SimConfig cfg;
    cfg.n_paths = 3;
    try {
        simulate_x(m, MeanFlow::constant(t, 0.0), cfg, t);
        FAIL("expected a SimulationError");
    } catch (const SimulationError& e) {
        CHECK(e.path() == 0);
        CHECK(e.step() >= 1);
    }
}

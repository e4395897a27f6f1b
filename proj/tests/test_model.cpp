#include <cmath>

#include "doctest.h"
#include "mfgce/error.hpp"
#include "mfgce/grid.hpp"
#include "mfgce/model.hpp"

using namespace mfgce;

namespace {

ModelSpec ou_literal() {
    return preset_model("ou_exp_cd", {{"alpha", 1}, {"sigma", 0.5}, {"beta", 0.5}, {"r", 0.1}, {"c0", 1}, {"T", 1}},
                        InitialLaw::point(0, 0), {-4, 4});
}

}  // namespace

TEST_CASE("ou_exp_cd marginal profit at (0, 0.25)") {
    const ModelSpec m = ou_literal();
    CHECK(m.profit_dy(0.0, 0.25) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(m.coordinate == Coordinate::linear);
    CHECK(m.drift(0.0, 1.0) == doctest::Approx(1.0));
}

TEST_CASE("gbm_lin_cd rejects r c0 <= beta") {
    CHECK_THROWS_AS(preset_model("gbm_lin_cd",
                                 {{"alpha", 1}, {"sigma", 0.3}, {"beta", 0.4}, {"r", 0.1}, {"c0", 1}, {"T", 1}},
                                 InitialLaw::point(1, 0), {0.1, 10}),
                    InvalidArgument);
}

TEST_CASE("goodwill_gbm profit evaluation") {
    const ModelSpec m = preset_model(
        "goodwill_gbm", {{"mu", 0.05}, {"sigma", 0.2}, {"g_exponent", 0.5}, {"r", 0.1}, {"c0", 1}, {"T", 1}},
        InitialLaw::point(0.2, 0), {0.02, 2});
    CHECK(m.profit(2.0, 1.0) == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-14));
    CHECK(m.coordinate == Coordinate::log);
}

TEST_CASE("preset argument validation") {
    const PresetParams base{{"alpha", 1}, {"sigma", 0.5}, {"beta", 0.5}, {"r", 0.1}, {"c0", 1}, {"T", 1}};
    auto with = [&](const char* k, double v) {
        PresetParams p = base;
        p[k] = v;
        return p;
    };
    const auto law = InitialLaw::point(0, 0);
    CHECK_THROWS_AS(preset_model("ou_exp_cd", with("beta", 1.0), law, {-4, 4}), InvalidArgument);
    CHECK_THROWS_AS(preset_model("ou_exp_cd", with("beta", 0.0), law, {-4, 4}), InvalidArgument);
    CHECK_THROWS_AS(preset_model("ou_exp_cd", with("sigma", 0.0), law, {-4, 4}), InvalidArgument);
    CHECK_THROWS_AS(preset_model("ou_exp_cd", with("gamma", 1.0), law, {-4, 4}), InvalidArgument);
    CHECK_THROWS_AS(preset_model("no_such_preset", base, law, {-4, 4}), InvalidArgument);
}

TEST_CASE("profit derivatives agree with finite differences") {
    const std::vector<ModelSpec> models{
        ou_literal(),
        preset_model("gbm_lin_cd", {{"alpha", 1}, {"sigma", 0.3}, {"beta", 0.5}, {"r", 0.2}, {"c0", 5}, {"T", 1}},
                     InitialLaw::point(1, 0), {0.1, 10}),
        preset_model("goodwill_gbm",
                     {{"mu", 0.05}, {"sigma", 0.2}, {"g_exponent", 0.5}, {"r", 0.1}, {"c0", 1}, {"T", 1}},
                     InitialLaw::point(0.2, 0), {0.02, 2}),
    };
    for (const auto& m : models) {
        const Grid g = Grid::make(m, {32, 32, 32});
        CHECK(profit_derivative_mismatch(m, g.x(), g.y()) < 1e-5);
    }
}

TEST_CASE("gbm_lin_cd cross derivative is dominated by the curvature") {
    const double beta = 0.5;
    const ModelSpec m = preset_model(
        "gbm_lin_cd", {{"alpha", 1}, {"sigma", 0.3}, {"beta", beta}, {"r", 0.2}, {"c0", 5}, {"T", 1}},
        InitialLaw::point(1, 0), {0.1, 10});
    const Grid g = Grid::make(m, {16, 64, 32});
    double worst = 0.0;
    for (double x : g.x())
        for (std::size_t j = 1; j < g.n_y(); ++j) {
            const double y = g.y()[j];
            worst = std::max(worst, std::abs(m.profit_dxy(x, y)) -
                                        2.0 / (1.0 - beta) * std::abs(m.profit_dyy(x, y)));
        }
    CHECK(worst <= 0.0);
}

TEST_CASE("audit passes on the OU instance") {
    const ModelSpec m = ou_literal();
    const Grid g = Grid::make_unchecked(m, {20, 100, 20});
    const AuditReport rep = audit_assumptions(m, g);
    for (const auto& c : rep.checks) {
        INFO(c.name);
        CHECK(c.passed);
    }
    CHECK(rep.all_passed());
}

TEST_CASE("audit flags a drift decreasing in m") {
    ModelSpec m = ou_literal();
    m.drift = [](double x, double mm) { return -mm * x; };
    m.x_domain = {1.0, 2.0};
    const Grid g = Grid::make_unchecked(m, {10, 20, 10});
    const AuditReport rep = audit_assumptions(m, g);
    CHECK_FALSE(rep.check("drift monotone in m").passed);
    CHECK_FALSE(rep.all_passed());
}

TEST_CASE("gbm_lin_cd sandwich check follows the closed-form inequality") {
    auto run = [](double beta, double x_hi) {
        const ModelSpec m = preset_model(
            "gbm_lin_cd", {{"alpha", 1}, {"sigma", 0.3}, {"beta", beta}, {"r", 1.0}, {"c0", 1.0}, {"T", 1}},
            InitialLaw::point(1, 0), {0.1, x_hi});
        const Grid g = Grid::make_unchecked(m, {10, 40, 20});
        bool expected = true;
        for (std::size_t j = 1; j + 1 < g.n_y(); ++j)
            if (!(beta * (1 + x_hi) > 1.0 * std::pow(1 + g.y()[j], 1 - beta))) expected = false;
        return std::pair{audit_assumptions(m, g).check("marginal profit sandwich").passed, expected};
    };
    for (auto [beta, x_hi] : {std::pair{0.5, 20.0}, std::pair{0.1, 5.0}, std::pair{0.5, 1.5}}) {
        const auto [got, expected] = run(beta, x_hi);
        CHECK(got == expected);
    }
    CHECK(run(0.5, 20.0).second);
    CHECK_FALSE(run(0.1, 5.0).second);
}

TEST_CASE("initial law validation and sampling") {
    CHECK_THROWS_AS(InitialLaw::atoms({{0, 0, 0.5}, {0, 1, 0.4}}), InvalidArgument);
    CHECK_THROWS_AS(InitialLaw::atoms({{0, 1.5, 1.0}}), InvalidArgument);
    const InitialLaw two = InitialLaw::atoms({{0, 0, 0.5}, {0, 1, 0.5}});
    CHECK(two.mean_y() == doctest::Approx(0.5));
    CHECK(two.sample({0.25, 0.5, 0.0}).second == 0.0);
    CHECK(two.sample({0.75, 0.5, 0.0}).second == 1.0);

    XDistribution xd;
    xd.kind = XDistribution::Kind::normal;
    xd.a = 1.0;
    xd.b = 2.0;
    YDistribution yd;
    yd.kind = YDistribution::Kind::uniform;
    const InitialLaw prod = InitialLaw::product(xd, yd);
    const auto s = prod.sample({0.5, 0.3, -0.5});
    CHECK(s.first == doctest::Approx(0.0));
    CHECK(s.second == doctest::Approx(0.3));
    CHECK(prod.mean_y() == doctest::Approx(0.5));
}

TEST_CASE("mean flow is right-continuous and clamped to [0,1]") {
    const std::vector<double> t{0.0, 0.5, 1.0};
    const MeanFlow m(t, {0.2, 0.6, 0.9});
    CHECK(m(0.0) == 0.2);
    CHECK(m(0.49) == 0.2);
    CHECK(m(0.5) == 0.6);
    CHECK(m(1.0) == 0.9);
    CHECK(m.monotone());
    CHECK_FALSE(MeanFlow(t, {0.5, 0.4, 0.9}).monotone());
    CHECK_THROWS_AS(MeanFlow(t, {0.5, 1.4, 0.9}), InvalidArgument);
    CHECK(m.sup_distance(MeanFlow::constant(t, 1.0)) == doctest::Approx(0.8));
}

TEST_CASE("decoupled freezes the mean-field argument") {
    const ModelSpec m = decoupled(ou_literal(), 0.5);
    CHECK(m.drift(0.0, 0.0) == doctest::Approx(0.5));
    CHECK(m.drift(0.0, 1.0) == doctest::Approx(0.5));
}

TEST_CASE("grid invariants") {
    const ModelSpec m = ou_literal();
    CHECK_THROWS_AS(Grid::make(m, {64, 64, 4}), InvalidArgument);
    CHECK_THROWS_AS(Grid::make(m, {8, 64, 32}), InvalidArgument);
    const Grid g = Grid::make(m, {16, 16, 8});
    CHECK(g.n_t() == 17);
    CHECK(g.x().front() == -4.0);
    CHECK(g.x().back() == 4.0);
    CHECK(g.y().back() == 1.0);
    std::size_t i;
    double w;
    g.locate_s(0.25, i, w);
    CHECK(i == 8);
    CHECK(w == doctest::Approx(0.5));
}

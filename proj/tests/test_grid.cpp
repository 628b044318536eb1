#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <memory>
#include <random>

#include "steinerps/grid.hpp"

using namespace steinerps;

namespace {

// Interval (-1,1) realized by hand: inside = cells with |x| < 1.
std::shared_ptr<DomainMask> interval_mask(const Grid& g, double r = 1.0) {
    auto m = std::make_shared<DomainMask>(g);
    for (std::int64_t c = 0; c < g.total_cells(); ++c) {
        const auto mi = g.to_multi(c);
        double x = g.axis_center(mi[0]);
        m->inside[static_cast<std::size_t>(c)] = std::abs(x) < r ? 1 : 0;
    }
    return m;
}

GridFunction tent(const std::shared_ptr<DomainMask>& m) {
    return GridFunction::sample(m, [](const std::vector<double>& x) {
        return std::max(0.0, 1.0 - std::abs(x[0]));
    });
}

}  // namespace

TEST_CASE("make_grid cell counts") {
    auto g1 = make_grid(1, 1.0, 0.5);
    CHECK(g1.cells_per_axis() == 5);
    CHECK(g1.axis_center(0) == -1.0);
    CHECK(g1.axis_center(g1.half_count()) == 0.0);

    auto g2 = make_grid(2, 2.0, 1.0);
    CHECK(g2.cells_per_axis() == 5);
    CHECK(g2.total_cells() == 25);

    auto g3 = make_grid(1, 1.0, 0.3);
    CHECK(g3.cells_per_axis() == 7);

    CHECK_THROWS_AS(make_grid(1, 1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(make_grid(1, 1.0, -0.1), std::invalid_argument);
    CHECK_THROWS_AS(make_grid(1, 0.1, 0.5), std::invalid_argument);
}

TEST_CASE("gradient_pnorm on zero and tent fields") {
    auto g = make_grid(1, 1.0, 1.0 / 50);
    auto m = interval_mask(g);
    auto z = GridFunction::zeros(m);
    CHECK(gradient_pnorm(z, 2.0) == 0.0);

    auto u = tent(m);
    // Continuum value of ∫ |u'|^p over (-1,1) is 2 for any p: |u'| = 1 a.e.
    CHECK(gradient_pnorm(u, 2.0) == Catch::Approx(2.0).margin(3.0 / 50));
    CHECK(gradient_pnorm(u, 3.0) == Catch::Approx(2.0).margin(3.0 / 50));
    CHECK_THROWS_AS(gradient_pnorm(u, 1.0), std::invalid_argument);
}

TEST_CASE("lq_norm basics") {
    auto g = make_grid(1, 1.0, 1.0 / 50);
    auto m = interval_mask(g);
    auto one = GridFunction::sample(m, [](const std::vector<double>&) { return 1.0; });
    CHECK(lq_norm(one, 2.0) == Catch::Approx(std::sqrt(2.0)).margin(2.0 / 50));
    CHECK(lq_norm(one, kInf) == 1.0);

    auto u = tent(m);
    CHECK(lq_norm(u, 2.0) == Catch::Approx(std::sqrt(2.0 / 3.0)).margin(2.0 / 50));
    CHECK_THROWS_AS(lq_norm(u, 0.5), std::invalid_argument);
}

TEST_CASE("weighted_pnorm basics") {
    auto g = make_grid(1, 1.0, 1.0 / 50);
    auto m = interval_mask(g);
    auto one = GridFunction::sample(m, [](const std::vector<double>&) { return 1.0; });
    auto u = tent(m);

    const double viaq = std::pow(lq_norm(u, 2.0), 2.0);
    CHECK(weighted_pnorm(u, 2.0, 0.0) == Catch::Approx(viaq).epsilon(1e-13));

    // ∫_{-1}^1 |x| dx = 1
    CHECK(weighted_pnorm(one, 2.0, 1.0) == Catch::Approx(1.0).margin(2.0 / 50));

    auto z = GridFunction::zeros(m);
    CHECK(weighted_pnorm(z, 2.0, 1.0) == 0.0);
    CHECK_THROWS_AS(weighted_pnorm(u, 0.5, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(weighted_pnorm(u, 2.0, -1.0), std::invalid_argument);
}

TEST_CASE("homogeneity is exact at machine precision") {
    auto g = make_grid(2, 1.0, 1.0 / 9);
    auto m = std::make_shared<DomainMask>(g);
    for (auto& v : m->inside) v = 1;
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    std::vector<double> vals(static_cast<std::size_t>(g.total_cells()));
    for (auto& v : vals) v = dist(rng);
    GridFunction u(m, vals);

    const double c = 3.25;  // exactly representable scale
    std::vector<double> scaled(vals);
    for (auto& v : scaled) v *= c;
    GridFunction cu(m, scaled);

    for (double p : {2.0, 2.5, 3.0}) {
        CHECK(gradient_pnorm(cu, p) == Catch::Approx(std::pow(c, p) * gradient_pnorm(u, p)).epsilon(1e-13));
    }
    for (double q : {1.0, 2.0, 4.0}) {
        CHECK(lq_norm(cu, q) == Catch::Approx(c * lq_norm(u, q)).epsilon(1e-13));
    }
}

TEST_CASE("refinement errors shrink on the tent") {
    const double grad_exact = 2.0;
    const double l2_exact = std::sqrt(2.0 / 3.0);
    double prev_grad_err = kInf, prev_l2_err = kInf;
    for (int mres : {25, 50, 100}) {
        auto g = make_grid(1, 1.0, 1.0 / mres);
        auto m = interval_mask(g);
        auto u = tent(m);
        const double ge = std::abs(gradient_pnorm(u, 2.0) - grad_exact);
        const double le = std::abs(lq_norm(u, 2.0) - l2_exact);
        CHECK(ge <= prev_grad_err + 1e-15);
        CHECK(le <= prev_l2_err + 1e-15);
        prev_grad_err = ge;
        prev_l2_err = le;
    }
}

TEST_CASE("lq_norm is componentwise monotone") {
    auto g = make_grid(1, 1.0, 0.1);
    auto m = interval_mask(g);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> a(static_cast<std::size_t>(g.total_cells()));
        std::vector<double> b(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            a[i] = dist(rng);
            b[i] = a[i] + dist(rng);
        }
        GridFunction ua(m, a), ub(m, b);
        for (double q : {1.0, 2.0, 3.5}) {
            CHECK(lq_norm(ua, q) <= lq_norm(ub, q) * (1.0 + 1e-13));
        }
    }
}

TEST_CASE("grid function enforces mask and sign") {
    auto g = make_grid(1, 1.0, 0.5);
    auto m = interval_mask(g);
    std::vector<double> vals(static_cast<std::size_t>(g.total_cells()), 1.0);
    GridFunction u(m, vals);
    // Cells at x = ±1 are outside (-1,1), so they must have been zeroed.
    CHECK(u[0] == 0.0);
    CHECK(u[g.total_cells() - 1] == 0.0);

    std::vector<double> neg(vals);
    neg[2] = -1.0;
    CHECK_THROWS_AS(GridFunction(m, neg), std::invalid_argument);
    CHECK_NOTHROW(GridFunction(m, neg, /*allow_signed=*/true));
}

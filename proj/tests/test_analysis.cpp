#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstring>
#include <random>

#include "steinerps/analysis.hpp"
#include "support/oracles.hpp"

using namespace steinerps;

namespace {

ProblemConfig slab16(double q = 4.0) {
    ProblemConfig cfg;
    cfg.dim = 2;
    cfg.p = 2.0;
    cfg.q = q;
    cfg.domain = DomainSpec::slab();
    cfg.half_extent = 16.0;
    cfg.spacing = 1.0 / 8;
    cfg.solver.tolerance = 1e-11;
    return cfg;
}

}  // namespace

TEST_CASE("subadditivity: documented pairs") {
    auto [l1, r1] = subadditivity_check(0.5, 4.0, 1.0);
    CHECK(l1 == Catch::Approx(std::sqrt(5.0)).epsilon(1e-12));
    CHECK(r1 == Catch::Approx(3.0 - 0.5 / std::pow(2.0, 1.5)).epsilon(1e-12));
    CHECK(l1 <= r1);

    // B -> 0: both sides collapse to A^alpha.
    auto [l2, r2] = subadditivity_check(0.5, 4.0, 1e-14);
    CHECK(l2 == Catch::Approx(2.0).epsilon(1e-6));
    CHECK(r2 == Catch::Approx(2.0).epsilon(1e-6));

    auto [l3, r3] = subadditivity_check(0.9, 1.0, 1.0);
    CHECK(l3 == Catch::Approx(std::pow(2.0, 0.9)).epsilon(1e-12));
    CHECK(r3 == Catch::Approx(2.0 - 0.1 / std::pow(2.0, 1.9)).epsilon(1e-12));

    CHECK_THROWS_AS(subadditivity_check(1.0, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(subadditivity_check(0.5, -1.0, 1.0), std::invalid_argument);
}

TEST_CASE("subadditivity: no violations over random triples") {
    std::mt19937_64 rng(4242);
    std::uniform_real_distribution<double> ua(1e-6, 1.0 - 1e-6);
    std::uniform_real_distribution<double> ulog(-8.0, 8.0);
    int violations = 0;
    for (int i = 0; i < 10000; ++i) {
        const double alpha = ua(rng);
        const double A = std::exp(ulog(rng));
        const double B = std::exp(ulog(rng));
        auto [lhs, rhs] = subadditivity_check(alpha, A, B);
        if (lhs > rhs * (1.0 + 1e-12)) ++violations;
    }
    CHECK(violations == 0);
}

TEST_CASE("gns interpolation ratio") {
    Grid g(2, 2.0, 1.0 / 32);
    auto m = std::make_shared<DomainMask>(g);
    std::fill(m->inside.begin(), m->inside.end(), 1);
    auto psi = GridFunction::sample(m, [](const std::vector<double>& x) {
        return std::exp(-4.0 * (x[0] * x[0] + x[1] * x[1]));
    });

    auto [ratio, theta] = gns_check(psi, 2.0, 4.0);
    CHECK(theta == Catch::Approx(0.5).epsilon(1e-14));
    CHECK(ratio > 0.0);

    auto [r_pp, t_pp] = gns_check(psi, 2.0, 2.0);
    CHECK(t_pp == 0.0);
    CHECK(r_pp == Catch::Approx(1.0).epsilon(1e-12));

    CHECK_THROWS_AS(gns_check(GridFunction::zeros(m), 2.0, 4.0), std::invalid_argument);
    CHECK_THROWS_AS(gns_check(psi, 1.5, 7.0), std::invalid_argument);  // above p* = 6
}

TEST_CASE("gns ratio is scale invariant on a 1-D scaling family") {
    // psi_s(x) = psi(s x) on a wide box; the ratio must not move.
    std::vector<double> ratios;
    for (double s : {1.0, 2.0, 4.0}) {
        Grid g(1, 8.0, 1.0 / 64);
        auto m = std::make_shared<DomainMask>(g);
        std::fill(m->inside.begin(), m->inside.end(), 1);
        auto psi = GridFunction::sample(m, [s](const std::vector<double>& x) {
            return std::max(0.0, 1.0 - std::abs(s * x[0]));
        });
        auto [ratio, theta] = gns_check(psi, 2.0, 4.0);
        CHECK(theta == Catch::Approx(0.25).epsilon(1e-14));
        ratios.push_back(ratio);
    }
    CHECK(ratios[1] == Catch::Approx(ratios[0]).epsilon(0.02));
    CHECK(ratios[2] == Catch::Approx(ratios[0]).epsilon(0.02));
}

TEST_CASE("equivalence band on the interval scaling family") {
    // Exponent 1 - N/p + N/q = 3/4 at N=1, p=2, q=4; a pure scaling family
    // keeps the ratio fixed.
    std::vector<EquivalenceInstance> inst;
    for (double r : {0.5, 1.0, 2.0}) {
        ProblemConfig cfg;
        cfg.dim = 1;
        cfg.p = 2.0;
        cfg.q = 4.0;
        cfg.domain = DomainSpec::ball(r);
        cfg.half_extent = r;
        cfg.spacing = r / 200.0;  // scaled grids: discretization errors cancel
        auto le = solve_extremal(cfg);
        inst.push_back({le.lambda_est, lambda_p_eigensolve(cfg), "interval"});
    }
    auto [lo, hi] = equivalence_band(inst, 1, 2.0, 4.0);
    CHECK(hi / lo < 1.02);

    // Mixed family: finite positive band.
    ProblemConfig ball;
    ball.dim = 1;
    ball.p = 2.0;
    ball.q = 4.0;
    ball.domain = DomainSpec::ball(1.5);
    ball.half_extent = 1.5;
    ball.spacing = 1.0 / 200;
    auto b = solve_extremal(ball);
    inst.push_back({b.lambda_est, lambda_p_eigensolve(ball), "interval-1.5"});
    auto [lo2, hi2] = equivalence_band(inst, 1, 2.0, 4.0);
    CHECK(lo2 > 0.0);
    CHECK(std::isfinite(hi2));

    CHECK_THROWS_AS(equivalence_band({inst[0], inst[1]}, 1, 2.0, 4.0), std::invalid_argument);
}

TEST_CASE("inradius lower-bound product") {
    // N=2, p=2, q=4: exponent p - N + Np/q = 1.
    const double h = 1.0 / 16;
    Grid g(2, 2.5, h);
    ProblemConfig cfg;
    cfg.dim = 2;
    cfg.p = 2.0;
    cfg.q = 4.0;
    cfg.spacing = h;
    cfg.half_extent = 2.5;

    std::vector<double> products;
    for (const char* name : {"slab", "cross"}) {
        ProblemConfig sub = cfg;
        sub.domain = domain_gallery().at(name);
        auto r = solve_extremal(sub);
        const double rin = inradius(r.u->mask());
        const double prod = inradius_bound_check(r.lambda_est, rin, 2, 2.0, 4.0);
        CHECK(prod > 0.0);
        products.push_back(prod);
    }
    CHECK(products[0] / products[1] < 10.0);
    CHECK(products[1] / products[0] < 10.0);

    // Scaling family of balls: the product is r-independent.
    std::vector<double> ball_products;
    for (double r : {1.0, 2.0}) {
        ProblemConfig sub = cfg;
        sub.domain = DomainSpec::ball(r);
        sub.half_extent = r;
        sub.spacing = r / 32.0;
        auto res = solve_extremal(sub);
        ball_products.push_back(inradius_bound_check(res.lambda_est, r, 2, 2.0, 4.0));
    }
    CHECK(ball_products[1] == Catch::Approx(ball_products[0]).epsilon(0.02));

    CHECK_THROWS_AS(inradius_bound_check(1.0, kInf, 2, 2.0, 4.0), std::invalid_argument);
}

TEST_CASE("ball scaling law") {
    auto [pred1, meas1] = scaling_check(2.0, 2.0, 1, 2.0, 1.0 / 200);
    CHECK(pred1 == Catch::Approx(0.25).epsilon(1e-14));
    CHECK(meas1 == Catch::Approx(pred1).epsilon(0.02));

    auto [pred2, meas2] = scaling_check(2.0, 4.0, 2, 2.0, 1.0 / 32);
    CHECK(pred2 == Catch::Approx(0.5).epsilon(1e-14));
    CHECK(meas2 == Catch::Approx(pred2).epsilon(0.02));

    auto [pred3, meas3] = scaling_check(2.0, 4.0, 2, 1.0, 1.0 / 32);
    CHECK(pred3 == 1.0);
    CHECK(meas3 == 1.0);
}

TEST_CASE("decay constants: formulas, limits, determinism") {
    const double lam_p = M_PI * M_PI / 4.0;
    auto c = decay_constants(2.0, 4.0, lam_p, 5.1028410140);
    CHECK(c.c7 == Catch::Approx(96.0).epsilon(1e-14));
    CHECK(c.K == Catch::Approx(1.0 + 192.0 / lam_p).epsilon(1e-14));
    CHECK(c.K == Catch::Approx(78.8147).epsilon(1e-4));
    CHECK(c.a == Catch::Approx(0.00315).epsilon(0.01));
    CHECK(c.eps_threshold == Catch::Approx(std::sqrt(lam_p / (192.0 * 5.1028410140))).epsilon(1e-12));

    auto c2 = decay_constants(2.0, 4.0, lam_p, 5.1028410140);
    CHECK(std::memcmp(&c.c7, &c2.c7, sizeof(double)) == 0);
    CHECK(std::memcmp(&c.K, &c2.K, sizeof(double)) == 0);
    CHECK(std::memcmp(&c.a, &c2.a, sizeof(double)) == 0);

    auto c3 = decay_constants(2.0, 3.0, lam_p, 1.0);
    CHECK(c3.c7 == Catch::Approx(64.0).epsilon(1e-14));

    // lambda_p -> infinity: K -> 1 and a -> (log 2)/q.
    auto cl = decay_constants(2.0, 4.0, 1e12, 1.0);
    CHECK(cl.K == Catch::Approx(1.0).epsilon(1e-9));
    CHECK(cl.a == Catch::Approx(std::log(2.0) / 4.0).epsilon(1e-6));

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> up(1.1, 4.0), dq(0.1, 6.0), ul(0.01, 100.0);
    for (int i = 0; i < 500; ++i) {
        const double p = up(rng), q = p + dq(rng);
        auto cc = decay_constants(p, q, ul(rng), ul(rng));
        CHECK(cc.c7 > 0.0);
        CHECK(cc.K > 1.0);
        CHECK(cc.a > 0.0);
    }
    CHECK_THROWS_AS(decay_constants(2.0, 2.0, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("tail report on the slab extremal") {
    auto cfg = slab16();
    auto r = solve_extremal(cfg);
    auto con = decay_constants(2.0, 4.0, M_PI * M_PI / 4.0, r.lambda_est);
    auto rep = tail_report(*r.u, cfg, con);

    CHECK(rep.recursion_pass);
    CHECK(rep.constants.r0 >= 0.0);
    for (std::size_t i = 1; i < rep.tail_mass.size(); ++i)
        CHECK(rep.tail_mass[i].second <= rep.tail_mass[i - 1].second + 1e-300);
    for (std::size_t i = 1; i < rep.tail_sup.size(); ++i)
        CHECK(rep.tail_sup[i].second <= rep.tail_sup[i - 1].second + 1e-300);

    // Axis 1 is the tube: the fitted rate dwarfs the certified a.
    CHECK(rep.axis_rates[0] > con.a);
    CHECK(rep.axis_rates[0] == Catch::Approx(M_PI / 2.0).epsilon(0.05));
    CHECK_FALSE(std::isfinite(rep.axis_rates[1]));  // bounded direction: no window

    // The localized sup/Lq ratio stays within a modest band.
    REQUIRE(rep.localized_sup_ratio.size() >= 4);
    double mx = 0.0;
    for (auto& [rho, ratio] : rep.localized_sup_ratio) mx = std::max(mx, ratio);
    CHECK(mx < 10.0);
}

TEST_CASE("tail report trivial on a bounded domain and guarded when unresolved") {
    ProblemConfig ball;
    ball.dim = 2;
    ball.p = 2.0;
    ball.q = 4.0;
    ball.domain = DomainSpec::ball(1.0);
    ball.half_extent = 4.0;
    ball.spacing = 1.0 / 16;
    auto rb = solve_extremal(ball);
    auto con = decay_constants(2.0, 4.0, lambda_p_eigensolve(ball), rb.lambda_est);
    auto rep = tail_report(*rb.u, ball, con);
    CHECK(rep.recursion_pass);
    CHECK(rep.tail_mass[2].second == 0.0);  // nothing outside B_{r_Omega}

    auto small = slab16();
    small.half_extent = 3.0;
    auto rs = solve_extremal(small);
    auto con2 = decay_constants(2.0, 4.0, M_PI * M_PI / 4.0, rs.lambda_est);
    CHECK_THROWS_AS(tail_report(*rs.u, small, con2), std::runtime_error);
}

TEST_CASE("directional profiles: slab, funnel, cross") {
    {
        auto cfg = slab16();
        auto r = solve_extremal(cfg);
        auto prof = classify_infinity(cfg.domain, 2, cfg.spacing, {8.0, 16.0});
        auto v = directional_profile_check(*r.u, prof, cfg);
        REQUIRE(v.size() == 2);
        CHECK(v[0].tag == AxisBehavior::tubular);
        CHECK(v[0].pass);
        CHECK(v[0].metric > 0.0);
        CHECK(v[1].tag == AxisBehavior::bounded);
        CHECK(v[1].pass);
    }
    {
        ProblemConfig cfg;
        cfg.dim = 2;
        cfg.p = 2.0;
        cfg.q = 4.0;
        cfg.domain = DomainSpec::custom([](const std::vector<double>& x) {
            return std::abs(x[1]) < 1.0 / (1.0 + std::abs(x[0]));
        });
        cfg.half_extent = 12.0;
        cfg.spacing = 1.0 / 8;
        auto r = solve_extremal(cfg);
        auto prof = classify_infinity(cfg.domain, 2, cfg.spacing, {6.0, 12.0});
        auto v = directional_profile_check(*r.u, prof, cfg);
        CHECK(v[0].tag == AxisBehavior::shrinking);
        CHECK(v[0].pass);
        CHECK(v[1].tag == AxisBehavior::bounded);
        CHECK(v[1].pass);
    }
    {
        ProblemConfig cfg;
        cfg.dim = 2;
        cfg.p = 2.0;
        cfg.q = 4.0;
        cfg.domain = DomainSpec::cross();
        cfg.half_extent = 12.0;
        cfg.spacing = 1.0 / 8;
        auto r = solve_extremal(cfg);
        auto prof = classify_infinity(cfg.domain, 2, cfg.spacing, {6.0, 12.0});
        auto v = directional_profile_check(*r.u, prof, cfg);
        CHECK(v[0].tag == AxisBehavior::tubular);
        CHECK(v[1].tag == AxisBehavior::tubular);
        CHECK(v[0].pass);
        CHECK(v[1].pass);
        CHECK(v[0].metric > 0.0);
        CHECK(v[1].metric > 0.0);
    }
}

TEST_CASE("r0 is stable across nearby exponents at fixed domain") {
    // Geometry-driven uniformity: for close q the measured start-of-decay
    // radius on the cross does not move. (Across widely spaced q the
    // threshold eps(q) itself shifts by orders of magnitude.)
    double lo = kInf, hi = -kInf;
    for (double q : {4.0, 4.25, 4.5}) {
        ProblemConfig cfg;
        cfg.dim = 2;
        cfg.p = 2.0;
        cfg.q = q;
        cfg.domain = DomainSpec::cross();
        cfg.half_extent = 12.0;
        cfg.spacing = 1.0 / 8;
        auto r = solve_extremal(cfg);
        auto con = decay_constants(2.0, q, lambda_p_eigensolve(cfg), r.lambda_est);
        auto rep = tail_report(*r.u, cfg, con);
        lo = std::min(lo, rep.constants.r0);
        hi = std::max(hi, rep.constants.r0);
    }
    CHECK(hi - lo < 1.0);
}

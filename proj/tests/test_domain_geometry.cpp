#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "steinerps/domain.hpp"
#include "steinerps/geometry.hpp"

using namespace steinerps;

namespace {

// Brute-force oracle: nearest outside cell center (ghost ring included),
// in grid units of h. Quadratic cost, so keep grids modest.
double brute_inradius(const DomainMask& mask) {
    const Grid& g = mask.grid;
    const int n = g.cells_per_axis();
    std::vector<std::vector<int>> outside;
    for (std::int64_t c = 0; c < g.total_cells(); ++c)
        if (!mask.is_inside(c)) outside.push_back(g.to_multi(c));
    double best = 0.0;
    for (std::int64_t c = 0; c < g.total_cells(); ++c) {
        if (!mask.is_inside(c)) continue;
        const auto mi = g.to_multi(c);
        double d2min = kInf;
        for (const auto& mj : outside) {
            double d2 = 0.0;
            for (int d = 0; d < g.dim(); ++d) {
                const double dd = double(mi[d] - mj[d]);
                d2 += dd * dd;
            }
            d2min = std::min(d2min, d2);
        }
        for (int d = 0; d < g.dim(); ++d) {
            const double ring = double(std::min(mi[d] + 1, n - mi[d]));
            d2min = std::min(d2min, ring * ring);
        }
        best = std::max(best, d2min);
    }
    return std::sqrt(best) * g.spacing();
}

}  // namespace

TEST_CASE("realize_domain membership") {
    Grid g(2, 4.0, 0.25);
    auto slab = realize_domain(DomainSpec::slab(), g);
    for (std::int64_t c = 0; c < g.total_cells(); ++c) {
        const auto x = g.center(g.to_multi(c));
        CHECK(slab->is_inside(c) == (std::abs(x[1]) < 1.0));
    }

    auto cross = realize_domain(DomainSpec::cross(), g);
    auto idx_of = [&](double x, double y) {
        std::vector<int> mi = {static_cast<int>(std::lround(x / 0.25)) + g.half_count(),
                               static_cast<int>(std::lround(y / 0.25)) + g.half_count()};
        return g.to_flat(mi);
    };
    CHECK(cross->is_inside(idx_of(2.0, 0.5)));
    CHECK_FALSE(cross->is_inside(idx_of(2.0, 1.5)));

    auto half = realize_domain(DomainSpec::half_slab(), g);
    CHECK_FALSE(half->is_inside(idx_of(-0.5, 0.0)));
    CHECK(half->is_inside(idx_of(0.5, 0.0)));

    // A ball that misses every cell center cannot be realized.
    Grid coarse(2, 2.0, 1.0);
    auto off = DomainSpec::custom([](const std::vector<double>& x) {
        return std::abs(x[0] - 0.5) < 0.2 && std::abs(x[1] - 0.5) < 0.2;
    });
    CHECK_THROWS_AS(realize_domain(off, coarse), std::runtime_error);
}

TEST_CASE("validate_steiner verdicts on the gallery") {
    Grid g(2, 4.0, 0.125);

    auto slab = validate_steiner(*realize_domain(DomainSpec::slab(), g));
    CHECK(slab->steiner == SteinerStatus::validated);

    auto half = validate_steiner(*realize_domain(DomainSpec::half_slab(), g));
    REQUIRE(half->steiner == SteinerStatus::violated);
    CHECK(half->violation->axis == 0);
    CHECK(half->violation->property == "S1");

    auto pm = validate_steiner(*realize_domain(DomainSpec::pinched(false), g));
    REQUIRE(pm->steiner == SteinerStatus::violated);
    CHECK(pm->violation->axis == 0);
    CHECK(pm->violation->property == "S2");

    auto pp = validate_steiner(*realize_domain(DomainSpec::pinched(true), g));
    CHECK(pp->steiner == SteinerStatus::validated);

    auto stair = validate_steiner(*realize_domain(DomainSpec::staircase(), g));
    CHECK(stair->steiner == SteinerStatus::validated);

    auto cross = validate_steiner(*realize_domain(DomainSpec::cross(), g));
    CHECK(cross->steiner == SteinerStatus::validated);
}

TEST_CASE("inradius of gallery sets") {
    const double h = 1.0 / 16;
    Grid g(2, 2.5, h);

    auto slab = realize_domain(DomainSpec::slab(), g);
    CHECK(inradius(*slab) == Catch::Approx(1.0).margin(h + 1e-12));

    auto cross = realize_domain(DomainSpec::cross(), g);
    const double rc = inradius(*cross);
    CHECK(rc == Catch::Approx(std::sqrt(2.0)).margin(h + 1e-12));
    CHECK(rc == Catch::Approx(brute_inradius(*cross)).epsilon(1e-12));

    auto ball = realize_domain(DomainSpec::ball(0.7), g);
    CHECK(inradius(*ball) == Catch::Approx(0.7).margin(h + 1e-12));
    CHECK(inradius(*ball) == Catch::Approx(brute_inradius(*ball)).epsilon(1e-12));
}

TEST_CASE("inradius achieved at the origin for Steiner masks") {
    const double h = 1.0 / 16;
    Grid g(2, 2.5, h);
    for (const char* name : {"slab", "cross", "ball", "pinched_plus", "staircase"}) {
        auto mask = validate_steiner(*realize_domain(domain_gallery().at(name), g));
        REQUIRE(mask->steiner == SteinerStatus::validated);
        const auto res = inradius_with_center(*mask);
        double norm = 0.0;
        for (int d = 0; d < g.dim(); ++d) {
            const double x = g.axis_center(res.center[d]);
            norm += x * x;
        }
        INFO(name);
        CHECK(std::sqrt(norm) <= h + 1e-12);
    }
}

TEST_CASE("section_inradius examples") {
    const double h = 1.0 / 16;
    Grid g(2, 4.0, h);

    auto slab = realize_domain(DomainSpec::slab(), g);
    CHECK(section_inradius(*slab, 0, 3.0) == Catch::Approx(1.0).margin(h + 1e-12));

    auto cross = realize_domain(DomainSpec::cross(), g);
    CHECK(section_inradius(*cross, 0, 2.0) == Catch::Approx(1.0).margin(h + 1e-12));

    auto ball = realize_domain(DomainSpec::ball(1.0), g);
    CHECK(section_inradius(*ball, 0, 0.6) == Catch::Approx(0.8).margin(h + 1e-12));
    CHECK(section_inradius(*ball, 0, 2.0) == 0.0);

    CHECK_THROWS_AS(section_inradius(*ball, 5, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(section_inradius(*ball, 0, 10.0), std::invalid_argument);
}

TEST_CASE("section_inradius is even and nonincreasing on Steiner masks") {
    const double h = 1.0 / 16;
    Grid g(2, 4.0, h);
    for (const char* name : {"slab", "cross", "ball", "staircase", "pinched_plus"}) {
        auto mask = validate_steiner(*realize_domain(domain_gallery().at(name), g));
        REQUIRE(mask->steiner == SteinerStatus::validated);
        for (int axis = 0; axis < 2; ++axis) {
            double prev = kInf;
            for (double t = 0.0; t <= 3.5; t += 0.5) {
                const double r = section_inradius(*mask, axis, t);
                const double rm = section_inradius(*mask, axis, -t);
                INFO(name << " axis " << axis << " t " << t);
                CHECK(r == rm);
                CHECK(r <= prev + 1e-12);
                prev = r;
            }
        }
    }
}

TEST_CASE("classify_infinity tags") {
    const double h = 1.0 / 8;
    const std::vector<double> boxes = {4.0, 8.0};

    auto slab = classify_infinity(DomainSpec::slab(), 2, h, boxes);
    CHECK(slab.axes[0].tag == AxisBehavior::tubular);
    CHECK(slab.axes[0].tube_radius == Catch::Approx(1.0).margin(h + 1e-12));
    CHECK(slab.axes[1].tag == AxisBehavior::bounded);
    CHECK(slab.axes[1].bound_t == Catch::Approx(1.0).margin(1e-12));

    auto cross = classify_infinity(DomainSpec::cross(), 2, h, boxes);
    CHECK(cross.axes[0].tag == AxisBehavior::tubular);
    CHECK(cross.axes[1].tag == AxisBehavior::tubular);
    CHECK(cross.axes[0].tube_radius == Catch::Approx(1.0).margin(h + 1e-12));

    auto ball = classify_infinity(DomainSpec::ball(1.0), 2, h, boxes);
    CHECK(ball.axes[0].tag == AxisBehavior::bounded);
    CHECK(ball.axes[1].tag == AxisBehavior::bounded);

    auto funnel = DomainSpec::custom([](const std::vector<double>& x) {
        return std::abs(x[1]) < 1.0 / (1.0 + std::abs(x[0]));
    });
    auto fp = classify_infinity(funnel, 2, h, {8.0, 16.0});
    CHECK(fp.axes[0].tag == AxisBehavior::shrinking);
    CHECK(fp.axes[1].tag == AxisBehavior::bounded);

    auto stair = classify_infinity(DomainSpec::staircase(), 2, h, {8.0, 16.0});
    CHECK(stair.axes[0].tag == AxisBehavior::shrinking);
    CHECK(stair.axes[1].tag == AxisBehavior::bounded);

    // Oscillating widths have non-monotone sections: report, do not guess.
    auto wobble = DomainSpec::custom([](const std::vector<double>& x) {
        return std::abs(x[1]) < 1.5 + std::sin(x[0]);
    });
    auto wp = classify_infinity(wobble, 2, h, boxes);
    CHECK(wp.axes[0].tag == AxisBehavior::inconclusive);
}

TEST_CASE("measure_density at documented boundary points") {
    const double h = 1.0 / 32;
    Grid g(2, 3.0, h);

    auto cross = realize_domain(DomainSpec::cross(), g);
    const double dc = measure_density(*cross, {1.0, 1.0}, 0.5);
    CHECK(dc == Catch::Approx(0.25).margin(3.0 * h / 0.5));

    auto slab = realize_domain(DomainSpec::slab(), g);
    const double ds = measure_density(*slab, {0.0, 1.0}, 0.5);
    CHECK(ds == Catch::Approx(0.5).margin(3.0 * h / 0.5));

    CHECK_THROWS_AS(measure_density(*slab, {0.0, 0.0}, 0.5), std::invalid_argument);  // interior
    CHECK_THROWS_AS(measure_density(*slab, {0.0, 2.5}, 0.5), std::invalid_argument);  // far outside
    CHECK_THROWS_AS(measure_density(*slab, {0.0, 1.0}, h), std::invalid_argument);    // r too small
}

TEST_CASE("measure density floor (1/2)^N on Steiner boundaries") {
    const double h = 1.0 / 32;
    Grid g(2, 3.0, h);
    const double r = 0.5;
    struct Pt { const char* name; double x, y; };
    const Pt pts[] = {
        {"slab", 0.0, 1.0},   {"slab", 1.7, -1.0}, {"cross", 1.0, 1.0},
        {"cross", 2.0, 1.0},  {"cross", -1.0, -1.6}, {"ball", 1.0, 0.0},
        {"ball", 0.6, 0.8},   {"pinched_plus", 2.0, 1.0},
    };
    for (const auto& p : pts) {
        auto mask = validate_steiner(*realize_domain(domain_gallery().at(p.name), g));
        REQUIRE(mask->steiner == SteinerStatus::validated);
        INFO(p.name << " @ (" << p.x << "," << p.y << ")");
        CHECK(measure_density(*mask, {p.x, p.y}, r) >= 0.25 - 3.0 * h / r);
    }
}

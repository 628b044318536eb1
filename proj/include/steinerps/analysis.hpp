#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "steinerps/geometry.hpp"
#include "steinerps/grid.hpp"
#include "steinerps/solver.hpp"

namespace steinerps {

/// Both sides of the quantitative subadditivity of concave powers:
/// (A+B)^a <= A^a + B^a - (1-a)/2^{a+1} min(A^a, B^a).
inline std::pair<double, double> subadditivity_check(double alpha, double A, double B) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("subadditivity: alpha in (0,1)");
    if (!(A > 0.0 && B > 0.0)) throw std::invalid_argument("subadditivity: A, B > 0");
    const double lhs = std::pow(A + B, alpha);
    const double Aa = std::pow(A, alpha), Ba = std::pow(B, alpha);
    const double rhs = Aa + Ba - (1.0 - alpha) / std::pow(2.0, alpha + 1.0) * std::min(Aa, Ba);
    return {lhs, rhs};
}

/// Gagliardo-Nirenberg interpolation ratio
/// ||psi||_r / (||grad psi||_p^theta ||psi||_p^{1-theta}), theta = N/p - N/r.
/// The ratio is scale invariant, so it stays put along psi_s(x) = psi(s x).
inline std::pair<double, double> gns_check(const GridFunction& psi, double p, double r) {
    const int N = psi.grid().dim();
    if (!(r >= p)) throw std::invalid_argument("gns_check: requires r >= p");
    if (p < N) {
        const double pstar = N * p / (N - p);
        if (!(r < pstar)) throw std::invalid_argument("gns_check: r must be subcritical");
    }
    const double theta = double(N) / p - double(N) / r;
    const double nr = lq_norm(psi, r);
    if (nr == 0.0) throw std::invalid_argument("gns_check: zero function");
    const double gp = std::pow(gradient_pnorm(psi, p), 1.0 / p);
    const double np = lq_norm(psi, p);
    const double ratio = nr / (std::pow(gp, theta) * std::pow(np, 1.0 - theta));
    return {ratio, theta};
}

struct EquivalenceInstance {
    double lambda_pq = 0.0;
    double lambda_p = 0.0;
    std::string label;
};

/// Min/max of lambda_{p,q} / lambda_p^{1 - N/p + N/q} over a family of
/// solved instances; the two-sided equivalence of the Poincare-Sobolev
/// constants makes this band finite and scaling-stable.
inline std::pair<double, double> equivalence_band(const std::vector<EquivalenceInstance>& inst,
                                                  int N, double p, double q) {
    if (inst.size() < 3) throw std::invalid_argument("equivalence_band: needs >= 3 instances");
    const double e = 1.0 - double(N) / p + double(N) / q;
    double lo = kInf, hi = 0.0;
    for (const auto& i : inst) {
        if (!(i.lambda_pq > 0.0 && i.lambda_p > 0.0))
            throw std::invalid_argument("equivalence_band: degenerate instance");
        const double r = i.lambda_pq / std::pow(i.lambda_p, e);
        lo = std::min(lo, r);
        hi = std::max(hi, r);
    }
    return {lo, hi};
}

/// lambda_{p,q} * r_Omega^{p - N + Np/q}: bounded below by a positive
/// constant depending only on (N, p, q) across the Steiner gallery.
inline double inradius_bound_check(double lambda_pq, double r_in, int N, double p, double q) {
    if (!(r_in > 0.0) || std::isinf(r_in))
        throw std::invalid_argument("inradius_bound_check: inradius not computable");
    return lambda_pq * std::pow(r_in, p - double(N) + double(N) * p / q);
}

/// Ball scaling law: lambda(B_r)/lambda(B_1) against r^{N - p - pN/q},
/// with both instances solved at the same absolute spacing.
inline std::pair<double, double> scaling_check(double p, double q, int N, double r, double spacing) {
    ProblemConfig base;
    base.dim = N;
    base.p = p;
    base.q = q;
    base.domain = DomainSpec::ball(1.0);
    base.half_extent = 1.0;
    base.spacing = spacing;
    ProblemConfig scaled = base;
    scaled.domain = DomainSpec::ball(r);
    scaled.half_extent = r;
    const double l1 = solve_extremal(base).lambda_est;
    const double lr = solve_extremal(scaled).lambda_est;
    const double predicted = std::pow(r, double(N) - p - p * double(N) / q);
    return {predicted, lr / l1};
}

/// The explicit constants of the exponential-decay machinery:
/// C7 = 4^p (p(q-p+1))^{p-1}, the smallness threshold
/// eps = (lambda_p / (2 C7 lambda))^{1/(q-p)}, K = 1 + 2 C7 / lambda_p and
/// the decay rate a = (1/q) log((K+1)/K). All depend only on their
/// arguments; recomputation is bit-stable.
struct DecayConstants {
    double c7 = 0.0;
    double eps_threshold = 0.0;
    double K = 0.0;
    double a = 0.0;
    double r0 = std::numeric_limits<double>::quiet_NaN();  // set once paired with a field
};

inline DecayConstants decay_constants(double p, double q, double lambda_p, double lambda) {
    if (!(q > p)) throw std::invalid_argument("decay_constants: requires q > p");
    if (!(lambda_p > 0.0)) throw std::invalid_argument("decay_constants: requires lambda_p > 0");
    DecayConstants c;
    c.c7 = std::pow(4.0, p) * std::pow(p * (q - p + 1.0), p - 1.0);
    c.eps_threshold = std::pow(lambda_p / (2.0 * c.c7 * lambda), 1.0 / (q - p));
    c.K = 1.0 + 2.0 * c.c7 / lambda_p;
    c.a = std::log((c.K + 1.0) / c.K) / q;
    return c;
}

struct DecayReport {
    std::vector<std::pair<double, double>> tail_mass;  // (R, A(R) = ∫_{Ω\B_R} u^q)
    std::vector<std::pair<double, double>> tail_sup;   // (rho, sup_{Ω\B_rho} u)
    bool recursion_pass = false;
    std::vector<double> axis_rates;  // fitted -log u(t e_i) slope per axis (NaN if no window)
    double fitted_rate = std::numeric_limits<double>::quiet_NaN();  // min over fitted axes
    std::vector<std::pair<double, double>> localized_sup_ratio;  // (rho, sup tail / Lq tail) samples
    DecayConstants constants;
};

namespace detail {

/// Least-squares slope of -log u against t over the given samples.
inline double fit_rate(const std::vector<std::pair<double, double>>& pts) {
    if (pts.size() < 3) return std::numeric_limits<double>::quiet_NaN();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (auto& [t, lu] : pts) {
        sx += t;
        sy += lu;
        sxx += t * t;
        sxy += t * lu;
    }
    const double n = double(pts.size());
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace detail

/// Tail decay audit of a computed extremal on a truncated domain: unit-step
/// tail masses A(R), tail sups, the geometric recursion
/// A(R+1) <= K/(K+1) A(R) for R >= r0, and per-axis exponential fits.
/// Samples below 100x machine epsilon relative to the sup are dropped from
/// both the recursion window and the fit window. Throws when the box is too
/// small to resolve the tail (sup at L/2 above the smallness threshold).
inline DecayReport tail_report(const GridFunction& u, const ProblemConfig& cfg,
                               const DecayConstants& constants) {
    DecayReport rep;
    rep.constants = constants;
    const Grid& g = u.grid();
    const double q = cfg.q;
    const double supu = u.max_abs();
    const int Rmax = static_cast<int>(std::floor(g.half_extent())) - 1;
    if (Rmax < 2) throw std::runtime_error("tail_report: box too small");

    std::vector<double> mass(static_cast<std::size_t>(Rmax) + 1, 0.0);
    std::vector<double> sup(static_cast<std::size_t>(Rmax) + 1, 0.0);
    for (std::int64_t c = 0; c < g.total_cells(); ++c) {
        const double v = u[c];
        if (v == 0.0) continue;
        const auto mi = g.to_multi(c);
        double r2 = 0.0;
        for (int d = 0; d < g.dim(); ++d) {
            const double x = g.axis_center(mi[d]);
            r2 += x * x;
        }
        const double r = std::sqrt(r2);
        const double vq = detail::pow_fast(v, q);
        for (int R = 0; R <= Rmax; ++R) {
            if (r > double(R)) {
                mass[static_cast<std::size_t>(R)] += vq;
                sup[static_cast<std::size_t>(R)] = std::max(sup[static_cast<std::size_t>(R)], v);
            } else {
                break;
            }
        }
    }
    for (int R = 0; R <= Rmax; ++R) {
        rep.tail_mass.emplace_back(double(R), mass[static_cast<std::size_t>(R)] * g.cell_volume());
        rep.tail_sup.emplace_back(double(R), sup[static_cast<std::size_t>(R)]);
    }

    const int half = static_cast<int>(std::floor(g.half_extent() / 2.0));
    if (sup[static_cast<std::size_t>(std::min(half, Rmax))] > constants.eps_threshold)
        throw std::runtime_error("tail_report: tail unresolved, enlarge the truncation box");

    int r0 = -1;
    for (int R = 0; R <= Rmax; ++R)
        if (sup[static_cast<std::size_t>(R)] <= constants.eps_threshold) { r0 = R; break; }
    rep.constants.r0 = double(r0);

    const double floor_v = 100.0 * std::numeric_limits<double>::epsilon() * supu;
    const double ratio_cap = constants.K / (constants.K + 1.0);
    rep.recursion_pass = true;
    for (int R = r0; R + 1 <= Rmax; ++R) {
        if (sup[static_cast<std::size_t>(R + 1)] < floor_v) break;
        const double A0 = rep.tail_mass[static_cast<std::size_t>(R)].second;
        const double A1 = rep.tail_mass[static_cast<std::size_t>(R + 1)].second;
        if (A1 > ratio_cap * A0 * (1.0 + 1e-12)) rep.recursion_pass = false;
    }

    // Per-axis exponential fit between r0+1 and the machine floor.
    rep.axis_rates.assign(static_cast<std::size_t>(g.dim()),
                          std::numeric_limits<double>::quiet_NaN());
    for (int axis = 0; axis < g.dim(); ++axis) {
        std::vector<std::pair<double, double>> pts;
        for (int t = r0 + 1; t <= Rmax; ++t) {
            std::vector<int> mi(static_cast<std::size_t>(g.dim()), g.half_count());
            const int j = g.half_count() + static_cast<int>(std::lround(double(t) / g.spacing()));
            if (j >= g.cells_per_axis()) break;
            mi[static_cast<std::size_t>(axis)] = j;
            const double v = u[g.to_flat(mi)];
            if (v < floor_v) break;
            pts.emplace_back(double(t), -std::log(v));
        }
        rep.axis_rates[static_cast<std::size_t>(axis)] = detail::fit_rate(pts);
    }
    double mn = kInf;
    for (double r : rep.axis_rates)
        if (std::isfinite(r)) mn = std::min(mn, r);
    if (std::isfinite(mn)) rep.fitted_rate = mn;

    // Shape of the localized sup-Lq estimate: the ratio is recorded, its
    // boundedness is the testable statement (the constant is not explicit).
    for (int rho = r0; rho + 1 <= Rmax; ++rho) {
        const double s1 = sup[static_cast<std::size_t>(rho + 1)];
        const double Aq = std::pow(rep.tail_mass[static_cast<std::size_t>(rho)].second, 1.0 / q);
        if (s1 < floor_v || !(Aq > 0.0)) break;
        rep.localized_sup_ratio.emplace_back(double(rho), s1 / Aq);
    }
    return rep;
}

struct AxisVerdict {
    AxisBehavior tag = AxisBehavior::inconclusive;
    bool pass = false;
    double metric = std::numeric_limits<double>::quiet_NaN();
    std::string note;
};

/// Directional decay per the three behaviours at infinity: bounded axes
/// carry no mass beyond the bound, shrinking axes obey the
/// u((t+1)e_i) <= C (r_{i,t})^{p/q} shape (ratio not blowing up across t),
/// tubular axes decay exponentially with a positive fitted rate.
inline std::vector<AxisVerdict> directional_profile_check(const GridFunction& u,
                                                          const InfinityProfile& profile,
                                                          const ProblemConfig& cfg) {
    const Grid& g = u.grid();
    std::vector<AxisVerdict> out;
    const double floor_v = 100.0 * std::numeric_limits<double>::epsilon() * u.max_abs();
    const int Rmax = static_cast<int>(std::floor(g.half_extent())) - 1;

    auto axis_value = [&](int axis, int t) {
        std::vector<int> mi(static_cast<std::size_t>(g.dim()), g.half_count());
        const int j = g.half_count() + static_cast<int>(std::lround(double(t) / g.spacing()));
        if (j >= g.cells_per_axis()) return 0.0;
        mi[static_cast<std::size_t>(axis)] = j;
        return u[g.to_flat(mi)];
    };

    for (int axis = 0; axis < g.dim(); ++axis) {
        const AxisProfile& ap = profile.axes[static_cast<std::size_t>(axis)];
        AxisVerdict v;
        v.tag = ap.tag;
        switch (ap.tag) {
            case AxisBehavior::bounded: {
                double worst = 0.0;
                for (int t = static_cast<int>(std::ceil(ap.bound_t)); t <= Rmax; ++t)
                    worst = std::max(worst, axis_value(axis, t));
                v.metric = worst;
                v.pass = worst == 0.0;
                v.note = "mass beyond the bounded range";
                break;
            }
            case AxisBehavior::shrinking: {
                std::vector<double> ratios;
                auto mask = u.mask();
                for (int t = 2; t + 1 <= Rmax; ++t) {
                    const double r = section_inradius(mask, axis, double(t));
                    const double val = axis_value(axis, t + 1);
                    if (r <= 0.0 || val < floor_v) break;
                    ratios.push_back(val / std::pow(r, cfg.p / cfg.q));
                }
                if (ratios.size() < 2) {
                    v.pass = false;
                    v.note = "not enough resolvable samples";
                    break;
                }
                double first_half = 0.0, second_half = 0.0;
                const std::size_t mid = ratios.size() / 2;
                for (std::size_t i = 0; i < ratios.size(); ++i)
                    (i < mid ? first_half : second_half) = std::max(i < mid ? first_half : second_half, ratios[i]);
                v.metric = *std::max_element(ratios.begin(), ratios.end());
                v.pass = second_half <= 2.0 * first_half + 1e-300;
                v.note = "sup/section-inradius^{p/q} ratio";
                break;
            }
            case AxisBehavior::tubular: {
                std::vector<std::pair<double, double>> pts;
                for (int t = 1; t <= Rmax; ++t) {
                    const double val = axis_value(axis, t);
                    if (val < floor_v) break;
                    pts.emplace_back(double(t), -std::log(val));
                }
                const double rate = detail::fit_rate(pts);
                v.metric = rate;
                v.pass = std::isfinite(rate) && rate > 0.0;
                v.note = "fitted exponential rate";
                break;
            }
            case AxisBehavior::inconclusive:
                v.pass = false;
                v.note = "axis classification inconclusive";
                break;
        }
        out.push_back(std::move(v));
    }
    return out;
}

}  // namespace steinerps

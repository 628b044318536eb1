#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "steinerps/grid.hpp"

namespace steinerps {

enum class DomainFamily {
    slab,           // R^{N-1} x (-w, w), bounded in the last axis
    cross,          // union over axes of {|x_i| < w}
    half_slab,      // (0, inf) x (-w, w): drops the symmetry (S1) on axis 1
    pinched_minus,  // slab with an inward pinch at the origin: fails (S2)
    pinched_plus,   // slab with an outward bump at the origin: Steiner
    ball,
    box,
    staircase,      // {|y| < 1/(floor(|x|)+1)}, 2-D
    custom,
};

inline const char* family_name(DomainFamily f) {
    switch (f) {
        case DomainFamily::slab: return "slab";
        case DomainFamily::cross: return "cross";
        case DomainFamily::half_slab: return "half_slab";
        case DomainFamily::pinched_minus: return "pinched_minus";
        case DomainFamily::pinched_plus: return "pinched_plus";
        case DomainFamily::ball: return "ball";
        case DomainFamily::box: return "box";
        case DomainFamily::staircase: return "staircase";
        case DomainFamily::custom: return "custom";
    }
    return "?";
}

/// Smooth bump on (-1,1): exp(1 - 1/(1-s^2)), even, decreasing on [0,1),
/// value 1 at 0. Default pinch profile for the pinched slabs; any smooth
/// even decreasing profile with value 1 at the origin works.
inline double bump_profile(double s) {
    const double s2 = s * s;
    if (s2 >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - s2));
}

struct DomainSpec {
    DomainFamily family = DomainFamily::ball;
    double half_width = 1.0;             // slab / cross / half_slab transverse half-width
    double radius = 1.0;                 // ball
    std::vector<double> half_extents;    // box (broadcast from radius if empty)
    double epsilon = 0.5;                // pinched slabs, in (0,1)
    std::function<double(double)> pinch_profile;  // defaults to bump_profile
    std::function<bool(const std::vector<double>&)> member;  // custom only

    static DomainSpec slab(double half_width = 1.0) {
        DomainSpec s;
        s.family = DomainFamily::slab;
        s.half_width = half_width;
        return s;
    }
    static DomainSpec cross(double half_width = 1.0) {
        DomainSpec s;
        s.family = DomainFamily::cross;
        s.half_width = half_width;
        return s;
    }
    static DomainSpec half_slab(double half_width = 1.0) {
        DomainSpec s;
        s.family = DomainFamily::half_slab;
        s.half_width = half_width;
        return s;
    }
    static DomainSpec pinched(bool outward, double epsilon = 0.5) {
        DomainSpec s;
        s.family = outward ? DomainFamily::pinched_plus : DomainFamily::pinched_minus;
        if (!(epsilon > 0.0 && epsilon < 1.0))
            throw std::invalid_argument("pinched slab: epsilon must be in (0,1)");
        s.epsilon = epsilon;
        return s;
    }
    static DomainSpec ball(double radius = 1.0) {
        DomainSpec s;
        s.family = DomainFamily::ball;
        if (!(radius > 0.0)) throw std::invalid_argument("ball: radius must be positive");
        s.radius = radius;
        return s;
    }
    static DomainSpec box(std::vector<double> half_extents) {
        DomainSpec s;
        s.family = DomainFamily::box;
        for (double b : half_extents)
            if (!(b > 0.0)) throw std::invalid_argument("box: half extents must be positive");
        s.half_extents = std::move(half_extents);
        return s;
    }
    static DomainSpec staircase() {
        DomainSpec s;
        s.family = DomainFamily::staircase;
        return s;
    }
    static DomainSpec custom(std::function<bool(const std::vector<double>&)> member) {
        DomainSpec s;
        s.family = DomainFamily::custom;
        s.member = std::move(member);
        return s;
    }

    /// Whether the family is unbounded along some axis (truncated by the box).
    bool is_unbounded() const {
        switch (family) {
            case DomainFamily::ball:
            case DomainFamily::box:
                return false;
            default:
                return true;  // custom treated as unknown/unbounded
        }
    }

    bool contains(const std::vector<double>& x) const {
        const int n = static_cast<int>(x.size());
        switch (family) {
            case DomainFamily::slab:
                return std::abs(x[n - 1]) < half_width;
            case DomainFamily::cross: {
                for (double xi : x)
                    if (std::abs(xi) < half_width) return true;
                return false;
            }
            case DomainFamily::half_slab:
                if (n < 2) throw std::invalid_argument("half_slab: needs dim >= 2");
                return x[0] > 0.0 && std::abs(x[n - 1]) < half_width;
            case DomainFamily::pinched_minus:
            case DomainFamily::pinched_plus: {
                if (n < 2) throw std::invalid_argument("pinched slab: needs dim >= 2");
                double rt = 0.0;  // |x'| over the first n-1 coordinates
                for (int d = 0; d + 1 < n; ++d) rt += x[d] * x[d];
                rt = std::sqrt(rt);
                const auto& prof = pinch_profile ? pinch_profile : bump_profile;
                const double dev = epsilon * prof(rt / epsilon);
                const double w = (family == DomainFamily::pinched_plus) ? 1.0 + dev : 1.0 - dev;
                return std::abs(x[n - 1]) < w;
            }
            case DomainFamily::ball: {
                double r2 = 0.0;
                for (double xi : x) r2 += xi * xi;
                return r2 < radius * radius;
            }
            case DomainFamily::box: {
                for (int d = 0; d < n; ++d) {
                    const double b = half_extents.empty()
                                         ? radius
                                         : half_extents[static_cast<std::size_t>(d) % half_extents.size()];
                    if (!(std::abs(x[d]) < b)) return false;
                }
                return true;
            }
            case DomainFamily::staircase: {
                if (n != 2) throw std::invalid_argument("staircase: 2-D only");
                const double w = 1.0 / (std::floor(std::abs(x[0])) + 1.0);
                return std::abs(x[1]) < w;
            }
            case DomainFamily::custom:
                if (!member) throw std::invalid_argument("custom domain: missing membership predicate");
                return member(x);
        }
        return false;
    }
};

/// Cell-center membership: inside[c] = (center of c in the domain).
inline std::shared_ptr<DomainMask> realize_domain(const DomainSpec& spec, const Grid& grid) {
    auto mask = std::make_shared<DomainMask>(grid);
    std::vector<double> x(grid.dim());
    std::vector<int> hi(grid.dim(), grid.cells_per_axis());
    std::int64_t flat = 0;
    detail::for_each_multi(hi, [&](const std::vector<int>& mi) {
        for (int d = 0; d < grid.dim(); ++d) x[d] = grid.axis_center(mi[d]);
        mask->inside[static_cast<std::size_t>(grid.to_flat(mi))] = spec.contains(x) ? 1 : 0;
        ++flat;
    });
    if (mask->inside_count() == 0)
        throw std::runtime_error("realize_domain: empty realization (no inside cell)");
    return mask;
}

/// Check properties (S1) and (S2) along every coordinate axis: on each grid
/// line the inside cells must form a contiguous run symmetric about the
/// axis hyperplane. Returns a copy with the verdict; on violation records
/// the first offending axis/line and which property failed.
inline std::shared_ptr<DomainMask> validate_steiner(const DomainMask& mask) {
    auto out = std::make_shared<DomainMask>(mask);
    const Grid& g = mask.grid;
    const int n = g.cells_per_axis();
    const int K = g.half_count();
    const int dim = g.dim();

    for (int axis = 0; axis < dim; ++axis) {
        // Iterate lines: multi-index with the scan axis fixed to 0.
        std::vector<int> hi(dim, n);
        hi[axis] = 1;
        bool bad = false;
        detail::for_each_multi(hi, [&](const std::vector<int>& base) {
            if (bad) return;
            std::vector<int> mi(base);
            int lo = n, hicell = -1;
            bool symmetric = true;
            for (int j = 0; j < n; ++j) {
                mi[axis] = j;
                const bool in = mask.is_inside(g.to_flat(mi));
                if (in) {
                    lo = std::min(lo, j);
                    hicell = std::max(hicell, j);
                }
                std::vector<int> mirror(mi);
                mirror[axis] = 2 * K - j;
                if (in != mask.is_inside(g.to_flat(mirror))) symmetric = false;
            }
            if (hicell < 0) return;  // empty line
            if (!symmetric) {
                out->steiner = SteinerStatus::violated;
                out->violation = SteinerViolation{axis, base, "S1"};
                bad = true;
                return;
            }
            for (int j = lo; j <= hicell; ++j) {
                mi[axis] = j;
                if (!mask.is_inside(g.to_flat(mi))) {
                    out->steiner = SteinerStatus::violated;
                    out->violation = SteinerViolation{axis, base, "S2"};
                    bad = true;
                    return;
                }
            }
        });
        if (bad) return out;
    }
    out->steiner = SteinerStatus::validated;
    out->violation.reset();
    return out;
}

/// Named gallery of the sets studied alongside the main results: the slab
/// and infinite cross (attained), the half slab and inward-pinched slab
/// (not attained), plus ball, box, outward-pinched slab and the staircase.
inline const std::map<std::string, DomainSpec>& domain_gallery() {
    static const std::map<std::string, DomainSpec> reg = {
        {"slab", DomainSpec::slab()},
        {"cross", DomainSpec::cross()},
        {"half_slab", DomainSpec::half_slab()},
        {"pinched_minus", DomainSpec::pinched(false)},
        {"pinched_plus", DomainSpec::pinched(true)},
        {"ball", DomainSpec::ball()},
        {"box", DomainSpec::box({1.0})},
        {"staircase", DomainSpec::staircase()},
    };
    return reg;
}

}  // namespace steinerps

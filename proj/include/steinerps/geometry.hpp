#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "steinerps/domain.hpp"
#include "steinerps/grid.hpp"

namespace steinerps {

namespace detail {

inline constexpr double kDtBig = 1e18;  // finite stand-in for "no seed yet"

/// One-dimensional squared-distance transform via the lower envelope of
/// parabolas. Input f, output g, both length m; work arrays are reused by
/// the caller.
inline void dt1d(const std::vector<double>& f, std::vector<double>& g, int m,
                 std::vector<int>& v, std::vector<double>& z) {
    int k = 0;
    v[0] = 0;
    z[0] = -kDtBig;
    z[1] = kDtBig;
    for (int q = 1; q < m; ++q) {
        double s = ((f[q] + double(q) * q) - (f[v[k]] + double(v[k]) * v[k])) / (2.0 * q - 2.0 * v[k]);
        while (s <= z[k]) {
            --k;
            s = ((f[q] + double(q) * q) - (f[v[k]] + double(v[k]) * v[k])) / (2.0 * q - 2.0 * v[k]);
        }
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = kDtBig;
    }
    k = 0;
    for (int q = 0; q < m; ++q) {
        while (z[k + 1] < q) ++k;
        const double d = q - v[k];
        g[q] = d * d + f[v[k]];
    }
}

/// Exact squared Euclidean distance (in cell units) from each cell of an
/// index box `dims` to the nearest cell where inside == 0, counting the
/// one-cell ghost ring beyond the box as outside.
inline std::vector<double> squared_distance_to_outside(const std::vector<int>& dims,
                                                       const std::vector<std::uint8_t>& inside) {
    const int nd = static_cast<int>(dims.size());
    std::vector<int> pdims(nd);
    std::int64_t ptot = 1;
    int pmax = 0;
    for (int d = 0; d < nd; ++d) {
        pdims[d] = dims[d] + 2;
        ptot *= pdims[d];
        pmax = std::max(pmax, pdims[d]);
    }
    std::vector<std::int64_t> pstride(nd);
    pstride[nd - 1] = 1;
    for (int d = nd - 2; d >= 0; --d) pstride[d] = pstride[d + 1] * pdims[d + 1];

    std::vector<double> dist(static_cast<std::size_t>(ptot), 0.0);
    // Interior cells that are inside start at "infinity".
    {
        std::vector<int> hi(dims);
        std::int64_t src = 0;
        for_each_multi(hi, [&](const std::vector<int>& mi) {
            std::int64_t dst = 0;
            for (int d = 0; d < nd; ++d) dst += (mi[d] + 1) * pstride[d];
            if (inside[static_cast<std::size_t>(src)]) dist[static_cast<std::size_t>(dst)] = kDtBig;
            ++src;
        });
    }

    std::vector<double> f(static_cast<std::size_t>(pmax)), gbuf(static_cast<std::size_t>(pmax));
    std::vector<int> v(static_cast<std::size_t>(pmax));
    std::vector<double> z(static_cast<std::size_t>(pmax) + 1);
    for (int axis = 0; axis < nd; ++axis) {
        std::vector<int> hi(pdims);
        hi[axis] = 1;
        const int m = pdims[axis];
        for_each_multi(hi, [&](const std::vector<int>& base) {
            std::int64_t b = 0;
            for (int d = 0; d < nd; ++d) b += base[d] * pstride[d];
            for (int j = 0; j < m; ++j) f[static_cast<std::size_t>(j)] = dist[static_cast<std::size_t>(b + j * pstride[axis])];
            dt1d(f, gbuf, m, v, z);
            for (int j = 0; j < m; ++j) dist[static_cast<std::size_t>(b + j * pstride[axis])] = gbuf[static_cast<std::size_t>(j)];
        });
    }

    // Strip the ghost ring.
    std::vector<double> out(inside.size(), 0.0);
    {
        std::vector<int> hi(dims);
        std::int64_t src = 0;
        for_each_multi(hi, [&](const std::vector<int>& mi) {
            std::int64_t p = 0;
            for (int d = 0; d < nd; ++d) p += (mi[d] + 1) * pstride[d];
            out[static_cast<std::size_t>(src)] = dist[static_cast<std::size_t>(p)];
            ++src;
        });
    }
    return out;
}

}  // namespace detail

struct InradiusResult {
    double r = 0.0;
    std::vector<int> center;  // multi-index of the deepest cell
};

/// Largest grid ball contained in the mask: distance-transform maximum,
/// accurate to +-h. Ties are broken toward the smallest-norm center.
inline InradiusResult inradius_with_center(const DomainMask& mask) {
    const Grid& g = mask.grid;
    if (mask.inside_count() == 0) throw std::runtime_error("inradius: empty mask");
    std::vector<int> dims(g.dim(), g.cells_per_axis());
    const auto d2 = detail::squared_distance_to_outside(dims, mask.inside);

    InradiusResult best;
    double best_d2 = -1.0, best_norm2 = 0.0;
    for (std::int64_t c = 0; c < g.total_cells(); ++c) {
        if (!mask.is_inside(c)) continue;
        const double cur = d2[static_cast<std::size_t>(c)];
        if (cur < best_d2) continue;
        const auto mi = g.to_multi(c);
        double n2 = 0.0;
        for (int d = 0; d < g.dim(); ++d) {
            const double x = g.axis_center(mi[d]);
            n2 += x * x;
        }
        if (cur > best_d2 || n2 < best_norm2) {
            best_d2 = cur;
            best_norm2 = n2;
            best.center = mi;
        }
    }
    best.r = std::sqrt(best_d2) * g.spacing();
    return best;
}

inline double inradius(const DomainMask& mask) { return inradius_with_center(mask).r; }

/// Inradius of the (N-1)-dimensional section {x in Omega : x_axis = t},
/// measured inside the hyperplane; 0 if the section is empty.
inline double section_inradius(const DomainMask& mask, int axis, double t) {
    const Grid& g = mask.grid;
    if (g.dim() < 2) throw std::invalid_argument("section_inradius: needs dim >= 2");
    if (axis < 0 || axis >= g.dim()) throw std::invalid_argument("section_inradius: axis out of range");
    const int j = static_cast<int>(std::lround(t / g.spacing())) + g.half_count();
    if (j < 0 || j >= g.cells_per_axis())
        throw std::invalid_argument("section_inradius: t outside the grid range");

    const int n = g.cells_per_axis();
    std::vector<int> sdims(g.dim() - 1, n);
    std::int64_t stot = 1;
    for (int d : sdims) stot *= d;
    std::vector<std::uint8_t> sin(static_cast<std::size_t>(stot), 0);

    std::vector<int> hi(g.dim() - 1, n);
    std::int64_t src = 0;
    bool any = false;
    detail::for_each_multi(hi, [&](const std::vector<int>& smi) {
        std::vector<int> mi(g.dim());
        int k = 0;
        for (int d = 0; d < g.dim(); ++d) mi[d] = (d == axis) ? j : smi[k++];
        const bool in = mask.is_inside(g.to_flat(mi));
        sin[static_cast<std::size_t>(src)] = in ? 1 : 0;
        any = any || in;
        ++src;
    });
    if (!any) return 0.0;

    const auto d2 = detail::squared_distance_to_outside(sdims, sin);
    double best = 0.0;
    for (double v : d2) best = std::max(best, v);
    return std::sqrt(best) * g.spacing();
}

enum class AxisBehavior { bounded, shrinking, tubular, inconclusive };

inline const char* axis_behavior_name(AxisBehavior b) {
    switch (b) {
        case AxisBehavior::bounded: return "bounded";
        case AxisBehavior::shrinking: return "shrinking";
        case AxisBehavior::tubular: return "tubular";
        case AxisBehavior::inconclusive: return "inconclusive";
    }
    return "?";
}

struct AxisProfile {
    AxisBehavior tag = AxisBehavior::inconclusive;
    double bound_t = std::numeric_limits<double>::quiet_NaN();     // bounded: sections empty beyond
    double tube_radius = std::numeric_limits<double>::quiet_NaN(); // tubular: limiting section inradius
    std::vector<std::pair<double, double>> samples;                // (t, r) on the largest box
};

struct InfinityProfile {
    std::vector<AxisProfile> axes;
};

/// Classify each axis direction of an unbounded-capable family by watching
/// section inradii r_{i,t} on a growing sequence of boxes: sections that
/// vanish beyond some t are "bounded", sections whose inradius keeps
/// falling toward the grid floor are "shrinking", and sections whose
/// inradius stabilizes above 2h are "tubular". Tubes thinner than 2h are
/// not resolvable and come out as shrinking.
inline InfinityProfile classify_infinity(const DomainSpec& spec, int dim, double h,
                                         const std::vector<double>& boxes) {
    if (dim < 2) throw std::invalid_argument("classify_infinity: needs dim >= 2");
    if (boxes.size() < 2) throw std::invalid_argument("classify_infinity: needs >= 2 boxes");
    for (std::size_t i = 1; i < boxes.size(); ++i)
        if (!(boxes[i] > boxes[i - 1])) throw std::invalid_argument("classify_infinity: boxes must increase");

    struct BoxData {
        std::vector<std::vector<std::pair<double, double>>> per_axis;  // (t, r)
    };
    std::vector<BoxData> data;
    for (double L : boxes) {
        Grid g(dim, L, h);
        auto mask = realize_domain(spec, g);
        BoxData bd;
        bd.per_axis.resize(static_cast<std::size_t>(dim));
        const int tmax = static_cast<int>(std::floor(L)) - 1;
        for (int axis = 0; axis < dim; ++axis)
            for (int t = 0; t <= tmax; ++t)
                bd.per_axis[static_cast<std::size_t>(axis)].emplace_back(
                    double(t), section_inradius(*mask, axis, double(t)));
        data.push_back(std::move(bd));
    }

    InfinityProfile prof;
    prof.axes.resize(static_cast<std::size_t>(dim));
    const auto& last = data.back().per_axis;
    const auto& prev = data[data.size() - 2].per_axis;
    for (int axis = 0; axis < dim; ++axis) {
        AxisProfile ap;
        ap.samples = last[static_cast<std::size_t>(axis)];
        const auto& s = ap.samples;
        const auto& sp = prev[static_cast<std::size_t>(axis)];

        bool monotone = true;
        for (std::size_t i = 1; i < s.size(); ++i)
            if (s[i].second > s[i - 1].second + h + 1e-12) monotone = false;

        // Bounded: sections vanish beyond some t, consistently across boxes.
        int first_zero = -1;
        for (std::size_t i = 0; i < s.size(); ++i) {
            bool all_zero = true;
            for (std::size_t k = i; k < s.size(); ++k)
                if (s[k].second > 0.0) { all_zero = false; break; }
            if (all_zero) { first_zero = static_cast<int>(i); break; }
        }
        int first_zero_prev = -1;
        for (std::size_t i = 0; i < sp.size(); ++i) {
            bool all_zero = true;
            for (std::size_t k = i; k < sp.size(); ++k)
                if (sp[k].second > 0.0) { all_zero = false; break; }
            if (all_zero) { first_zero_prev = static_cast<int>(i); break; }
        }
        if (first_zero >= 0 && first_zero == first_zero_prev) {
            ap.tag = AxisBehavior::bounded;
            ap.bound_t = double(first_zero);
            prof.axes[static_cast<std::size_t>(axis)] = std::move(ap);
            continue;
        }

        const double r_end = s.back().second;
        const double r_end_prev = sp.back().second;
        if (!monotone) {
            ap.tag = AxisBehavior::inconclusive;
        } else if (r_end > 2.0 * h && std::abs(r_end - r_end_prev) <= 0.5 * h + 1e-12) {
            ap.tag = AxisBehavior::tubular;
            ap.tube_radius = r_end;
        } else if (r_end <= 2.0 * h || r_end <= 0.75 * r_end_prev) {
            ap.tag = AxisBehavior::shrinking;
        } else {
            ap.tag = AxisBehavior::inconclusive;
        }
        prof.axes[static_cast<std::size_t>(axis)] = std::move(ap);
    }
    return prof;
}

/// |B_r(x) \ Omega| / |B_r(x)| by cell counting. The ball must fit inside
/// the grid box and x must sit within about one cell of the mask boundary.
inline double measure_density(const DomainMask& mask, const std::vector<double>& x, double r) {
    const Grid& g = mask.grid;
    if (static_cast<int>(x.size()) != g.dim()) throw std::invalid_argument("measure_density: point dim mismatch");
    const double h = g.spacing();
    if (!(r > 2.0 * h)) throw std::invalid_argument("measure_density: requires r > 2h");
    for (int d = 0; d < g.dim(); ++d)
        if (std::abs(x[d]) + r > g.axis_center(g.cells_per_axis() - 1) + 0.5 * h)
            throw std::invalid_argument("measure_density: ball exits the grid box");

    // The nearest cell neighborhood must contain both inside and outside
    // cells, otherwise x is interior or far outside.
    std::vector<int> near(g.dim());
    for (int d = 0; d < g.dim(); ++d) {
        near[d] = static_cast<int>(std::lround(x[d] / h)) + g.half_count();
        near[d] = std::max(0, std::min(g.cells_per_axis() - 1, near[d]));
    }
    bool has_in = false, has_out = false;
    std::vector<int> lo(g.dim()), hi(g.dim());
    for (int d = 0; d < g.dim(); ++d) {
        lo[d] = std::max(0, near[d] - 1);
        hi[d] = std::min(g.cells_per_axis() - 1, near[d] + 1) - lo[d] + 1;
    }
    detail::for_each_multi(hi, [&](const std::vector<int>& off) {
        std::vector<int> mi(g.dim());
        for (int d = 0; d < g.dim(); ++d) mi[d] = lo[d] + off[d];
        (mask.is_inside(g.to_flat(mi)) ? has_in : has_out) = true;
    });
    if (!(has_in && has_out))
        throw std::invalid_argument("measure_density: point is not near the mask boundary");

    std::int64_t total = 0, outside = 0;
    std::vector<int> wlo(g.dim()), wspan(g.dim());
    for (int d = 0; d < g.dim(); ++d) {
        wlo[d] = static_cast<int>(std::floor((x[d] - r) / h)) + g.half_count();
        const int whi = static_cast<int>(std::ceil((x[d] + r) / h)) + g.half_count();
        wlo[d] = std::max(0, wlo[d]);
        wspan[d] = std::min(g.cells_per_axis() - 1, whi) - wlo[d] + 1;
    }
    detail::for_each_multi(wspan, [&](const std::vector<int>& off) {
        double d2 = 0.0;
        std::vector<int> mi(g.dim());
        for (int d = 0; d < g.dim(); ++d) {
            mi[d] = wlo[d] + off[d];
            const double dx = g.axis_center(mi[d]) - x[d];
            d2 += dx * dx;
        }
        if (d2 < r * r) {
            ++total;
            if (!mask.is_inside(g.to_flat(mi))) ++outside;
        }
    });
    if (total == 0) throw std::runtime_error("measure_density: empty ball");
    return double(outside) / double(total);
}

}  // namespace steinerps

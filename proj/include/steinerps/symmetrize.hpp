#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

#include "steinerps/grid.hpp"

namespace steinerps {

namespace detail {

/// Rank -> offset from the center cell for symmetric-decreasing placement:
/// 0, +1, -1, +2, -2, ...  (right cell before left cell at each rank).
inline int place_offset(int rank) {
    if (rank == 0) return 0;
    return (rank % 2 == 1) ? (rank + 1) / 2 : -(rank / 2);
}

/// Visit every grid line parallel to `axis`: f(base_flat, stride) with
/// base_flat the cell at line index 0.
template <class F>
inline void for_each_line(const Grid& g, int axis, F&& f) {
    const int n = g.cells_per_axis();
    std::int64_t stride = 1;
    for (int d = g.dim() - 1; d > axis; --d) stride *= n;
    std::vector<int> hi(g.dim(), n);
    hi[axis] = 1;
    for_each_multi(hi, [&](const std::vector<int>& base) {
        std::int64_t b = 0;
        for (int d = 0; d < g.dim(); ++d) b = b * n + base[d];
        f(b, stride);
    });
}

}  // namespace detail

/// Steiner symmetrization of a set along one axis: on every grid line the
/// k inside cells are replaced by the k cells nearest the axis hyperplane.
inline std::shared_ptr<DomainMask> symmetrize_set(const DomainMask& mask, int axis) {
    const Grid& g = mask.grid;
    if (axis < 0 || axis >= g.dim()) throw std::invalid_argument("symmetrize_set: axis out of range");
    auto out = std::make_shared<DomainMask>(g);
    const int n = g.cells_per_axis();
    const int K = g.half_count();
    detail::for_each_line(g, axis, [&](std::int64_t base, std::int64_t stride) {
        int k = 0;
        for (int j = 0; j < n; ++j)
            if (mask.inside[static_cast<std::size_t>(base + j * stride)]) ++k;
        for (int r = 0; r < k; ++r) {
            const int j = K + detail::place_offset(r);
            out->inside[static_cast<std::size_t>(base + j * stride)] = 1;
        }
    });
    return out;
}

/// Steiner symmetrization of a nonnegative field along one axis: per line
/// the values are rearranged symmetric-decreasing about the hyperplane
/// (sort descending, center first, then alternating right/left). This is
/// the same function produced by symmetrizing every superlevel set and
/// stacking the layers.
inline GridFunction symmetrize_fn(const GridFunction& u, int axis) {
    const Grid& g = u.grid();
    if (axis < 0 || axis >= g.dim()) throw std::invalid_argument("symmetrize_fn: axis out of range");
    for (double v : u.values())
        if (v < 0.0) throw std::invalid_argument("symmetrize_fn: negative input values");

    auto mask = symmetrize_set(u.mask(), axis);
    const int n = g.cells_per_axis();
    const int K = g.half_count();
    std::vector<double> vals(u.values().size(), 0.0);
    std::vector<double> line(static_cast<std::size_t>(n));
    detail::for_each_line(g, axis, [&](std::int64_t base, std::int64_t stride) {
        for (int j = 0; j < n; ++j) line[static_cast<std::size_t>(j)] = u[base + j * stride];
        std::sort(line.begin(), line.end(), std::greater<double>());
        for (int r = 0; r < n; ++r) {
            const int j = K + detail::place_offset(r);
            vals[static_cast<std::size_t>(base + j * stride)] = line[static_cast<std::size_t>(r)];
        }
    });
    return GridFunction(std::move(mask), std::move(vals));
}

/// Composition over all axes in order; the result is Steiner symmetric
/// (a fixed point of every per-axis symmetrization).
inline GridFunction full_symmetrize(const GridFunction& u) {
    GridFunction out = symmetrize_fn(u, 0);
    for (int axis = 1; axis < u.grid().dim(); ++axis) out = symmetrize_fn(out, axis);
    return out;
}

struct RearrangementReport {
    bool equimeasurable = false;
    double pz_defect = 0.0;  // ∫|∇u|^p - ∫|∇S(u)|^p
    std::vector<std::pair<double, double>> potential_defects;  // (alpha, drop of ∫|x|^a u^p)
};

/// Verify the rearrangement identities on a concrete field: per-line
/// equimeasurability (exact permutation), the energy drop of the full
/// symmetrization, and the drop of each |x|^alpha-weighted p-mass.
inline RearrangementReport rearrangement_report(const GridFunction& u, double p,
                                                const std::vector<double>& alphas) {
    RearrangementReport rep;
    const Grid& g = u.grid();
    const int n = g.cells_per_axis();

    bool equi = true;
    GridFunction cur = u;
    std::vector<double> before(static_cast<std::size_t>(n)), after(static_cast<std::size_t>(n));
    for (int axis = 0; axis < g.dim(); ++axis) {
        GridFunction next = symmetrize_fn(cur, axis);
        detail::for_each_line(g, axis, [&](std::int64_t base, std::int64_t stride) {
            for (int j = 0; j < n; ++j) {
                before[static_cast<std::size_t>(j)] = cur[base + j * stride];
                after[static_cast<std::size_t>(j)] = next[base + j * stride];
            }
            std::sort(before.begin(), before.end());
            std::sort(after.begin(), after.end());
            if (before != after) equi = false;  // bitwise: values are moved, never recomputed
        });
        cur = std::move(next);
    }
    rep.equimeasurable = equi;
    rep.pz_defect = gradient_pnorm(u, p) - gradient_pnorm(cur, p);
    for (double a : alphas)
        rep.potential_defects.emplace_back(a, weighted_pnorm(u, p, a) - weighted_pnorm(cur, p, a));
    return rep;
}

/// Contractivity of the one-axis rearrangement: returns
/// (||S u - S v||_p, ||u - v||_p); the first never exceeds the second.
inline std::pair<double, double> contractivity_check(const GridFunction& u, const GridFunction& v,
                                                     double p, int axis) {
    if (!(u.grid() == v.grid())) throw std::invalid_argument("contractivity_check: grid mismatch");
    GridFunction su = symmetrize_fn(u, axis);
    GridFunction sv = symmetrize_fn(v, axis);
    return {lq_norm(difference(su, sv), p), lq_norm(difference(u, v), p)};
}

}  // namespace steinerps

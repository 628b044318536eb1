#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace steinerps {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Uniform tensor grid on the box (-L, L)^N with an odd number of cell
/// centers per axis, so that the origin is always a cell center.
///
/// Cell centers along one axis sit at (j - K) * h for j in [0, n), where
/// n = cells_per_axis and K = (n - 1) / 2. Everything outside the box is
/// treated as Dirichlet-zero exterior.
class Grid {
public:
    Grid(int dim, double half_extent, double spacing)
        : dim_(dim), half_extent_(half_extent), spacing_(spacing) {
        if (dim < 1) throw std::invalid_argument("grid: dim must be >= 1");
        if (!(spacing > 0.0)) throw std::invalid_argument("grid: spacing must be positive");
        if (!(half_extent >= spacing)) throw std::invalid_argument("grid: half_extent must be >= spacing");
        // Largest odd cell count whose centers fit in [-L, L].
        half_count_ = static_cast<int>(std::floor(half_extent / spacing + 1e-9));
        cells_per_axis_ = 2 * half_count_ + 1;
    }

    int dim() const { return dim_; }
    double half_extent() const { return half_extent_; }
    double spacing() const { return spacing_; }
    int cells_per_axis() const { return cells_per_axis_; }
    int half_count() const { return half_count_; }

    std::int64_t total_cells() const {
        std::int64_t t = 1;
        for (int d = 0; d < dim_; ++d) t *= cells_per_axis_;
        return t;
    }

    /// Cell volume used by the midpoint quadrature.
    double cell_volume() const {
        double w = 1.0;
        for (int d = 0; d < dim_; ++d) w *= spacing_;
        return w;
    }

    double axis_center(int j) const { return (j - half_count_) * spacing_; }

    std::vector<double> center(const std::vector<int>& mi) const {
        std::vector<double> x(dim_);
        for (int d = 0; d < dim_; ++d) x[d] = axis_center(mi[d]);
        return x;
    }

    std::int64_t to_flat(const std::vector<int>& mi) const {
        std::int64_t f = 0;
        for (int d = 0; d < dim_; ++d) f = f * cells_per_axis_ + mi[d];
        return f;
    }

    std::vector<int> to_multi(std::int64_t flat) const {
        std::vector<int> mi(dim_);
        for (int d = dim_ - 1; d >= 0; --d) {
            mi[d] = static_cast<int>(flat % cells_per_axis_);
            flat /= cells_per_axis_;
        }
        return mi;
    }

    bool operator==(const Grid& o) const {
        return dim_ == o.dim_ && cells_per_axis_ == o.cells_per_axis_ &&
               spacing_ == o.spacing_ && half_extent_ == o.half_extent_;
    }

private:
    int dim_;
    double half_extent_;
    double spacing_;
    int half_count_;
    int cells_per_axis_;
};

inline Grid make_grid(int dim, double half_extent, double spacing) {
    return Grid(dim, half_extent, spacing);
}

enum class SteinerStatus { unchecked, validated, violated };

/// Location and nature of the first Steiner violation found by
/// validate_steiner: `axis` is the scan direction, `line` the multi-index
/// of the offending line (entry on `axis` is meaningless), and
/// `property` is "S1" (not symmetric about the hyperplane) or
/// "S2" (symmetric but not contiguous, i.e. not convex along the axis).
struct SteinerViolation {
    int axis = -1;
    std::vector<int> line;
    std::string property;
};

/// Per-cell membership of a domain realized on a Grid.
struct DomainMask {
    Grid grid;
    std::vector<std::uint8_t> inside;  // one flag per cell, row-major
    SteinerStatus steiner = SteinerStatus::unchecked;
    std::optional<SteinerViolation> violation;

    explicit DomainMask(const Grid& g)
        : grid(g), inside(static_cast<std::size_t>(g.total_cells()), 0) {}

    bool is_inside(std::int64_t flat) const { return inside[static_cast<std::size_t>(flat)] != 0; }

    std::int64_t inside_count() const {
        std::int64_t c = 0;
        for (auto v : inside) c += v;
        return c;
    }
};

/// Nonnegative (unless flagged signed) scalar field on a Grid, identically
/// zero outside its DomainMask. This is the discrete stand-in for a
/// W^{1,p}_0 function on the domain.
class GridFunction {
public:
    GridFunction(std::shared_ptr<const DomainMask> mask, std::vector<double> values,
                 bool allow_signed = false)
        : mask_(std::move(mask)), values_(std::move(values)), allow_signed_(allow_signed) {
        if (!mask_) throw std::invalid_argument("grid function: null mask");
        const auto n = static_cast<std::size_t>(mask_->grid.total_cells());
        if (values_.size() != n) throw std::invalid_argument("grid function: value count mismatch");
        for (std::size_t i = 0; i < n; ++i) {
            if (!mask_->inside[i]) values_[i] = 0.0;
            if (!std::isfinite(values_[i])) throw std::invalid_argument("grid function: non-finite value");
            if (!allow_signed_ && values_[i] < 0.0)
                throw std::invalid_argument("grid function: negative value in unsigned field");
        }
    }

    static GridFunction zeros(std::shared_ptr<const DomainMask> mask) {
        auto n = static_cast<std::size_t>(mask->grid.total_cells());
        return GridFunction(std::move(mask), std::vector<double>(n, 0.0));
    }

    /// Sample `f` at inside cell centers; outside cells stay zero.
    static GridFunction sample(std::shared_ptr<const DomainMask> mask,
                               const std::function<double(const std::vector<double>&)>& f,
                               bool allow_signed = false) {
        const Grid& g = mask->grid;
        std::vector<double> vals(static_cast<std::size_t>(g.total_cells()), 0.0);
        for (std::int64_t c = 0; c < g.total_cells(); ++c) {
            if (!mask->is_inside(c)) continue;
            vals[static_cast<std::size_t>(c)] = f(g.center(g.to_multi(c)));
        }
        return GridFunction(std::move(mask), std::move(vals), allow_signed);
    }

    const Grid& grid() const { return mask_->grid; }
    const DomainMask& mask() const { return *mask_; }
    std::shared_ptr<const DomainMask> mask_ptr() const { return mask_; }
    const std::vector<double>& values() const { return values_; }
    bool allow_signed() const { return allow_signed_; }

    double operator[](std::int64_t flat) const { return values_[static_cast<std::size_t>(flat)]; }

    double max_abs() const {
        double m = 0.0;
        for (double v : values_) m = std::max(m, std::abs(v));
        return m;
    }

    /// Flat index of the cell with the largest value (first one on ties).
    std::int64_t argmax() const {
        std::size_t best = 0;
        for (std::size_t i = 1; i < values_.size(); ++i)
            if (values_[i] > values_[best]) best = i;
        return static_cast<std::int64_t>(best);
    }

private:
    std::shared_ptr<const DomainMask> mask_;
    std::vector<double> values_;
    bool allow_signed_;
};

namespace detail {

/// Iterate multi-indices over the product of [0, hi_d) ranges.
template <class F>
inline void for_each_multi(const std::vector<int>& hi, F&& f) {
    const int dim = static_cast<int>(hi.size());
    std::vector<int> c(dim, 0);
    for (int d = 0; d < dim; ++d)
        if (hi[d] <= 0) return;
    while (true) {
        f(c);
        int d = dim - 1;
        while (d >= 0) {
            if (++c[d] < hi[d]) break;
            c[d] = 0;
            --d;
        }
        if (d < 0) break;
    }
}

/// Copy a field into a buffer padded by one ghost cell per side (ghosts 0).
/// Returns the padded values; padded axis length is n + 2.
inline std::vector<double> pad_values(const Grid& g, const std::vector<double>& vals) {
    const int n = g.cells_per_axis();
    const int np = n + 2;
    std::int64_t tot = 1;
    for (int d = 0; d < g.dim(); ++d) tot *= np;
    std::vector<double> out(static_cast<std::size_t>(tot), 0.0);
    std::vector<int> hi(g.dim(), n);
    for_each_multi(hi, [&](const std::vector<int>& mi) {
        std::int64_t src = 0, dst = 0;
        for (int d = 0; d < g.dim(); ++d) {
            src = src * n + mi[d];
            dst = dst * np + (mi[d] + 1);
        }
        out[static_cast<std::size_t>(dst)] = vals[static_cast<std::size_t>(src)];
    });
    return out;
}

}  // namespace detail

/// Midpoint approximation of the p-Dirichlet energy  ∫ |∇u|^p dx  using
/// forward differences per axis, with zero exterior. Jumps across the mask
/// boundary are part of the sum, which is how the Dirichlet condition is
/// enforced.
inline double gradient_pnorm(const GridFunction& u, double p) {
    if (!(p > 1.0)) throw std::invalid_argument("gradient_pnorm: requires p > 1");
    const Grid& g = u.grid();
    const int dim = g.dim();
    const int n = g.cells_per_axis();
    const int np = n + 2;
    const double h = g.spacing();
    const std::vector<double> v = detail::pad_values(g, u.values());

    std::vector<std::int64_t> stride(dim);
    stride[dim - 1] = 1;
    for (int d = dim - 2; d >= 0; --d) stride[d] = stride[d + 1] * np;

    // Forward differences live on padded cells [0, n] per axis, so the jump
    // from the exterior into the first interior cell is included.
    double sum = 0.0;
    std::vector<int> hi(dim, n + 1);
    detail::for_each_multi(hi, [&](const std::vector<int>& mi) {
        std::int64_t base = 0;
        for (int d = 0; d < dim; ++d) base += mi[d] * stride[d];
        double rho = 0.0;
        const double v0 = v[static_cast<std::size_t>(base)];
        for (int d = 0; d < dim; ++d) {
            const double gd = (v[static_cast<std::size_t>(base + stride[d])] - v0) / h;
            rho += gd * gd;
        }
        if (rho > 0.0) sum += std::pow(rho, 0.5 * p);
    });
    return sum * g.cell_volume();
}

/// Midpoint L^q norm; q = infinity returns max |u|.
inline double lq_norm(const GridFunction& u, double q) {
    if (std::isinf(q)) return u.max_abs();
    if (!(q >= 1.0)) throw std::invalid_argument("lq_norm: requires q >= 1");
    double s = 0.0;
    for (double v : u.values()) {
        const double a = std::abs(v);
        if (a > 0.0) s += std::pow(a, q);
    }
    return std::pow(s * u.grid().cell_volume(), 1.0 / q);
}

/// Midpoint approximation of ∫ |x|^alpha |u|^p dx.
inline double weighted_pnorm(const GridFunction& u, double p, double alpha) {
    if (!(p >= 1.0)) throw std::invalid_argument("weighted_pnorm: requires p >= 1");
    if (alpha < 0.0) throw std::invalid_argument("weighted_pnorm: requires alpha >= 0");
    const Grid& g = u.grid();
    double s = 0.0;
    for (std::int64_t c = 0; c < g.total_cells(); ++c) {
        const double v = std::abs(u[c]);
        if (v == 0.0) continue;
        double r2 = 0.0;
        const auto mi = g.to_multi(c);
        for (int d = 0; d < g.dim(); ++d) {
            const double x = g.axis_center(mi[d]);
            r2 += x * x;
        }
        const double w = (alpha == 0.0) ? 1.0 : std::pow(r2, 0.5 * alpha);
        s += w * std::pow(v, p);
    }
    return s * g.cell_volume();
}

/// Signed difference a - b on a shared grid (masks may differ; the result
/// carries the union-style mask of `a` so exterior stays zero there).
inline GridFunction difference(const GridFunction& a, const GridFunction& b) {
    if (!(a.grid() == b.grid())) throw std::invalid_argument("difference: grid mismatch");
    std::vector<double> vals(a.values().size());
    for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = a.values()[i] - b.values()[i];
    // Differences can be nonzero wherever either input is, so attach a mask
    // covering both supports.
    auto m = std::make_shared<DomainMask>(a.grid());
    for (std::size_t i = 0; i < m->inside.size(); ++i)
        m->inside[i] = (a.mask().inside[i] || b.mask().inside[i]) ? 1 : 0;
    return GridFunction(std::move(m), std::move(vals), /*allow_signed=*/true);
}

/// Discrete W^{1,p} norm (||u||_p^p + ||grad u||_p^p)^{1/p}.
inline double w1p_norm(const GridFunction& u, double p) {
    const double lp = lq_norm(u, p);
    const double gp = gradient_pnorm(u, p);
    return std::pow(std::pow(lp, p) + gp, 1.0 / p);
}

}  // namespace steinerps

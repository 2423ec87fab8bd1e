#pragma once

// Structured grids on intervals and rectangles, nodal fields, the exponent
// set of the coupled system, and the boundary distance function.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstddef>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lanemden/errors.hpp"

namespace lanemden {

/// Default slack for every nodewise "<=" between fields.
inline constexpr double tol_order = 1e-10;

enum class DomainKind { interval, rectangle };

inline std::string to_string(DomainKind k) {
    return k == DomainKind::interval ? "interval" : "rectangle";
}

struct Extent {
    double lo = 0.0;
    double hi = 1.0;

    double length() const { return hi - lo; }
    bool operator==(const Extent&) const = default;
};

using Point = std::array<double, 2>;

/// Uniform node-centred grid. Nodes are ordered lexicographically with the x
/// index running fastest: node = i + nx * j.
class Grid {
public:
    static Grid interval(Extent x, std::size_t n) {
        return Grid(DomainKind::interval, {x, Extent{0.0, 0.0}}, {n, 1});
    }

    static Grid rectangle(Extent x, Extent y, std::size_t nx, std::size_t ny) {
        return Grid(DomainKind::rectangle, {x, y}, {nx, ny});
    }

    DomainKind kind() const { return kind_; }
    int dimension() const { return kind_ == DomainKind::interval ? 1 : 2; }
    std::size_t size() const { return counts_[0] * counts_[1]; }
    std::size_t count(int axis) const { return counts_[axis]; }
    double spacing(int axis) const { return spacing_[axis]; }
    const Extent& extent(int axis) const { return extents_[axis]; }

    std::size_t index(std::size_t i, std::size_t j = 0) const { return i + counts_[0] * j; }
    std::array<std::size_t, 2> multi_index(std::size_t node) const {
        return {node % counts_[0], node / counts_[0]};
    }

    double coordinate(int axis, std::size_t k) const {
        // The last node sits exactly on the far side so boundary distances are exact.
        if (k + 1 == counts_[axis]) return extents_[axis].hi;
        return extents_[axis].lo + static_cast<double>(k) * spacing_[axis];
    }

    Point point(std::size_t node) const {
        const auto [i, j] = multi_index(node);
        return {coordinate(0, i), dimension() == 2 ? coordinate(1, j) : 0.0};
    }

    bool is_boundary(std::size_t node) const { return boundary_mask_[node] != 0; }

    /// Rectangle nodes where two faces meet; intervals have none.
    bool is_corner(std::size_t node) const {
        if (dimension() == 1) return false;
        const auto [i, j] = multi_index(node);
        return (i == 0 || i + 1 == counts_[0]) && (j == 0 || j + 1 == counts_[1]);
    }

    std::span<const std::size_t> boundary_nodes() const { return boundary_; }
    std::span<const std::size_t> interior_nodes() const { return interior_; }

    /// Outward unit normal; zero vector on interior nodes, normalized face sum at corners.
    Point normal(std::size_t node) const {
        Point n{0.0, 0.0};
        const auto ij = multi_index(node);
        for (int a = 0; a < dimension(); ++a) {
            if (ij[a] == 0) n[a] -= 1.0;
            if (ij[a] + 1 == counts_[a]) n[a] += 1.0;
        }
        const double len = std::hypot(n[0], n[1]);
        if (len > 0.0) {
            n[0] /= len;
            n[1] /= len;
        }
        return n;
    }

    /// Axis of the face a non-corner boundary node lies on, with the inward neighbour.
    std::pair<int, std::size_t> inward_neighbor(std::size_t node) const {
        const auto [i, j] = multi_index(node);
        if (i == 0) return {0, index(1, j)};
        if (i + 1 == counts_[0]) return {0, index(i - 1, j)};
        if (j == 0) return {1, index(i, 1)};
        if (j + 1 == counts_[1]) return {1, index(i, j - 1)};
        throw PreconditionError("inward_neighbor: node is not on the boundary");
    }

    /// Measure of one primal cell (edge length in 1D, rectangle area in 2D).
    double cell_measure() const {
        return dimension() == 1 ? spacing_[0] : spacing_[0] * spacing_[1];
    }

    std::size_t cell_count() const {
        return dimension() == 1 ? counts_[0] - 1 : (counts_[0] - 1) * (counts_[1] - 1);
    }

    /// Corner nodes of a primal cell (2 in 1D, 4 in 2D ordered LL, LR, UL, UR).
    std::vector<std::size_t> cell_nodes(std::size_t cell) const {
        if (dimension() == 1) return {cell, cell + 1};
        const std::size_t cx = counts_[0] - 1;
        const std::size_t i = cell % cx;
        const std::size_t j = cell / cx;
        return {index(i, j), index(i + 1, j), index(i, j + 1), index(i + 1, j + 1)};
    }

    Point cell_center(std::size_t cell) const {
        const auto nodes = cell_nodes(cell);
        const Point a = point(nodes.front());
        const Point b = point(nodes.back());
        return {0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])};
    }

    /// Lumped (dual-cell) volume: full cell measure inside, halved per boundary face.
    double dual_volume(std::size_t node) const {
        double v = cell_measure();
        const auto ij = multi_index(node);
        for (int a = 0; a < dimension(); ++a)
            if (ij[a] == 0 || ij[a] + 1 == counts_[a]) v *= 0.5;
        return v;
    }

    bool operator==(const Grid& o) const {
        return kind_ == o.kind_ && extents_ == o.extents_ && counts_ == o.counts_;
    }

private:
    Grid(DomainKind kind, std::array<Extent, 2> extents, std::array<std::size_t, 2> counts)
        : kind_(kind), extents_(extents), counts_(counts) {
        const int dim = dimension();
        for (int a = 0; a < dim; ++a) {
            if (counts_[a] < 3)
                throw ConfigError("grid needs at least 3 nodes per axis, got " +
                                  std::to_string(counts_[a]));
            if (!(extents_[a].hi > extents_[a].lo) || !std::isfinite(extents_[a].length()))
                throw ConfigError("degenerate extent on axis " + std::to_string(a));
            spacing_[a] = extents_[a].length() / static_cast<double>(counts_[a] - 1);
        }
        if (dim == 1) spacing_[1] = 0.0;

        boundary_mask_.assign(size(), 0);
        for (std::size_t node = 0; node < size(); ++node) {
            const auto ij = multi_index(node);
            bool on_boundary = false;
            for (int a = 0; a < dim; ++a)
                on_boundary = on_boundary || ij[a] == 0 || ij[a] + 1 == counts_[a];
            boundary_mask_[node] = on_boundary ? 1 : 0;
            (on_boundary ? boundary_ : interior_).push_back(node);
        }
    }

    DomainKind kind_;
    std::array<Extent, 2> extents_;
    std::array<std::size_t, 2> counts_;
    std::array<double, 2> spacing_{};
    std::vector<unsigned char> boundary_mask_;
    std::vector<std::size_t> boundary_;
    std::vector<std::size_t> interior_;
};

using GridPtr = std::shared_ptr<const Grid>;

inline GridPtr make_interval(double a, double b, std::size_t n) {
    return std::make_shared<const Grid>(Grid::interval({a, b}, n));
}

inline GridPtr make_rectangle(Extent x, Extent y, std::size_t nx, std::size_t ny) {
    return std::make_shared<const Grid>(Grid::rectangle(x, y, nx, ny));
}

/// build_grid for the configuration layer: extents/counts given per axis.
inline GridPtr build_grid(DomainKind kind, std::span<const Extent> extents,
                          std::span<const std::size_t> counts) {
    const std::size_t dim = kind == DomainKind::interval ? 1 : 2;
    if (extents.size() < dim || counts.size() < dim)
        throw ConfigError("build_grid: expected " + std::to_string(dim) + " extents and counts");
    if (kind == DomainKind::interval) return std::make_shared<const Grid>(Grid::interval(extents[0], counts[0]));
    return std::make_shared<const Grid>(Grid::rectangle(extents[0], extents[1], counts[0], counts[1]));
}

/// One real value per grid node.
class ScalarField {
public:
    ScalarField() = default;

    ScalarField(GridPtr grid, double value)
        : grid_(std::move(grid)), values_(grid_->size(), value) {
        check_finite();
    }

    ScalarField(GridPtr grid, std::vector<double> values)
        : grid_(std::move(grid)), values_(std::move(values)) {
        if (values_.size() != grid_->size())
            throw PreconditionError("field size " + std::to_string(values_.size()) +
                                    " does not match grid size " + std::to_string(grid_->size()));
        check_finite();
    }

    template <class F>
    static ScalarField from_function(GridPtr grid, F&& f) {
        std::vector<double> vals(grid->size());
        for (std::size_t n = 0; n < vals.size(); ++n) vals[n] = f(grid->point(n));
        return ScalarField(std::move(grid), std::move(vals));
    }

    const Grid& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const { return grid_; }
    std::size_t size() const { return values_.size(); }
    bool empty() const { return values_.empty(); }

    double operator[](std::size_t n) const { return values_[n]; }
    double& operator[](std::size_t n) { return values_[n]; }
    std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }

    double min() const { return *std::min_element(values_.begin(), values_.end()); }
    double max() const { return *std::max_element(values_.begin(), values_.end()); }
    double sup_norm() const {
        double s = 0.0;
        for (double v : values_) s = std::max(s, std::abs(v));
        return s;
    }

    ScalarField scaled(double factor) const {
        ScalarField out = *this;
        for (double& v : out.values_) v *= factor;
        return out;
    }

    /// Nodewise map; the result is validated for finiteness.
    template <class F>
    ScalarField map(F&& f) const {
        std::vector<double> out(values_.size());
        for (std::size_t n = 0; n < out.size(); ++n) out[n] = f(values_[n]);
        return ScalarField(grid_, std::move(out));
    }

    void check_finite() const {
        for (std::size_t n = 0; n < values_.size(); ++n)
            if (!std::isfinite(values_[n]))
                throw InternalError("non-finite value at node " + std::to_string(n));
    }

private:
    GridPtr grid_;
    std::vector<double> values_;
};

inline void require_same_grid(const ScalarField& a, const ScalarField& b, const char* where) {
    if (a.size() != b.size() || !(a.grid() == b.grid()))
        throw PreconditionError(std::string(where) + ": fields live on different grids");
}

inline double sup_distance(const ScalarField& a, const ScalarField& b) {
    require_same_grid(a, b, "sup_distance");
    double s = 0.0;
    for (std::size_t n = 0; n < a.size(); ++n) s = std::max(s, std::abs(a[n] - b[n]));
    return s;
}

/// Euclidean distance to the boundary: min(x - a, b - x), and the nearest of four sides in 2D.
inline double boundary_distance(const Grid& grid, const Point& x) {
    double d = std::numeric_limits<double>::infinity();
    for (int a = 0; a < grid.dimension(); ++a)
        d = std::min({d, x[a] - grid.extent(a).lo, grid.extent(a).hi - x[a]});
    return std::max(d, 0.0);
}

inline ScalarField distance_field(const GridPtr& grid) {
    std::vector<double> d(grid->size());
    for (std::size_t n = 0; n < d.size(); ++n)
        d[n] = grid->is_boundary(n) ? 0.0 : boundary_distance(*grid, grid->point(n));
    return ScalarField(grid, std::move(d));
}

/// Exponents of the system -Δ_{p1}u + u^{p1-1} = u^α1 + v^β1, -Δ_{p2}v + v^{p2-1} = u^α2 + v^β2.
struct ExponentSet {
    double p1 = 2.0;
    double p2 = 2.0;
    double alpha1 = -0.5;
    double beta1 = -0.5;
    double alpha2 = -0.5;
    double beta2 = -0.5;

    bool cooperative() const { return std::min(alpha2, beta1) > 0.0; }
    bool competitive() const { return std::min(alpha2, beta1) < 0.0; }

    double gamma1() const { return std::max(-alpha1, -beta1); }
    double gamma2() const { return std::max(-alpha2, -beta2); }

    /// max{-γ1 α_i/(p1-1), -γ2 β_i/(p2-1)}; defined when both coupling exponents are negative.
    std::optional<double> gamma_hat(int i) const {
        if (!(alpha2 < 0.0 && beta1 < 0.0)) return std::nullopt;
        const double a = i == 1 ? alpha1 : alpha2;
        const double b = i == 1 ? beta1 : beta2;
        return std::max(-gamma1() * a / (p1 - 1.0), -gamma2() * b / (p2 - 1.0));
    }

    bool satisfies_regime() const;

    /// Swap the roles of the two equations: (α1,β1,p1) <-> (β2,α2,p2).
    ExponentSet swapped() const { return {p2, p1, beta2, alpha2, beta1, alpha1}; }

    bool operator==(const ExponentSet&) const = default;
};

struct IntervalCheck {
    /// The exponent under test, e.g. "alpha1".
    std::string key;
    std::string label;
    double value;
    double lower;
    double upper;
    bool pass;
};

struct ValidationReport {
    std::vector<IntervalCheck> checks;
    bool p_valid = true;
    bool regime_valid = true;
    bool cooperative = false;
    bool competitive = false;
    int dimension = 2;
    /// Entries like "p1 >= N": the constructions stay well defined but the
    /// classical theory assumes 1 < p_i < N.
    std::vector<std::string> dimension_advisories;

    bool valid() const { return p_valid && regime_valid; }

    std::string first_failure() const {
        for (const auto& c : checks)
            if (!c.pass) return c.label;
        return {};
    }
};

inline ValidationReport validate_exponents(const ExponentSet& e, int dimension = 2) {
    ValidationReport r;
    r.dimension = dimension;
    const auto open = [&](std::string key, std::string label, double v, double lo, double hi) {
        r.checks.push_back({std::move(key), std::move(label), v, lo, hi, lo < v && v < hi});
    };
    const double inf = std::numeric_limits<double>::infinity();
    open("p1", "p1 > 1", e.p1, 1.0, inf);
    open("p2", "p2 > 1", e.p2, 1.0, inf);
    r.p_valid = r.checks[0].pass && r.checks[1].pass;
    open("alpha1", "-1 < alpha1 < 0", e.alpha1, -1.0, 0.0);
    open("beta2", "-1 < beta2 < 0", e.beta2, -1.0, 0.0);
    open("beta1", "-1 < beta1 < p1-1", e.beta1, -1.0, e.p1 - 1.0);
    open("alpha2", "-1 < alpha2 < p2-1", e.alpha2, -1.0, e.p2 - 1.0);
    r.regime_valid = std::all_of(r.checks.begin() + 2, r.checks.end(),
                                 [](const IntervalCheck& c) { return c.pass; });
    r.cooperative = e.cooperative();
    r.competitive = e.competitive();
    if (e.p1 >= dimension) r.dimension_advisories.push_back("p1 >= N");
    if (e.p2 >= dimension) r.dimension_advisories.push_back("p2 >= N");
    return r;
}

inline bool ExponentSet::satisfies_regime() const { return validate_exponents(*this).valid(); }

/// Compact rendering of a real for diagnostics.
inline std::string show(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

inline void require_p(double p, const char* where) {
    if (!(p > 1.0) || !std::isfinite(p))
        throw ConfigError(std::string(where) + ": p must exceed 1, got " + show(p));
}

}  // namespace lanemden

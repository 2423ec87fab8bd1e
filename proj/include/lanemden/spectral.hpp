#pragma once

// Auxiliary scalar objects used by the barrier constructions: first
// eigenpairs, torsion functions, singular torsion functions and the
// L^∞ boundedness ladder.

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "lanemden/core.hpp"
#include "lanemden/plap.hpp"

namespace lanemden {

struct EigenPair {
    /// Normalized to max φ = 1.
    ScalarField phi;
    double lambda = 0.0;
    BoundaryCondition bc = BoundaryCondition::dirichlet_zero;
    double p = 2.0;
    /// Dirichlet: largest c0 with φ >= c0 d on interior nodes.
    double c0 = 0.0;
    /// Neumann: min φ.
    double mu = 0.0;
    double residual = 0.0;
    int iterations = 0;
    bool analytic = false;
};

/// (Σ ω|∇w|^p + Σ V|w|^p) / Σ V|w|^p over the Dirichlet unknowns.
inline double rayleigh_quotient(const ScalarField& w, double p, double eps_grad = 1e-8) {
    require_p(p, "rayleigh_quotient");
    const PLaplacian op(w.grid_ptr(), p, BoundaryCondition::dirichlet_zero, eps_grad);
    std::vector<double> masked(w.values().begin(), w.values().end());
    for (std::size_t n : w.grid().boundary_nodes()) masked[n] = 0.0;
    const std::vector<double> zero(w.size(), 0.0);
    double mass = 0.0;
    for (std::size_t n : op.unknowns()) mass += op.volume(n) * std::pow(std::abs(masked[n]), p);
    if (!(mass > 0.0)) throw PreconditionError("rayleigh_quotient: field vanishes on the interior");
    return p * op.energy(masked, zero) / mass;
}

namespace detail {

inline double lp_norm(const PLaplacian& op, std::span<const double> w) {
    double s = 0.0;
    for (std::size_t n : op.unknowns()) s += op.volume(n) * std::pow(std::abs(w[n]), op.p());
    return std::pow(s, 1.0 / op.p());
}

/// min over interior nodes of num/den; +∞ when the interior is empty.
inline double min_interior_ratio(const ScalarField& num, const ScalarField& den) {
    double r = std::numeric_limits<double>::infinity();
    for (std::size_t n : num.grid().interior_nodes()) r = std::min(r, num[n] / den[n]);
    return r;
}

}  // namespace detail

/// First Dirichlet eigenpair by inverse power iteration: each step solves
/// A(z) = w^{p-1} and renormalizes in L^p, which decreases the Rayleigh quotient.
inline EigenPair first_eigenpair_dirichlet(const GridPtr& grid, double p, const ScalarSolveConfig& cfg,
                                           const std::optional<ScalarField>& initial = {},
                                           int max_power_iterations = 2000) {
    require_p(p, "first_eigenpair_dirichlet");
    cfg.validate();
    const PLaplacian op(grid, p, BoundaryCondition::dirichlet_zero, cfg.eps_grad);
    const ScalarField dist = distance_field(grid);

    std::vector<double> w;
    if (initial) {
        if (!(initial->grid() == *grid)) throw PreconditionError("first_eigenpair_dirichlet: initial guess grid mismatch");
        w.assign(initial->values().begin(), initial->values().end());
        for (double& x : w) x = std::abs(x);
        for (std::size_t n : grid->boundary_nodes()) w[n] = 0.0;
    } else {
        w.assign(dist.values().begin(), dist.values().end());
    }
    double norm = detail::lp_norm(op, w);
    if (!(norm > 0.0)) throw PreconditionError("first_eigenpair_dirichlet: initial guess vanishes on the interior");
    for (double& x : w) x /= norm;

    ScalarSolveConfig inner = cfg;
    inner.tol_res = 1e-2 * cfg.tol_res;

    std::optional<ScalarField> warm;
    EigenPair out;
    out.bc = BoundaryCondition::dirichlet_zero;
    out.p = p;
    for (int k = 1; k <= max_power_iterations; ++k) {
        std::vector<double> rhs(w.size());
        for (std::size_t n = 0; n < w.size(); ++n) rhs[n] = std::pow(w[n], p - 1.0);
        ScalarSolveResult z = solve_scalar(grid, p, ScalarField(grid, std::move(rhs)),
                                           BoundaryCondition::dirichlet_zero, inner, warm);
        std::vector<double> next(z.solution.values().begin(), z.solution.values().end());
        for (double& x : next) x = std::abs(x);
        norm = detail::lp_norm(op, next);
        if (!(norm > 0.0)) throw InternalError("first_eigenpair_dirichlet: iterate collapsed to zero");
        for (double& x : next) x /= norm;
        warm = z.solution;
        w.swap(next);

        ScalarField iterate(grid, w);
        const double lambda = rayleigh_quotient(iterate, p, cfg.eps_grad);
        const double top = iterate.max();
        ScalarField phi = iterate.scaled(1.0 / top);
        const std::vector<double> applied = op.residual(phi.values(), std::vector<double>(w.size(), 0.0));
        double res = 0.0;
        for (std::size_t n : grid->interior_nodes())
            res = std::max(res, std::abs(applied[n] - lambda * std::pow(phi[n], p - 1.0)));

        out.phi = std::move(phi);
        out.lambda = lambda;
        out.residual = res;
        out.iterations = k;
        if (res <= cfg.tol_res) break;
        if (k == max_power_iterations)
            throw IterationLimitError("first_eigenpair_dirichlet: residual " + show(res), out.phi, res, k);
    }

    for (std::size_t n : grid->interior_nodes())
        if (!(out.phi[n] > 0.0))
            throw InternalError("first_eigenpair_dirichlet: eigenfunction not positive at node " + std::to_string(n));
    out.c0 = detail::min_interior_ratio(out.phi, dist);
    return out;
}

/// Constants solve the Neumann eigenproblem with eigenvalue 1.
inline EigenPair first_eigenpair_neumann(const GridPtr& grid, double p) {
    require_p(p, "first_eigenpair_neumann");
    EigenPair out;
    out.phi = ScalarField(grid, 1.0);
    out.lambda = 1.0;
    out.bc = BoundaryCondition::neumann_zero;
    out.p = p;
    out.mu = 1.0;
    out.residual = 0.0;
    out.analytic = true;
    return out;
}

struct TorsionResult {
    ScalarSolveResult solve;
    BoundaryCondition bc = BoundaryCondition::dirichlet_zero;
    double p = 2.0;
    /// Dirichlet: smallest c > 1 with d/c <= y <= c d. Neumann: smallest ĉ > 1 with φ̂/ĉ <= ŷ <= ĉ φ̂.
    double comparison_constant = 0.0;

    const ScalarField& field() const { return solve.solution; }
};

namespace detail {

/// Smallest c > 1 with ref/c <= y <= c ref on interior nodes.
inline double two_sided_constant(const ScalarField& y, const ScalarField& ref, const char* what) {
    double c = 1.0;
    for (std::size_t n : y.grid().interior_nodes()) {
        if (!(y[n] > 0.0) || !(ref[n] > 0.0))
            throw CertificateError(std::string(what) + ": nonpositive value at interior node " + std::to_string(n) +
                                   ", no finite comparison constant");
        c = std::max({c, y[n] / ref[n], ref[n] / y[n]});
    }
    if (!std::isfinite(c)) throw CertificateError(std::string(what) + ": comparison constant is not finite");
    return c + tol_order;
}

}  // namespace detail

inline TorsionResult torsion(const GridPtr& grid, double p, BoundaryCondition bc, const ScalarSolveConfig& cfg) {
    require_p(p, "torsion");
    TorsionResult out;
    out.bc = bc;
    out.p = p;
    out.solve = solve_scalar(grid, p, ScalarField(grid, 1.0), bc, cfg);
    if (bc == BoundaryCondition::dirichlet_zero)
        out.comparison_constant = detail::two_sided_constant(out.solve.solution, distance_field(grid), "torsion");
    else
        out.comparison_constant =
            detail::two_sided_constant(out.solve.solution, first_eigenpair_neumann(grid, p).phi, "Neumann torsion");
    return out;
}

namespace detail {

/// Mean of d^γ over an axis-aligned box. Where a single side of the domain is
/// nearest on the whole box, d is affine in one coordinate and the mean is
/// exact; elsewhere the box is bisected, down to a midpoint sample.
inline double mean_distance_power(const Grid& g, Point lo, Point hi, double gamma, int depth) {
    const int dim = g.dimension();
    const int corners = 1 << dim;
    auto side_distance = [&](int side, const Point& x) {
        const int a = side / 2;
        return side % 2 == 0 ? x[a] - g.extent(a).lo : g.extent(a).hi - x[a];
    };
    for (int side = 0; side < 2 * dim; ++side) {
        bool nearest = true;
        for (int c = 0; c < corners && nearest; ++c) {
            Point x{};
            for (int a = 0; a < dim; ++a) x[a] = (c >> a) & 1 ? hi[a] : lo[a];
            const double ds = side_distance(side, x);
            for (int other = 0; other < 2 * dim; ++other)
                if (side_distance(other, x) < ds) nearest = false;
        }
        if (!nearest) continue;
        const double t0 = side_distance(side, lo);
        const double t1 = side_distance(side, hi);
        const double a0 = std::max(std::min(t0, t1), 0.0);
        const double a1 = std::max(t0, t1);
        return (std::pow(a1, gamma + 1.0) - std::pow(a0, gamma + 1.0)) / ((gamma + 1.0) * (a1 - a0));
    }
    Point mid{};
    for (int a = 0; a < dim; ++a) mid[a] = 0.5 * (lo[a] + hi[a]);
    if (depth == 0) return std::pow(boundary_distance(g, mid), gamma);
    double sum = 0.0;
    for (int c = 0; c < corners; ++c) {
        Point l = lo, h = hi;
        for (int a = 0; a < dim; ++a) {
            if ((c >> a) & 1) l[a] = mid[a];
            else h[a] = mid[a];
        }
        sum += mean_distance_power(g, l, h, gamma, depth - 1);
    }
    return sum / corners;
}

}  // namespace detail

/// Nodal forcing d(x)^γ: the dual-cell average of the cell means of d^γ over
/// the adjacent primal cells. Boundary nodes are never sampled.
inline ScalarField singular_forcing(const GridPtr& grid, double gamma) {
    const Grid& g = *grid;
    std::vector<double> acc(g.size(), 0.0);
    const double share = g.cell_measure() / (g.dimension() == 1 ? 2.0 : 4.0);
    for (std::size_t c = 0; c < g.cell_count(); ++c) {
        const auto nodes = g.cell_nodes(c);
        const Point lo = g.point(nodes.front());
        const Point hi = g.point(nodes.back());
        const double weight = gamma == 0.0 ? 1.0 : detail::mean_distance_power(g, lo, hi, gamma, 6);
        for (std::size_t n : nodes) acc[n] += share * weight;
    }
    for (std::size_t n = 0; n < acc.size(); ++n) acc[n] /= g.dual_volume(n);
    return ScalarField(grid, std::move(acc));
}

struct SingularTorsionResult {
    ScalarSolveResult solve;
    double p = 2.0;
    double gamma = 0.0;
    /// Largest c1 with ẑ >= c1 φ̂; with φ̂ ≡ 1 this is min ẑ.
    double c1 = 0.0;

    const ScalarField& field() const { return solve.solution; }
};

inline void require_singular_exponent(double gamma) {
    if (!(gamma > -1.0 && gamma <= 0.0))
        throw ConfigError("singular exponent gamma must lie in (-1, 0], got " + show(gamma));
}

/// Neumann problem -Δ_p ẑ + ẑ^{p-1} = d(x)^γ.
inline SingularTorsionResult singular_torsion(const GridPtr& grid, double p, double gamma,
                                              const ScalarSolveConfig& cfg) {
    require_p(p, "singular_torsion");
    require_singular_exponent(gamma);
    SingularTorsionResult out;
    out.p = p;
    out.gamma = gamma;
    out.solve = solve_scalar(grid, p, singular_forcing(grid, gamma), BoundaryCondition::neumann_zero, cfg);
    out.c1 = out.solve.solution.min();
    if (!(out.c1 > 0.0)) throw CertificateError("singular_torsion: solution is not positive, c1 = " + show(out.c1));
    return out;
}

struct BoundednessReport {
    double gamma = 0.0;
    int dimension = 1;
    double p = 2.0;
    /// γ > -1/N.
    bool bounded_regime = false;
    std::vector<double> spacings;
    std::vector<double> sup_norms;
    /// |s_fine - s_prev| / s_fine between the two finest levels.
    double drift = 0.0;

    std::string verdict() const { return bounded_regime ? "bounded (gamma > -1/N)" : "no boundedness guarantee"; }
};

inline BoundednessReport boundedness_check(const std::vector<GridPtr>& ladder, double p, double gamma,
                                           const ScalarSolveConfig& cfg, unsigned threads = 1) {
    require_p(p, "boundedness_check");
    require_singular_exponent(gamma);
    if (ladder.size() < 3) throw ConfigError("boundedness_check needs at least 3 refinement levels");
    for (const auto& g : ladder) {
        if (g->kind() != ladder.front()->kind())
            throw ConfigError("boundedness_check: ladder mixes domain kinds");
        for (int a = 0; a < g->dimension(); ++a)
            if (!(g->extent(a) == ladder.front()->extent(a)))
                throw ConfigError("boundedness_check: ladder levels cover different domains");
    }

    BoundednessReport r;
    r.gamma = gamma;
    r.p = p;
    r.dimension = ladder.front()->dimension();
    r.bounded_regime = gamma > -1.0 / r.dimension;
    r.sup_norms.resize(ladder.size());
    for (const auto& g : ladder) r.spacings.push_back(g->spacing(0));

    auto level = [&](std::size_t k) { return singular_torsion(ladder[k], p, gamma, cfg).field().sup_norm(); };
    if (threads > 1) {
        std::vector<std::future<double>> jobs;
        for (std::size_t k = 0; k < ladder.size(); ++k) jobs.push_back(std::async(std::launch::async, level, k));
        for (std::size_t k = 0; k < ladder.size(); ++k) r.sup_norms[k] = jobs[k].get();
    } else {
        for (std::size_t k = 0; k < ladder.size(); ++k) r.sup_norms[k] = level(k);
    }
    const double fine = r.sup_norms.back();
    const double prev = r.sup_norms[r.sup_norms.size() - 2];
    r.drift = std::abs(fine - prev) / std::abs(fine);
    return r;
}

}  // namespace lanemden

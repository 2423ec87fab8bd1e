#pragma once

// Scalar problems -Δ_p w + |w|^{p-2} w = f with zero Dirichlet or zero Neumann
// data. The discrete operator is the gradient of a convex energy:
//
//   J(w) = Σ_s ω_s ψ(|g_s|²)/p + Σ_n V_n (χ(w_n)/p - f_n w_n)
//
// where each gradient sample g_s is a one-sided difference (1D: one per edge,
// ω = h; 2D: one per cell corner built from the two cell edges meeting there,
// ω = h_x h_y / 4) and V_n is the lumped dual-cell volume. In 2D this is the
// average of the two diagonal P1 triangulations with mass lumping; for p = 2 it
// reduces to the 5-point stencil. Neumann rows are the natural boundary
// conditions of J, which coincide with ghost-node reflection w_ghost = w_inner.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "lanemden/core.hpp"

namespace lanemden {

enum class BoundaryCondition { dirichlet_zero, neumann_zero };

inline std::string to_string(BoundaryCondition bc) {
    return bc == BoundaryCondition::dirichlet_zero ? "dirichlet" : "neumann";
}

struct ScalarSolveConfig {
    /// Gradient smoothing inside |∇w|^{p-2}; only active for p < 2.
    double eps_grad = 1e-8;
    /// Sup-norm bound on the nodal residual.
    double tol_res = 1e-9;
    int max_inner_iterations = 200;
    /// Initial Newton step length, halved on energy increase.
    double damping = 1.0;

    void validate() const {
        if (!(tol_res > 0.0)) throw ConfigError("tol_res must be positive");
        if (max_inner_iterations < 1) throw ConfigError("max_inner_iterations must be >= 1");
        if (!(damping > 0.0 && damping <= 1.0)) throw ConfigError("damping must lie in (0, 1]");
        if (!(eps_grad >= 0.0)) throw ConfigError("eps_grad must be nonnegative");
    }
};

struct ScalarSolveResult {
    ScalarField solution;
    double residual = 0.0;
    int iterations = 0;
    double energy = 0.0;
    double eps_grad = 0.0;
    /// Energy of the initial iterate followed by every accepted step.
    std::vector<double> energy_history;
};

/// Inner solver ran out of iterations; carries the best iterate found.
class IterationLimitError : public Error {
public:
    IterationLimitError(const std::string& what, ScalarField best, double residual, int iterations)
        : Error(what), best_(std::move(best)), residual_(residual), iterations_(iterations) {}

    const ScalarField& best_iterate() const { return best_; }
    double residual() const { return residual_; }
    int iterations() const { return iterations_; }

private:
    ScalarField best_;
    double residual_;
    int iterations_;
};

namespace detail {

struct GradientSample {
    double weight;
    int axes;
    std::array<std::size_t, 2> from;
    std::array<std::size_t, 2> to;
    std::array<double, 2> inv_h;
};

inline std::vector<GradientSample> gradient_samples(const Grid& g) {
    std::vector<GradientSample> out;
    if (g.dimension() == 1) {
        const double h = g.spacing(0);
        out.reserve(g.count(0) - 1);
        for (std::size_t i = 0; i + 1 < g.count(0); ++i)
            out.push_back({h, 1, {i, 0}, {i + 1, 0}, {1.0 / h, 0.0}});
        return out;
    }
    const double hx = g.spacing(0);
    const double hy = g.spacing(1);
    const double w = 0.25 * hx * hy;
    out.reserve(4 * g.cell_count());
    for (std::size_t j = 0; j + 1 < g.count(1); ++j) {
        for (std::size_t i = 0; i + 1 < g.count(0); ++i) {
            const std::size_t ll = g.index(i, j), lr = g.index(i + 1, j);
            const std::size_t ul = g.index(i, j + 1), ur = g.index(i + 1, j + 1);
            const std::array<double, 2> ih{1.0 / hx, 1.0 / hy};
            out.push_back({w, 2, {ll, ll}, {lr, ul}, ih});
            out.push_back({w, 2, {ll, lr}, {lr, ur}, ih});
            out.push_back({w, 2, {ul, ll}, {ur, ul}, ih});
            out.push_back({w, 2, {ul, lr}, {ur, ur}, ih});
        }
    }
    return out;
}

}  // namespace detail

/// Discrete operator w ↦ -Δ_p w + |w|^{p-2}w on a fixed grid and boundary condition.
class PLaplacian {
public:
    PLaplacian(GridPtr grid, double p, BoundaryCondition bc, double eps_grad = 1e-8)
        : grid_(std::move(grid)), p_(p), bc_(bc), eps_(p < 2.0 ? eps_grad : 0.0),
          samples_(detail::gradient_samples(*grid_)) {
        require_p(p, "PLaplacian");
        volume_.resize(grid_->size());
        active_.assign(grid_->size(), -1);
        for (std::size_t n = 0; n < grid_->size(); ++n) {
            volume_[n] = grid_->dual_volume(n);
            if (bc_ == BoundaryCondition::neumann_zero || !grid_->is_boundary(n))
                active_[n] = static_cast<long>(unknowns_.size()), unknowns_.push_back(n);
        }
    }

    const GridPtr& grid_ptr() const { return grid_; }
    double p() const { return p_; }
    BoundaryCondition bc() const { return bc_; }
    double eps() const { return eps_; }
    std::size_t unknown_count() const { return unknowns_.size(); }
    double volume(std::size_t n) const { return volume_[n]; }

    double energy(std::span<const double> w, std::span<const double> f) const {
        double grad_part = 0.0;
        for (const auto& s : samples_) grad_part += s.weight * density(squared_gradient(s, w));
        double node_part = 0.0;
        for (std::size_t n : unknowns_)
            node_part += volume_[n] * (density(w[n] * w[n]) / p_ - f[n] * w[n]);
        return grad_part / p_ + node_part;
    }

    /// ∂J/∂w on active nodes; zero on Dirichlet boundary nodes.
    std::vector<double> gradient(std::span<const double> w, std::span<const double> f) const {
        std::vector<double> g = diffusion_part(w);
        for (std::size_t n = 0; n < g.size(); ++n) {
            if (active_[n] < 0) {
                g[n] = 0.0;
                continue;
            }
            g[n] += volume_[n] * (flux_factor(w[n] * w[n]) * w[n] - f[n]);
        }
        return g;
    }

    /// Nodal strong-form residual; Dirichlet boundary rows report w itself.
    std::vector<double> residual(std::span<const double> w, std::span<const double> f) const {
        std::vector<double> r = diffusion_part(w);
        for (std::size_t n = 0; n < r.size(); ++n) {
            if (active_[n] < 0) {
                r[n] = w[n];
                continue;
            }
            r[n] = r[n] / volume_[n] + flux_factor(w[n] * w[n]) * w[n] - f[n];
        }
        return r;
    }

    /// -Δ_p w + |w|^{p-2}w at every node using the Neumann (natural) rows.
    std::vector<double> apply(std::span<const double> w) const {
        std::vector<double> r = diffusion_part(w);
        for (std::size_t n = 0; n < r.size(); ++n)
            r[n] = r[n] / volume_[n] + flux_factor(w[n] * w[n]) * w[n];
        return r;
    }

    /// Hessian of J restricted to active unknowns.
    Eigen::SparseMatrix<double> hessian(std::span<const double> w) const {
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(samples_.size() * 16 + unknowns_.size());
        for (const auto& s : samples_) {
            double g[2] = {0.0, 0.0};
            double t = 0.0;
            for (int m = 0; m < s.axes; ++m) {
                g[m] = (w[s.to[m]] - w[s.from[m]]) * s.inv_h[m];
                t += g[m] * g[m];
            }
            const double a = flux_factor(t);
            const double b = flux_curvature(t);
            for (int m = 0; m < s.axes; ++m) {
                for (int k = 0; k < s.axes; ++k) {
                    const double hg = s.weight * ((m == k ? a : 0.0) + b * g[m] * g[k]) *
                                      s.inv_h[m] * s.inv_h[k];
                    if (hg == 0.0) continue;
                    const std::size_t mn[2] = {s.from[m], s.to[m]};
                    const std::size_t kn[2] = {s.from[k], s.to[k]};
                    for (int x = 0; x < 2; ++x) {
                        const long r = active_[mn[x]];
                        if (r < 0) continue;
                        for (int y = 0; y < 2; ++y) {
                            const long c = active_[kn[y]];
                            if (c < 0) continue;
                            const double sign = (x == y) ? 1.0 : -1.0;
                            trip.emplace_back(r, c, sign * hg);
                        }
                    }
                }
            }
        }
        for (std::size_t n : unknowns_) {
            const double t = w[n] * w[n];
            const double d = (p_ < 2.0) ? std::pow(t + eps_ * eps_, 0.5 * (p_ - 4.0)) *
                                              ((p_ - 1.0) * t + eps_ * eps_)
                                        : (p_ - 1.0) * power(t, 0.5 * (p_ - 2.0));
            trip.emplace_back(active_[n], active_[n], volume_[n] * d);
        }
        const auto m = static_cast<Eigen::Index>(unknowns_.size());
        Eigen::SparseMatrix<double> H(m, m);
        H.setFromTriplets(trip.begin(), trip.end());
        return H;
    }

    std::span<const std::size_t> unknowns() const { return unknowns_; }
    long active_index(std::size_t n) const { return active_[n]; }

private:
    static double power(double t, double e) {
        if (e == 0.0) return 1.0;
        return t > 0.0 ? std::pow(t, e) : 0.0;
    }

    /// a(t) with t = |g|²: the factor |g|^{p-2} (regularized for p < 2).
    double flux_factor(double t) const {
        if (p_ == 2.0) return 1.0;
        if (p_ < 2.0) return std::pow(t + eps_ * eps_, 0.5 * (p_ - 2.0));
        return power(t, 0.5 * (p_ - 2.0));
    }

    /// 2 a'(t), the rank-one curvature coefficient of the flux.
    double flux_curvature(double t) const {
        if (p_ == 2.0) return 0.0;
        if (p_ < 2.0) return (p_ - 2.0) * std::pow(t + eps_ * eps_, 0.5 * (p_ - 4.0));
        return t > 0.0 ? (p_ - 2.0) * std::pow(t, 0.5 * (p_ - 4.0)) : 0.0;
    }

    /// ψ(t) = |g|^p, shifted so ψ(0) = 0 under regularization.
    double density(double t) const {
        if (p_ < 2.0) return std::pow(t + eps_ * eps_, 0.5 * p_) - std::pow(eps_, p_);
        return power(t, 0.5 * p_);
    }

    double squared_gradient(const detail::GradientSample& s, std::span<const double> w) const {
        double t = 0.0;
        for (int m = 0; m < s.axes; ++m) {
            const double g = (w[s.to[m]] - w[s.from[m]]) * s.inv_h[m];
            t += g * g;
        }
        return t;
    }

    /// Σ_s ω_s a(|g_s|²) g_s · ∂g_s/∂w_n, accumulated per node.
    std::vector<double> diffusion_part(std::span<const double> w) const {
        if (w.size() != grid_->size()) throw PreconditionError("field size does not match grid");
        std::vector<double> out(grid_->size(), 0.0);
        for (const auto& s : samples_) {
            double g[2] = {0.0, 0.0};
            double t = 0.0;
            for (int m = 0; m < s.axes; ++m) {
                g[m] = (w[s.to[m]] - w[s.from[m]]) * s.inv_h[m];
                t += g[m] * g[m];
            }
            const double a = s.weight * flux_factor(t);
            for (int m = 0; m < s.axes; ++m) {
                const double q = a * g[m] * s.inv_h[m];
                out[s.to[m]] += q;
                out[s.from[m]] -= q;
            }
        }
        return out;
    }

    GridPtr grid_;
    double p_;
    BoundaryCondition bc_;
    double eps_;
    std::vector<detail::GradientSample> samples_;
    std::vector<double> volume_;
    std::vector<long> active_;
    std::vector<std::size_t> unknowns_;
};

inline void require_dirichlet_trace(const ScalarField& w, BoundaryCondition bc, const char* where) {
    if (bc != BoundaryCondition::dirichlet_zero) return;
    for (std::size_t n : w.grid().boundary_nodes())
        if (w[n] != 0.0)
            throw PreconditionError(std::string(where) + ": Dirichlet field is nonzero on boundary node " +
                                    std::to_string(n));
}

inline double discrete_energy(const ScalarField& w, const ScalarField& f, double p, BoundaryCondition bc,
                              double eps_grad = 1e-8) {
    require_p(p, "discrete_energy");
    require_same_grid(w, f, "discrete_energy");
    require_dirichlet_trace(w, bc, "discrete_energy");
    return PLaplacian(w.grid_ptr(), p, bc, eps_grad).energy(w.values(), f.values());
}

inline ScalarField nodal_residual(const ScalarField& w, double p, const ScalarField& f, BoundaryCondition bc,
                                  double eps_grad = 1e-8) {
    require_p(p, "nodal_residual");
    require_same_grid(w, f, "nodal_residual");
    return ScalarField(w.grid_ptr(), PLaplacian(w.grid_ptr(), p, bc, eps_grad).residual(w.values(), f.values()));
}

/// -Δ_p w + |w|^{p-2}w with natural boundary rows; interior rows are boundary-condition free.
inline ScalarField apply_operator(const ScalarField& w, double p, double eps_grad = 1e-8) {
    require_p(p, "apply_operator");
    return ScalarField(w.grid_ptr(),
                       PLaplacian(w.grid_ptr(), p, BoundaryCondition::neumann_zero, eps_grad).apply(w.values()));
}

namespace detail {

inline double sup_abs(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s = std::max(s, std::abs(x));
    return s;
}

/// Newton direction on the active unknowns; empty when factorization fails.
inline std::vector<double> newton_direction(const PLaplacian& op, std::span<const double> w,
                                            const std::vector<double>& grad) {
    Eigen::SparseMatrix<double> H = op.hessian(w);
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(op.unknown_count()));
    for (std::size_t k = 0; k < op.unknown_count(); ++k) rhs[static_cast<Eigen::Index>(k)] = -grad[op.unknowns()[k]];

    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
    double shift = 0.0;
    for (int attempt = 0; attempt < 6; ++attempt) {
        Eigen::SparseMatrix<double> A = H;
        if (shift > 0.0)
            for (Eigen::Index k = 0; k < A.rows(); ++k) A.coeffRef(k, k) += shift;
        ldlt.compute(A);
        if (ldlt.info() == Eigen::Success && (ldlt.vectorD().array() > 0.0).all()) {
            Eigen::VectorXd d = ldlt.solve(rhs);
            if (ldlt.info() == Eigen::Success && d.allFinite()) {
                std::vector<double> out(w.size(), 0.0);
                for (std::size_t k = 0; k < op.unknown_count(); ++k)
                    out[op.unknowns()[k]] = d[static_cast<Eigen::Index>(k)];
                return out;
            }
        }
        double diag = 0.0;
        for (Eigen::Index k = 0; k < H.rows(); ++k) diag = std::max(diag, std::abs(H.coeff(k, k)));
        shift = shift == 0.0 ? 1e-12 * std::max(diag, 1.0) : shift * 100.0;
    }
    return {};
}

inline std::vector<double> initial_iterate(const ScalarField& f, double p, BoundaryCondition bc) {
    std::vector<double> w(f.size());
    for (std::size_t n = 0; n < w.size(); ++n) {
        const double fn = f[n];
        w[n] = std::copysign(std::pow(std::abs(fn), 1.0 / (p - 1.0)), fn);
        if (bc == BoundaryCondition::dirichlet_zero && f.grid().is_boundary(n)) w[n] = 0.0;
    }
    return w;
}

}  // namespace detail

namespace detail {

struct MinimizeOutcome {
    double energy = 0.0;
    double residual = 0.0;
    int iterations = 0;
    bool stalled = false;
    std::vector<double> history;
};

/// Damped Newton with energy line search on `w` in place, falling back to
/// volume-scaled gradient descent when Newton cannot descend.
inline MinimizeOutcome minimize(const PLaplacian& op, std::vector<double>& w, std::span<const double> fv, double tol,
                                int max_iterations, double damping) {
    MinimizeOutcome out;
    double J = op.energy(w, fv);
    out.history.push_back(J);
    double res = sup_abs(op.residual(w, fv));

    int it = 0;
    // Residual progress is tracked so that a roundoff plateau ends the loop early.
    double best = res;
    int flat = 0;
    while (res > tol && it < max_iterations) {
        ++it;
        const std::vector<double> grad = op.gradient(w, fv);
        const double slack = 1e-13 * (1.0 + std::abs(J));
        const double J_before = J;

        auto try_direction = [&](const std::vector<double>& d, double t0) -> bool {
            double t = t0;
            std::vector<double> trial(w.size());
            for (int halving = 0; halving < 50; ++halving, t *= 0.5) {
                for (std::size_t n = 0; n < w.size(); ++n) trial[n] = w[n] + t * d[n];
                const double Jt = op.energy(trial, fv);
                if (std::isfinite(Jt) && Jt <= J + slack) {
                    w.swap(trial);
                    J = Jt;
                    return true;
                }
            }
            return false;
        };

        bool accepted = false;
        std::vector<double> d = newton_direction(op, w, grad);
        if (!d.empty()) {
            double slope = 0.0;
            for (std::size_t n = 0; n < w.size(); ++n) slope += d[n] * grad[n];
            if (slope < 0.0) accepted = try_direction(d, damping);
        }
        if (!accepted) {
            std::vector<double> sd(w.size(), 0.0);
            for (std::size_t n = 0; n < w.size(); ++n) sd[n] = -grad[n] / op.volume(n);
            accepted = try_direction(sd, 1.0);
        }
        if (!accepted) {
            out.stalled = true;
            break;
        }
        out.history.push_back(J);
        res = sup_abs(op.residual(w, fv));
        if (res < 0.5 * best || J < J_before - 1e-11 * (1.0 + std::abs(J))) {
            best = std::min(best, res);
            flat = 0;
        } else if (++flat >= 12) {
            out.stalled = true;
            break;
        }
    }
    out.energy = J;
    out.residual = res;
    out.iterations = it;
    return out;
}

}  // namespace detail

/// Minimizes the discrete energy. For p < 2 the regularization is first
/// relaxed and then tightened decade by decade, each stage warm-starting the next;
/// the reported energy history and iteration count belong to the final stage.
inline ScalarSolveResult solve_scalar(const GridPtr& grid, double p, const ScalarField& f, BoundaryCondition bc,
                                      const ScalarSolveConfig& cfg, const std::optional<ScalarField>& initial = {}) {
    require_p(p, "solve_scalar");
    cfg.validate();
    if (f.size() != grid->size() || !(f.grid() == *grid))
        throw PreconditionError("solve_scalar: forcing lives on a different grid");

    const PLaplacian op(grid, p, bc, cfg.eps_grad);
    std::vector<double> w;
    if (initial) {
        require_same_grid(*initial, f, "solve_scalar");
        w.assign(initial->values().begin(), initial->values().end());
        if (bc == BoundaryCondition::dirichlet_zero)
            for (std::size_t n : grid->boundary_nodes()) w[n] = 0.0;
    } else {
        w = p < 2.0 ? std::vector<double>(grid->size(), 0.0) : detail::initial_iterate(f, p, bc);
    }
    const auto fv = f.values();

    if (p < 2.0 && detail::sup_abs(op.residual(w, fv)) > cfg.tol_res) {
        const double stage_tol = std::max(cfg.tol_res, 1e-6);
        for (double eps = 1e-1; eps > 10.0 * op.eps(); eps *= 0.1) {
            std::vector<double> trial = w;
            const auto stage = detail::minimize(PLaplacian(grid, p, bc, eps), trial, fv, stage_tol,
                                                cfg.max_inner_iterations, cfg.damping);
            if (std::isfinite(stage.energy)) w.swap(trial);
        }
    }

    const auto out = detail::minimize(op, w, fv, cfg.tol_res, cfg.max_inner_iterations, cfg.damping);

    ScalarSolveResult result;
    result.eps_grad = op.eps();
    result.iterations = out.iterations;
    result.residual = out.residual;
    result.energy = out.energy;
    result.energy_history = out.history;
    result.solution = ScalarField(grid, std::move(w));
    if (out.residual > cfg.tol_res) {
        throw IterationLimitError(std::string("solve_scalar: ") + (out.stalled ? "line search stalled" : "iteration limit") +
                                      " with residual " + show(out.residual),
                                  result.solution, out.residual, out.iterations);
    }
    return result;
}

}  // namespace lanemden

#pragma once

// Truncated fixed-point iteration for the coupled Neumann system inside a
// certified barrier rectangle, and the two-start uniqueness experiment.

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "lanemden/bounds.hpp"
#include "lanemden/core.hpp"
#include "lanemden/plap.hpp"

namespace lanemden {

/// Nodewise clamp of z into [lower, upper].
inline ScalarField truncate(const ScalarField& z, const ScalarField& lower, const ScalarField& upper) {
    require_same_grid(z, lower, "truncate");
    require_same_grid(z, upper, "truncate");
    std::vector<double> out(z.size());
    for (std::size_t n = 0; n < z.size(); ++n) {
        if (lower[n] > upper[n] + tol_order)
            throw PreconditionError("truncate: lower exceeds upper at node " + std::to_string(n));
        out[n] = std::clamp(z[n], lower[n], std::max(lower[n], upper[n]));
    }
    return ScalarField(z.grid_ptr(), std::move(out));
}

namespace detail {

inline double checked_power(double base, double a, std::size_t node, const char* what) {
    if (a == 0.0) return 1.0;
    if (base < 0.0 || (base == 0.0 && a < 0.0))
        throw SingularityError(std::string(what) + ": base " + show(base) + " raised to " + show(a) + " at node " +
                                   std::to_string(node),
                               node);
    return std::pow(base, a);
}

inline ScalarField power_sum(const ScalarField& u, const ScalarField& v, double a, double b, const char* what) {
    require_same_grid(u, v, what);
    std::vector<double> out(u.size());
    for (std::size_t n = 0; n < u.size(); ++n)
        out[n] = checked_power(u[n], a, n, what) + checked_power(v[n], b, n, what);
    return ScalarField(u.grid_ptr(), std::move(out));
}

}  // namespace detail

/// u^α1 + v^β1.
inline ScalarField rhs_f1(const ScalarField& u, const ScalarField& v, const ExponentSet& e) {
    return detail::power_sum(u, v, e.alpha1, e.beta1, "rhs_f1");
}

/// u^α2 + v^β2.
inline ScalarField rhs_f2(const ScalarField& u, const ScalarField& v, const ExponentSet& e) {
    return detail::power_sum(u, v, e.alpha2, e.beta2, "rhs_f2");
}

enum class StartKind { from_lower, from_upper, custom };

inline std::string to_string(StartKind s) {
    switch (s) {
        case StartKind::from_lower: return "from_lower";
        case StartKind::from_upper: return "from_upper";
        case StartKind::custom: return "custom";
    }
    return "?";
}

struct FixedPointConfig {
    double tol_outer = 1e-8;
    int max_outer_iterations = 500;
    StartKind start = StartKind::from_lower;
    /// Used when start == custom.
    std::optional<std::pair<ScalarField, ScalarField>> custom_start;
    ScalarSolveConfig inner;
    /// Relaxation: iterate <- (1-θ) old + θ new.
    double theta = 1.0;
    /// Slack of the enclosure verdict.
    double enclosure_tol = tol_order;
    /// > 1 runs the two inner solves of an outer step concurrently.
    unsigned threads = 1;

    void validate() const {
        if (!(tol_outer > 0.0)) throw ConfigError("tol_outer must be positive");
        if (max_outer_iterations < 1) throw ConfigError("max_outer_iterations must be at least 1");
        if (!(theta > 0.0 && theta <= 1.0)) throw ConfigError("theta must lie in (0, 1]");
        if (start == StartKind::custom && !custom_start) throw ConfigError("custom start requires fields");
        inner.validate();
    }
};

struct SystemSolution {
    ScalarField u, v;
    int outer_iterations = 0;
    double final_change = std::numeric_limits<double>::infinity();
    std::vector<double> change_history;
    bool converged = false;
    double residual_u = 0.0;
    double residual_v = 0.0;
    bool enclosed = false;
    /// Worst excursion outside the barrier rectangle (<= 0 when inside).
    double enclosure_margin = 0.0;
    /// Sup of one-sided normal differences over non-corner boundary nodes.
    double flux_norm = 0.0;
    double flux_bound = 0.0;
    StartKind start = StartKind::from_lower;
};

/// Sup over non-corner boundary nodes of |(w_b - w_in)/h|.
inline double boundary_flux_norm(const ScalarField& w) {
    const Grid& g = w.grid();
    double s = 0.0;
    for (std::size_t n : g.boundary_nodes()) {
        if (g.is_corner(n)) continue;
        const auto [axis, in] = g.inward_neighbor(n);
        s = std::max(s, std::abs(w[n] - w[in]) / g.spacing(axis));
    }
    return s;
}

namespace detail {

inline double excursion(const ScalarField& w, const ScalarField& lo, const ScalarField& hi) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t n = 0; n < w.size(); ++n) m = std::max({m, lo[n] - w[n], w[n] - hi[n]});
    return m;
}

}  // namespace detail

/// Picard iteration u_{k+1} = S_1(f1(T u_k, T v_k)), v_{k+1} = S_2(f2(T u_k, T v_k)) with Neumann inner solves.
inline SystemSolution solve_system(const GridPtr& grid, const ExponentSet& e, const SubSupPair& pair,
                                   const FixedPointConfig& cfg) {
    const auto report = validate_exponents(e);
    if (!report.valid()) throw PreconditionError("solve_system: exponents violate " + report.first_failure());
    cfg.validate();
    for (const ScalarField* f : {&pair.u_lower, &pair.v_lower, &pair.u_upper, &pair.v_upper})
        if (!(f->grid() == *grid)) throw PreconditionError("solve_system: barrier fields live on a different grid");

    ScalarField u, v;
    switch (cfg.start) {
        case StartKind::from_lower: u = pair.u_lower, v = pair.v_lower; break;
        case StartKind::from_upper: u = pair.u_upper, v = pair.v_upper; break;
        case StartKind::custom:
            u = cfg.custom_start->first;
            v = cfg.custom_start->second;
            require_same_grid(u, pair.u_lower, "solve_system");
            require_same_grid(v, pair.v_lower, "solve_system");
            break;
    }

    SystemSolution out;
    out.start = cfg.start;
    std::optional<ScalarField> warm_u, warm_v;
    for (int k = 1; k <= cfg.max_outer_iterations; ++k) {
        const ScalarField tu = truncate(u, pair.u_lower, pair.u_upper);
        const ScalarField tv = truncate(v, pair.v_lower, pair.v_upper);
        const ScalarField f1 = rhs_f1(tu, tv, e);
        const ScalarField f2 = rhs_f2(tu, tv, e);

        auto solve_u = [&] { return solve_scalar(grid, e.p1, f1, BoundaryCondition::neumann_zero, cfg.inner, warm_u); };
        auto solve_v = [&] { return solve_scalar(grid, e.p2, f2, BoundaryCondition::neumann_zero, cfg.inner, warm_v); };
        ScalarSolveResult ru, rv;
        if (cfg.threads > 1) {
            auto job = std::async(std::launch::async, solve_v);
            ru = solve_u();
            rv = job.get();
        } else {
            ru = solve_u();
            rv = solve_v();
        }

        std::vector<double> nu(u.size()), nv(v.size());
        double change = 0.0;
        for (std::size_t n = 0; n < u.size(); ++n) {
            nu[n] = (1.0 - cfg.theta) * u[n] + cfg.theta * ru.solution[n];
            nv[n] = (1.0 - cfg.theta) * v[n] + cfg.theta * rv.solution[n];
            change = std::max({change, std::abs(nu[n] - u[n]), std::abs(nv[n] - v[n])});
        }
        u = ScalarField(grid, std::move(nu));
        v = ScalarField(grid, std::move(nv));
        warm_u = ru.solution;
        warm_v = rv.solution;
        out.outer_iterations = k;
        out.final_change = change;
        out.change_history.push_back(change);
        if (change < cfg.tol_outer) {
            out.converged = true;
            break;
        }
    }

    const ScalarField tu = truncate(u, pair.u_lower, pair.u_upper);
    const ScalarField tv = truncate(v, pair.v_lower, pair.v_upper);
    out.residual_u = nodal_residual(u, e.p1, rhs_f1(tu, tv, e), BoundaryCondition::neumann_zero, cfg.inner.eps_grad).sup_norm();
    out.residual_v = nodal_residual(v, e.p2, rhs_f2(tu, tv, e), BoundaryCondition::neumann_zero, cfg.inner.eps_grad).sup_norm();
    out.enclosure_margin = std::max(detail::excursion(u, pair.u_lower, pair.u_upper),
                                    detail::excursion(v, pair.v_lower, pair.v_upper));
    out.enclosed = out.enclosure_margin <= cfg.enclosure_tol;
    out.flux_norm = std::max(boundary_flux_norm(u), boundary_flux_norm(v));
    double h = 0.0;
    for (int a = 0; a < grid->dimension(); ++a) h = std::max(h, grid->spacing(a));
    out.flux_bound = 10.0 * h;
    out.u = std::move(u);
    out.v = std::move(v);
    if (out.converged && !out.enclosed)
        throw EnclosureError("solve_system: converged solution leaves the barrier rectangle by " +
                             show(out.enclosure_margin));
    return out;
}

/// Sup-distance between (u, v) and one more decoupled solve driven by (u, v).
inline double fixed_point_defect(const SystemSolution& s, const ExponentSet& e, const SubSupPair& pair,
                                 const ScalarSolveConfig& inner) {
    const GridPtr grid = s.u.grid_ptr();
    const ScalarField tu = truncate(s.u, pair.u_lower, pair.u_upper);
    const ScalarField tv = truncate(s.v, pair.v_lower, pair.v_upper);
    const auto ru = solve_scalar(grid, e.p1, rhs_f1(tu, tv, e), BoundaryCondition::neumann_zero, inner, s.u);
    const auto rv = solve_scalar(grid, e.p2, rhs_f2(tu, tv, e), BoundaryCondition::neumann_zero, inner, s.v);
    return std::max(sup_distance(ru.solution, s.u), sup_distance(rv.solution, s.v));
}

enum class GateVerdict { pass, fail, inapplicable };

inline std::string to_string(GateVerdict g) {
    switch (g) {
        case GateVerdict::pass: return "pass";
        case GateVerdict::fail: return "fail";
        case GateVerdict::inapplicable: return "inapplicable";
    }
    return "?";
}

struct UniquenessGate {
    GateVerdict verdict = GateVerdict::inapplicable;
    double gamma1 = 0.0;
    double gamma2 = 0.0;
    std::optional<double> gamma_hat1;
    std::optional<double> gamma_hat2;
};

/// Applicable iff α₂, β₁ ∈ (-1, 0); passes iff γ̂_i < p_i - 1 for both i.
inline UniquenessGate uniqueness_gate(const ExponentSet& e) {
    UniquenessGate g;
    g.gamma1 = e.gamma1();
    g.gamma2 = e.gamma2();
    const bool applicable = e.alpha2 > -1.0 && e.alpha2 < 0.0 && e.beta1 > -1.0 && e.beta1 < 0.0;
    if (!applicable) return g;
    g.gamma_hat1 = e.gamma_hat(1);
    g.gamma_hat2 = e.gamma_hat(2);
    g.verdict = (*g.gamma_hat1 < e.p1 - 1.0 && *g.gamma_hat2 < e.p2 - 1.0) ? GateVerdict::pass : GateVerdict::fail;
    return g;
}

/// Largest c with c u₂ <= u₁ and c v₂ <= v₁.
inline double krasnoselskii_tau(const SystemSolution& s1, const SystemSolution& s2) {
    require_same_grid(s1.u, s2.u, "krasnoselskii_tau");
    double tau = std::numeric_limits<double>::infinity();
    for (const ScalarField* f : {&s1.u, &s1.v, &s2.u, &s2.v})
        if (!(f->min() > 0.0)) throw PreconditionError("krasnoselskii_tau: fields must be strictly positive");
    for (std::size_t n = 0; n < s1.u.size(); ++n) tau = std::min({tau, s1.u[n] / s2.u[n], s1.v[n] / s2.v[n]});
    return tau;
}

struct ScalingRound {
    bool applicable = true;
    double exponent_u = 0.0;
    double exponent_v = 0.0;
    /// min over nodes of (dominating - τ^a dominated); >= -tol passes.
    double margin_u = 0.0;
    double margin_v = 0.0;
    bool pass = false;
};

struct ScalingReport {
    double tau = 1.0;
    ScalingRound first;
    ScalingRound second;
    bool pass = false;
};

/// Round 1: u₂ >= τ^{γ1/(p1-1)} u₁ and v₂ >= τ^{γ2/(p2-1)} v₁.
/// Round 2: u₁ >= τ^{γ̂1/(p1-1)} u₂ and v₁ >= τ^{γ̂2/(p2-1)} v₂ (needs α₂, β₁ < 0).
inline ScalingReport scaling_comparison_check(const SystemSolution& s1, const SystemSolution& s2, double tau,
                                              const ExponentSet& e, double tol = 1e-7) {
    if (!(tau > 0.0 && tau <= 1.0)) throw PreconditionError("scaling_comparison_check: tau must lie in (0, 1]");
    for (const ScalarField* f : {&s1.u, &s1.v, &s2.u, &s2.v})
        if (!(f->min() > 0.0)) throw PreconditionError("scaling_comparison_check: fields must be strictly positive");

    auto margin = [&](const ScalarField& big, const ScalarField& small, double a) {
        const double scale = std::pow(tau, a);
        double m = std::numeric_limits<double>::infinity();
        for (std::size_t n = 0; n < big.size(); ++n) m = std::min(m, big[n] - scale * small[n]);
        return m;
    };

    ScalingReport r;
    r.tau = tau;
    r.first.exponent_u = e.gamma1() / (e.p1 - 1.0);
    r.first.exponent_v = e.gamma2() / (e.p2 - 1.0);
    r.first.margin_u = margin(s2.u, s1.u, r.first.exponent_u);
    r.first.margin_v = margin(s2.v, s1.v, r.first.exponent_v);
    r.first.pass = r.first.margin_u >= -tol && r.first.margin_v >= -tol;

    const auto g1 = e.gamma_hat(1);
    const auto g2 = e.gamma_hat(2);
    if (g1 && g2) {
        r.second.exponent_u = *g1 / (e.p1 - 1.0);
        r.second.exponent_v = *g2 / (e.p2 - 1.0);
        r.second.margin_u = margin(s1.u, s2.u, r.second.exponent_u);
        r.second.margin_v = margin(s1.v, s2.v, r.second.exponent_v);
        r.second.pass = r.second.margin_u >= -tol && r.second.margin_v >= -tol;
    } else {
        r.second.applicable = false;
    }
    r.pass = r.first.pass && (!r.second.applicable || r.second.pass);
    return r;
}

struct UniquenessReport {
    UniquenessGate gate;
    SystemSolution first;
    SystemSolution second;
    double distance = 0.0;
    double tau = 1.0;
    ScalingReport scaling;
};

/// Solves from two starts and compares. Zero-trace barriers (T5, T9) cannot start
/// from the lower fields, so the midpoint of the rectangle replaces that start.
inline UniquenessReport uniqueness_experiment(const GridPtr& grid, const ExponentSet& e, const SubSupPair& pair,
                                              FixedPointConfig cfg) {
    UniquenessReport r;
    r.gate = uniqueness_gate(e);
    const bool zero_trace = pair.recipe == Recipe::T5 || pair.recipe == Recipe::T9;
    if (zero_trace) {
        cfg.start = StartKind::custom;
        auto mid = [](const ScalarField& a, const ScalarField& b) {
            std::vector<double> m(a.size());
            for (std::size_t n = 0; n < m.size(); ++n) m[n] = 0.5 * (a[n] + b[n]);
            return ScalarField(a.grid_ptr(), std::move(m));
        };
        cfg.custom_start = std::make_pair(mid(pair.u_lower, pair.u_upper), mid(pair.v_lower, pair.v_upper));
    } else {
        cfg.start = StartKind::from_lower;
    }
    r.first = solve_system(grid, e, pair, cfg);
    cfg.start = StartKind::from_upper;
    r.second = solve_system(grid, e, pair, cfg);
    r.distance = std::max(sup_distance(r.first.u, r.second.u), sup_distance(r.first.v, r.second.v));

    const double t12 = krasnoselskii_tau(r.first, r.second);
    const double t21 = krasnoselskii_tau(r.second, r.first);
    // Orient the pair so that τ <= 1.
    if (t12 <= 1.0) {
        r.tau = t12;
        r.scaling = scaling_comparison_check(r.first, r.second, t12, e, 10.0 * cfg.tol_outer);
    } else {
        r.tau = t21;
        r.scaling = scaling_comparison_check(r.second, r.first, std::min(t21, 1.0), e, 10.0 * cfg.tol_outer);
    }
    return r;
}

inline nlohmann::json to_json(const SystemSolution& s) {
    return {{"start", to_string(s.start)},
            {"outer_iterations", s.outer_iterations},
            {"final_change", s.final_change},
            {"converged", s.converged},
            {"residual_u", s.residual_u},
            {"residual_v", s.residual_v},
            {"enclosed", s.enclosed},
            {"enclosure_margin", s.enclosure_margin},
            {"flux_norm", s.flux_norm},
            {"flux_bound", s.flux_bound},
            {"u_min", s.u.min()},
            {"u_max", s.u.max()},
            {"v_min", s.v.min()},
            {"v_max", s.v.max()}};
}

inline nlohmann::json to_json(const UniquenessGate& g) {
    nlohmann::json j{{"verdict", to_string(g.verdict)}, {"gamma1", g.gamma1}, {"gamma2", g.gamma2}};
    if (g.gamma_hat1) j["gamma_hat1"] = *g.gamma_hat1;
    if (g.gamma_hat2) j["gamma_hat2"] = *g.gamma_hat2;
    return j;
}

inline nlohmann::json to_json(const ScalingRound& r) {
    return {{"applicable", r.applicable}, {"exponent_u", r.exponent_u}, {"exponent_v", r.exponent_v},
            {"margin_u", r.margin_u},     {"margin_v", r.margin_v},     {"pass", r.pass}};
}

inline nlohmann::json to_json(const UniquenessReport& r) {
    return {{"gate", to_json(r.gate)},
            {"first", to_json(r.first)},
            {"second", to_json(r.second)},
            {"distance", r.distance},
            {"tau", r.tau},
            {"scaling", {{"pass", r.scaling.pass}, {"first", to_json(r.scaling.first)}, {"second", to_json(r.scaling.second)}}}};
}

}  // namespace lanemden

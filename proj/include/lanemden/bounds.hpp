#pragma once

// Explicit sub-/supersolution pairs for the singular system and their discrete
// certification: ordering, boundary signs, the weak inequalities at interior
// nodes, growth bounds on the right-hand sides and positivity.

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lanemden/core.hpp"
#include "lanemden/plap.hpp"
#include "lanemden/spectral.hpp"

namespace lanemden {

enum class Recipe { T1, T3, T5, T9 };

inline std::string to_string(Recipe r) {
    switch (r) {
        case Recipe::T1: return "T1";
        case Recipe::T3: return "T3";
        case Recipe::T5: return "T5";
        case Recipe::T9: return "T9";
    }
    return "?";
}

inline Recipe recipe_from_string(const std::string& s) {
    if (s == "T1") return Recipe::T1;
    if (s == "T3") return Recipe::T3;
    if (s == "T5") return Recipe::T5;
    if (s == "T9") return Recipe::T9;
    throw ConfigError("unknown recipe '" + s + "' (expected T1, T3, T5 or T9)");
}

/// Scalar objects the recipes are built from, one slot per equation (index 0 for u, 1 for v).
struct Auxiliary {
    std::array<std::optional<EigenPair>, 2> neumann_eigen;
    std::array<std::optional<EigenPair>, 2> dirichlet_eigen;
    std::array<std::optional<TorsionResult>, 2> neumann_torsion;
    std::array<std::optional<TorsionResult>, 2> dirichlet_torsion;
    std::array<std::optional<SingularTorsionResult>, 2> singular_torsion;
};

struct SubSupPair {
    ScalarField u_lower, v_lower, u_upper, v_upper;
    Recipe recipe = Recipe::T1;
    double lambda = 0.0;
    /// T1/T3: min of the lower fields. T5/T9: largest c with lower >= c d on interior nodes.
    double positivity = 0.0;
    /// T9 only: γ > -1/N for both singular exponents.
    std::optional<bool> bounded_regime;
};

/// The p of each equation.
inline std::array<double, 2> powers(const ExponentSet& e) { return {e.p1, e.p2}; }

/// Smallest Λ of the T3 recipe: the closed-form floor, doubled until
/// Λ - max(φ̂, y) > Λ/2 and (Λ/2)^{p-1} - (Λ/3)^{p-1} > 1 hold for both equations.
inline double lambda_floor_T3(const ExponentSet& e, std::array<double, 2> phi_hat_sup, std::array<double, 2> y_sup) {
    const auto p = powers(e);
    double lambda = 0.0;
    for (int i = 0; i < 2; ++i) {
        require_p(p[i], "lambda_floor_T3");
        if (!(phi_hat_sup[i] > 0.0) || !(y_sup[i] > 0.0))
            throw PreconditionError("lambda_floor_T3: sup-norms must be positive");
        const double q = p[i] - 1.0;
        const double gap = std::pow(std::pow(3.0, q) - std::pow(2.0, q), 1.0 / q);
        lambda = std::max(lambda, 2.0 * (1.0 + 3.0 / gap + phi_hat_sup[i] + y_sup[i]));
    }
    auto holds = [&](double L) {
        for (int i = 0; i < 2; ++i) {
            const double q = p[i] - 1.0;
            if (!(L - std::max(phi_hat_sup[i], y_sup[i]) > L / 2.0)) return false;
            if (!(std::pow(L / 2.0, q) - std::pow(L / 3.0, q) > 1.0)) return false;
        }
        return true;
    };
    while (!holds(lambda)) lambda *= 2.0;
    return lambda;
}

namespace detail {

inline void require_regime(const ExponentSet& e, const char* where) {
    const auto report = validate_exponents(e);
    if (!report.valid()) throw ConfigError(std::string(where) + ": exponents violate " + report.first_failure());
}

template <class T>
const T& need(const std::optional<T>& slot, const char* what) {
    if (!slot) throw PreconditionError(std::string("missing auxiliary object: ") + what);
    return *slot;
}

inline double min_ratio_to_distance(const ScalarField& a, const ScalarField& b) {
    const ScalarField d = distance_field(a.grid_ptr());
    return std::min(min_interior_ratio(a, d), min_interior_ratio(b, d));
}

}  // namespace detail

/// (Λ⁻¹φ̂₁, Λ⁻¹φ̂₂; Λŷ₁, Λŷ₂).
inline SubSupPair construct_T1(const GridPtr& grid, const ExponentSet& e, double lambda, const Auxiliary& aux) {
    detail::require_regime(e, "construct_T1");
    if (!(lambda > 1.0)) throw ConfigError("construct_T1: lambda must exceed 1, got " + show(lambda));
    SubSupPair s;
    s.recipe = Recipe::T1;
    s.lambda = lambda;
    s.u_lower = detail::need(aux.neumann_eigen[0], "Neumann eigenpair (u)").phi.scaled(1.0 / lambda);
    s.v_lower = detail::need(aux.neumann_eigen[1], "Neumann eigenpair (v)").phi.scaled(1.0 / lambda);
    s.u_upper = detail::need(aux.neumann_torsion[0], "Neumann torsion (u)").field().scaled(lambda);
    s.v_upper = detail::need(aux.neumann_torsion[1], "Neumann torsion (v)").field().scaled(lambda);
    require_same_grid(s.u_lower, ScalarField(grid, 0.0), "construct_T1");
    s.positivity = std::min(s.u_lower.min(), s.v_lower.min());
    return s;
}

enum class FloorPolicy { enforce, allow_below };

/// ((Λ-φ̂₁)/Λ, (Λ-φ̂₂)/Λ; Λ(Λ-y₁), Λ(Λ-y₂)) with Dirichlet torsions y_i.
inline SubSupPair construct_T3(const GridPtr& grid, const ExponentSet& e, double lambda, const Auxiliary& aux,
                               FloorPolicy policy = FloorPolicy::enforce) {
    detail::require_regime(e, "construct_T3");
    const auto& phi1 = detail::need(aux.neumann_eigen[0], "Neumann eigenpair (u)").phi;
    const auto& phi2 = detail::need(aux.neumann_eigen[1], "Neumann eigenpair (v)").phi;
    const auto& y1 = detail::need(aux.dirichlet_torsion[0], "Dirichlet torsion (u)").field();
    const auto& y2 = detail::need(aux.dirichlet_torsion[1], "Dirichlet torsion (v)").field();
    require_same_grid(y1, ScalarField(grid, 0.0), "construct_T3");
    if (policy == FloorPolicy::enforce) {
        const double floor = lambda_floor_T3(e, {phi1.sup_norm(), phi2.sup_norm()}, {y1.sup_norm(), y2.sup_norm()});
        if (lambda < floor)
            throw ConfigError("construct_T3: lambda " + show(lambda) + " is below the floor " + show(floor));
    } else if (!(lambda > 0.0)) {
        throw ConfigError("construct_T3: lambda must be positive");
    }
    SubSupPair s;
    s.recipe = Recipe::T3;
    s.lambda = lambda;
    s.u_lower = phi1.map([lambda](double x) { return (lambda - x) / lambda; });
    s.v_lower = phi2.map([lambda](double x) { return (lambda - x) / lambda; });
    s.u_upper = y1.map([lambda](double x) { return lambda * (lambda - x); });
    s.v_upper = y2.map([lambda](double x) { return lambda * (lambda - x); });
    s.positivity = std::min(s.u_lower.min(), s.v_lower.min());
    return s;
}

/// (Λ⁻¹φ₁, Λ⁻¹φ₂; Λŷ₁, Λŷ₂) with Dirichlet eigenfunctions; needs α₂, β₁ > 0.
inline SubSupPair construct_T5(const GridPtr& grid, const ExponentSet& e, double lambda, const Auxiliary& aux) {
    if (!(e.alpha2 > 0.0 && e.beta1 > 0.0))
        throw RecipeMismatchError("recipe T5 needs alpha2 > 0 and beta1 > 0 (cooperative coupling)");
    detail::require_regime(e, "construct_T5");
    if (!(lambda > 1.0)) throw ConfigError("construct_T5: lambda must exceed 1, got " + show(lambda));
    const auto& d1 = detail::need(aux.dirichlet_eigen[0], "Dirichlet eigenpair (u)");
    const auto& d2 = detail::need(aux.dirichlet_eigen[1], "Dirichlet eigenpair (v)");
    SubSupPair s;
    s.recipe = Recipe::T5;
    s.lambda = lambda;
    s.u_lower = d1.phi.scaled(1.0 / lambda);
    s.v_lower = d2.phi.scaled(1.0 / lambda);
    s.u_upper = detail::need(aux.neumann_torsion[0], "Neumann torsion (u)").field().scaled(lambda);
    s.v_upper = detail::need(aux.neumann_torsion[1], "Neumann torsion (v)").field().scaled(lambda);
    require_same_grid(s.u_lower, ScalarField(grid, 0.0), "construct_T5");
    s.positivity = std::min(d1.c0, d2.c0) / lambda;
    return s;
}

/// max{-1, -(p2-1)} < α₂ < 0 and max{-1, -(p1-1)} < β₁ < 0.
inline bool singular_coupling_holds(const ExponentSet& e) {
    return std::max(-1.0, -(e.p2 - 1.0)) < e.alpha2 && e.alpha2 < 0.0 &&
           std::max(-1.0, -(e.p1 - 1.0)) < e.beta1 && e.beta1 < 0.0;
}

/// (Λ⁻¹φ₁, Λ⁻¹φ₂; Λẑ₁, Λẑ₂) with singular torsions of exponents β₁ and α₂.
inline SubSupPair construct_T9(const GridPtr& grid, const ExponentSet& e, double lambda, const Auxiliary& aux) {
    if (!singular_coupling_holds(e))
        throw RecipeMismatchError("recipe T9 needs max{-1,-(p2-1)} < alpha2 < 0 and max{-1,-(p1-1)} < beta1 < 0");
    detail::require_regime(e, "construct_T9");
    if (!(lambda > 1.0)) throw ConfigError("construct_T9: lambda must exceed 1, got " + show(lambda));
    const auto& d1 = detail::need(aux.dirichlet_eigen[0], "Dirichlet eigenpair (u)");
    const auto& d2 = detail::need(aux.dirichlet_eigen[1], "Dirichlet eigenpair (v)");
    const auto& z1 = detail::need(aux.singular_torsion[0], "singular torsion (u)");
    const auto& z2 = detail::need(aux.singular_torsion[1], "singular torsion (v)");
    if (z1.gamma != e.beta1 || z2.gamma != e.alpha2)
        throw PreconditionError("construct_T9: singular torsions must use exponents beta1 and alpha2");
    SubSupPair s;
    s.recipe = Recipe::T9;
    s.lambda = lambda;
    s.u_lower = d1.phi.scaled(1.0 / lambda);
    s.v_lower = d2.phi.scaled(1.0 / lambda);
    s.u_upper = z1.field().scaled(lambda);
    s.v_upper = z2.field().scaled(lambda);
    require_same_grid(s.u_lower, ScalarField(grid, 0.0), "construct_T9");
    s.positivity = std::min(d1.c0, d2.c0) / lambda;
    const double n = grid->dimension();
    s.bounded_regime = e.beta1 > -1.0 / n && e.alpha2 > -1.0 / n;
    return s;
}

/// Computes the auxiliary objects a recipe needs.
inline Auxiliary build_auxiliary(const GridPtr& grid, const ExponentSet& e, Recipe recipe,
                                 const ScalarSolveConfig& cfg) {
    Auxiliary aux;
    const auto p = powers(e);
    for (int i = 0; i < 2; ++i) {
        switch (recipe) {
            case Recipe::T1:
                aux.neumann_eigen[i] = first_eigenpair_neumann(grid, p[i]);
                aux.neumann_torsion[i] = torsion(grid, p[i], BoundaryCondition::neumann_zero, cfg);
                break;
            case Recipe::T3:
                aux.neumann_eigen[i] = first_eigenpair_neumann(grid, p[i]);
                aux.dirichlet_torsion[i] = torsion(grid, p[i], BoundaryCondition::dirichlet_zero, cfg);
                break;
            case Recipe::T5:
                aux.dirichlet_eigen[i] = first_eigenpair_dirichlet(grid, p[i], cfg);
                aux.neumann_torsion[i] = torsion(grid, p[i], BoundaryCondition::neumann_zero, cfg);
                break;
            case Recipe::T9:
                aux.dirichlet_eigen[i] = first_eigenpair_dirichlet(grid, p[i], cfg);
                aux.singular_torsion[i] = singular_torsion(grid, p[i], i == 0 ? e.beta1 : e.alpha2, cfg);
                break;
        }
    }
    return aux;
}

inline SubSupPair construct(const GridPtr& grid, const ExponentSet& e, Recipe recipe, double lambda,
                            const Auxiliary& aux) {
    switch (recipe) {
        case Recipe::T1: return construct_T1(grid, e, lambda, aux);
        case Recipe::T3: return construct_T3(grid, e, lambda, aux);
        case Recipe::T5: return construct_T5(grid, e, lambda, aux);
        case Recipe::T9: return construct_T9(grid, e, lambda, aux);
    }
    throw InternalError("construct: unknown recipe");
}

/// Worst node of one nodal inequality; margin > 0 means violated.
struct CheckResult {
    std::string name;
    bool pass = true;
    double margin = -std::numeric_limits<double>::infinity();
    std::optional<std::size_t> node;
    Point where{0.0, 0.0};
};

struct GrowthBound {
    /// "singular" (|f| <= C d^γ) or "bounded" (|f| <= M).
    std::string kind;
    double constant = 0.0;
    /// Singular kind only.
    double gamma = 0.0;
    /// Bounded kind only: max over nodes of the rectangle supremum of |f_i|.
    double observed = 0.0;
    bool pass = false;
};

struct HypothesisCertificate {
    std::vector<CheckResult> checks;
    GrowthBound growth;
    /// min lower field (T1/T3) or min lower/d (T5/T9).
    double positivity = 0.0;
    std::string positivity_kind;
    bool pass = false;

    const CheckResult& check(const std::string& name) const {
        for (const auto& c : checks)
            if (c.name == name) return c;
        throw PreconditionError("no check named " + name);
    }
};

/// x^a with the convention that a = 0 gives 1; nonpositive bases under a < 0 give +∞.
inline double power_term(double x, double a) {
    if (a == 0.0) return 1.0;
    if (x <= 0.0) return a < 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    return std::pow(x, a);
}

/// Endpoint of [lo, hi] where x^a is smallest (want_min) or largest.
inline double extremal_endpoint(double lo, double hi, double a, bool want_min) {
    if (a == 0.0) return lo;
    const bool increasing = a > 0.0;
    return increasing == want_min ? lo : hi;
}

namespace detail {

inline void record(CheckResult& c, double margin, std::size_t n, const Grid& g) {
    if (std::isnan(margin)) margin = std::numeric_limits<double>::infinity();
    if (margin > c.margin) {
        c.margin = margin;
        c.node = n;
        c.where = g.point(n);
    }
}

inline double rectangle_sup(double u_lo, double u_hi, double v_lo, double v_hi, double a, double b) {
    return power_term(extremal_endpoint(u_lo, u_hi, a, false), a) + power_term(extremal_endpoint(v_lo, v_hi, b, false), b);
}

}  // namespace detail

/// Relative slack of the interior weak inequalities.
inline constexpr double tol_inequality = 1e-8;
/// Slack of the one-sided boundary derivative signs.
inline constexpr double tol_boundary_sign = 1e-8;

inline HypothesisCertificate verify_pair(const SubSupPair& s, const ExponentSet& e, const GridPtr& grid,
                                         double eps_grad = 1e-8) {
    const Grid& g = *grid;
    for (const ScalarField* f : {&s.u_lower, &s.v_lower, &s.u_upper, &s.v_upper})
        if (!(f->grid() == g)) throw PreconditionError("verify_pair: fields live on a different grid");

    HypothesisCertificate cert;

    CheckResult order{"ordering"};
    for (std::size_t n = 0; n < g.size(); ++n) {
        detail::record(order, s.u_lower[n] - s.u_upper[n], n, g);
        detail::record(order, s.v_lower[n] - s.v_upper[n], n, g);
    }
    order.pass = order.margin <= tol_order;
    cert.checks.push_back(order);

    auto boundary_sign = [&](const ScalarField& w, bool lower, const std::string& name) {
        CheckResult c{name};
        for (std::size_t n : g.boundary_nodes()) {
            if (g.is_corner(n)) continue;
            const auto [axis, in] = g.inward_neighbor(n);
            const double dn = (w[n] - w[in]) / g.spacing(axis);
            detail::record(c, lower ? dn : -dn, n, g);
        }
        c.pass = c.margin <= tol_boundary_sign;
        cert.checks.push_back(c);
    };
    boundary_sign(s.u_lower, true, "boundary_sign_u_lower");
    boundary_sign(s.v_lower, true, "boundary_sign_v_lower");
    boundary_sign(s.u_upper, false, "boundary_sign_u_upper");
    boundary_sign(s.v_upper, false, "boundary_sign_v_upper");

    const std::vector<double> Au_lo = PLaplacian(grid, e.p1, BoundaryCondition::neumann_zero, eps_grad).apply(s.u_lower.values());
    const std::vector<double> Au_hi = PLaplacian(grid, e.p1, BoundaryCondition::neumann_zero, eps_grad).apply(s.u_upper.values());
    const std::vector<double> Av_lo = PLaplacian(grid, e.p2, BoundaryCondition::neumann_zero, eps_grad).apply(s.v_lower.values());
    const std::vector<double> Av_hi = PLaplacian(grid, e.p2, BoundaryCondition::neumann_zero, eps_grad).apply(s.v_upper.values());

    CheckResult sub_u{"subsolution_u"}, sub_v{"subsolution_v"}, sup_u{"supersolution_u"}, sup_v{"supersolution_v"};
    auto weak = [&](CheckResult& c, double lhs, double rhs, std::size_t n, bool sub) {
        const double scale = 1.0 + std::abs(lhs) + (std::isfinite(rhs) ? std::abs(rhs) : 0.0);
        double margin = sub ? lhs - rhs : rhs - lhs;
        if (std::isinf(rhs)) margin = sub ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
        detail::record(c, margin / scale, n, g);
    };
    for (std::size_t n : g.interior_nodes()) {
        const double ul = s.u_lower[n], uh = s.u_upper[n], vl = s.v_lower[n], vh = s.v_upper[n];
        // inf over v of f1(u_lower, v) and over u of f2(u, v_lower); sup for the upper fields.
        const double f1_inf = power_term(ul, e.alpha1) + power_term(extremal_endpoint(vl, vh, e.beta1, true), e.beta1);
        const double f2_inf = power_term(extremal_endpoint(ul, uh, e.alpha2, true), e.alpha2) + power_term(vl, e.beta2);
        const double f1_sup = power_term(uh, e.alpha1) + power_term(extremal_endpoint(vl, vh, e.beta1, false), e.beta1);
        const double f2_sup = power_term(extremal_endpoint(ul, uh, e.alpha2, false), e.alpha2) + power_term(vh, e.beta2);
        weak(sub_u, Au_lo[n], f1_inf, n, true);
        weak(sub_v, Av_lo[n], f2_inf, n, true);
        weak(sup_u, Au_hi[n], f1_sup, n, false);
        weak(sup_v, Av_hi[n], f2_sup, n, false);
    }
    for (CheckResult* c : {&sub_u, &sub_v, &sup_u, &sup_v}) {
        c->pass = c->margin <= tol_inequality;
        cert.checks.push_back(*c);
    }

    const bool zero_trace = s.recipe == Recipe::T5 || s.recipe == Recipe::T9;
    if (zero_trace) {
        cert.growth.kind = "singular";
        double gamma = 0.0;
        for (double a : {e.alpha1, e.beta1, e.alpha2, e.beta2})
            if (a < 0.0) gamma = std::min(gamma, a);
        cert.growth.gamma = gamma;
        double C = 0.0;
        for (std::size_t c = 0; c < g.cell_count(); ++c) {
            const auto nodes = g.cell_nodes(c);
            double ul = 0, uh = 0, vl = 0, vh = 0;
            for (std::size_t n : nodes) {
                ul += s.u_lower[n];
                uh += s.u_upper[n];
                vl += s.v_lower[n];
                vh += s.v_upper[n];
            }
            const double k = static_cast<double>(nodes.size());
            ul /= k, uh /= k, vl /= k, vh /= k;
            const double weight = std::pow(boundary_distance(g, g.cell_center(c)), -gamma);
            const double f1 = detail::rectangle_sup(ul, uh, vl, vh, e.alpha1, e.beta1);
            const double f2 = detail::rectangle_sup(ul, uh, vl, vh, e.alpha2, e.beta2);
            C = std::max({C, f1 * weight, f2 * weight});
        }
        cert.growth.constant = C;
        cert.growth.pass = gamma > -1.0 && gamma < 0.0 && std::isfinite(C);
        cert.positivity_kind = "distance";
        cert.positivity = detail::min_ratio_to_distance(s.u_lower, s.v_lower);
    } else {
        cert.growth.kind = "bounded";
        const double rho = std::min(s.u_lower.min(), s.v_lower.min());
        const double top = std::max(s.u_upper.max(), s.v_upper.max());
        const double M = std::max(detail::rectangle_sup(rho, top, rho, top, e.alpha1, e.beta1),
                                  detail::rectangle_sup(rho, top, rho, top, e.alpha2, e.beta2));
        double observed = 0.0;
        for (std::size_t n = 0; n < g.size(); ++n) {
            const double ul = s.u_lower[n], uh = s.u_upper[n], vl = s.v_lower[n], vh = s.v_upper[n];
            observed = std::max({observed, detail::rectangle_sup(ul, uh, vl, vh, e.alpha1, e.beta1),
                                 detail::rectangle_sup(ul, uh, vl, vh, e.alpha2, e.beta2)});
        }
        cert.growth.constant = M;
        cert.growth.observed = observed;
        cert.growth.pass = rho > 0.0 && std::isfinite(M) && observed <= M * (1.0 + 1e-12);
        cert.positivity_kind = "minimum";
        cert.positivity = rho;
    }
    CheckResult pos{"positivity"};
    pos.margin = -cert.positivity;
    pos.pass = cert.positivity > 0.0;
    cert.checks.push_back(pos);

    cert.pass = cert.growth.pass;
    for (const auto& c : cert.checks) cert.pass = cert.pass && c.pass;
    return cert;
}

struct LambdaSearch {
    SubSupPair pair;
    HypothesisCertificate certificate;
    double start = 0.0;
    int doublings = 0;
};

/// Doubles Λ from max(2, recipe floor) until verify_pair passes; at most 60 doublings.
inline LambdaSearch auto_lambda(const GridPtr& grid, const ExponentSet& e, Recipe recipe, const Auxiliary& aux,
                                double eps_grad = 1e-8) {
    double lambda = 2.0;
    if (recipe == Recipe::T3) {
        const auto& phi1 = detail::need(aux.neumann_eigen[0], "Neumann eigenpair (u)").phi;
        const auto& phi2 = detail::need(aux.neumann_eigen[1], "Neumann eigenpair (v)").phi;
        const auto& y1 = detail::need(aux.dirichlet_torsion[0], "Dirichlet torsion (u)").field();
        const auto& y2 = detail::need(aux.dirichlet_torsion[1], "Dirichlet torsion (v)").field();
        lambda = std::max(lambda, lambda_floor_T3(e, {phi1.sup_norm(), phi2.sup_norm()}, {y1.sup_norm(), y2.sup_norm()}));
    }
    LambdaSearch out;
    out.start = lambda;
    for (int k = 0; k <= 60; ++k, lambda *= 2.0) {
        SubSupPair s = construct(grid, e, recipe, lambda, aux);
        HypothesisCertificate c = verify_pair(s, e, grid, eps_grad);
        if (c.pass) {
            out.pair = std::move(s);
            out.certificate = std::move(c);
            out.doublings = k;
            return out;
        }
    }
    throw CertificateError("auto lambda: no certified pair for recipe " + to_string(recipe) + " after 60 doublings");
}

inline nlohmann::json to_json(const CheckResult& c) {
    nlohmann::json j{{"name", c.name}, {"pass", c.pass}, {"margin", c.margin}};
    if (c.node) {
        j["node"] = *c.node;
        j["x"] = c.where[0];
        j["y"] = c.where[1];
    }
    return j;
}

inline nlohmann::json to_json(const HypothesisCertificate& c) {
    nlohmann::json checks = nlohmann::json::array();
    for (const auto& k : c.checks) checks.push_back(to_json(k));
    nlohmann::json growth{{"kind", c.growth.kind}, {"constant", c.growth.constant}, {"pass", c.growth.pass}};
    if (c.growth.kind == "singular") growth["gamma"] = c.growth.gamma;
    else growth["observed"] = c.growth.observed;
    return {{"pass", c.pass},
            {"checks", checks},
            {"growth", growth},
            {"positivity", {{"kind", c.positivity_kind}, {"value", c.positivity}}}};
}

}  // namespace lanemden

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "lanemden/plap.hpp"

using namespace lanemden;

namespace {

ScalarSolveConfig tight() {
    ScalarSolveConfig c;
    c.tol_res = 1e-11;
    return c;
}

/// Closed form of -w'' + w = 1 on (0,1), w(0) = w(1) = 0.
double linear_torsion(double x) { return 1.0 - std::cosh(x - 0.5) / std::cosh(0.5); }

double dirichlet_torsion_error(std::size_t n) {
    auto g = make_interval(0.0, 1.0, n);
    const auto r = solve_scalar(g, 2.0, ScalarField(g, 1.0), BoundaryCondition::dirichlet_zero, tight());
    double err = 0.0;
    for (std::size_t k = 0; k < g->size(); ++k)
        err = std::max(err, std::abs(r.solution[k] - linear_torsion(g->point(k)[0])));
    return err;
}

}  // namespace

TEST(DiscreteEnergy, Examples) {
    auto g = make_interval(0.0, 1.0, 33);
    const ScalarField one(g, 1.0);
    EXPECT_EQ(discrete_energy(ScalarField(g, 0.0), one, 2.0, BoundaryCondition::neumann_zero), 0.0);
    EXPECT_NEAR(discrete_energy(one, one, 2.0, BoundaryCondition::neumann_zero), -0.5, 1e-14);
    for (double c : {0.0, 0.5, 1.0, 1.7}) {
        EXPECT_NEAR(discrete_energy(ScalarField(g, c), one, 2.0, BoundaryCondition::neumann_zero), c * c / 2 - c, 1e-14);
    }
    EXPECT_THROW(discrete_energy(one, one, 1.0, BoundaryCondition::neumann_zero), ConfigError);
    EXPECT_THROW(discrete_energy(one, one, 2.0, BoundaryCondition::dirichlet_zero), PreconditionError);
}

TEST(NodalResidual, Examples) {
    auto g = make_interval(0.0, 1.0, 17);
    const ScalarField one(g, 1.0);
    const auto r1 = nodal_residual(one, 2.0, one, BoundaryCondition::neumann_zero);
    EXPECT_EQ(r1.sup_norm(), 0.0);
    const auto r2 = nodal_residual(ScalarField(g, 2.0), 2.0, one, BoundaryCondition::neumann_zero);
    for (double v : r2.values()) EXPECT_DOUBLE_EQ(v, 1.0);
    // Dirichlet boundary rows report the field itself.
    const auto r3 = nodal_residual(ScalarField(g, 2.0), 2.0, one, BoundaryCondition::dirichlet_zero);
    EXPECT_DOUBLE_EQ(r3[0], 2.0);
}

TEST(NodalResidual, TwoDimensionalStencils) {
    auto g = make_rectangle({0.0, 1.0}, {0.0, 1.0}, 9, 9);
    // p = 2 reduces to the 5-point Laplacian, exact on quadratics.
    const ScalarField q = ScalarField::from_function(g, [](const Point& x) { return x[0] * x[0] + 2.0 * x[1] * x[1]; });
    const auto a = apply_operator(q, 2.0);
    for (auto n : g->interior_nodes()) EXPECT_NEAR(a[n], -6.0 + q[n], 1e-10);
    // Affine fields have constant gradient, so -Δ_p vanishes on interior nodes for any p.
    const ScalarField lin = ScalarField::from_function(g, [](const Point& x) { return 1.0 + 0.3 * x[0] - 0.2 * x[1]; });
    for (double p : {1.5, 2.5, 3.0}) {
        const auto b = apply_operator(lin, p);
        for (auto n : g->interior_nodes()) EXPECT_NEAR(b[n], std::pow(lin[n], p - 1.0), 1e-9) << "p=" << p;
    }
}

TEST(SolveScalar, NeumannConstants) {
    for (auto g : {make_interval(0.0, 1.0, 65), make_rectangle({0.0, 1.0}, {0.0, 2.0}, 9, 13)}) {
        for (double p : {1.5, 2.0, 2.5, 3.0}) {
            const auto r = solve_scalar(g, p, ScalarField(g, 1.0), BoundaryCondition::neumann_zero, tight());
            EXPECT_LT(sup_distance(r.solution, ScalarField(g, 1.0)), 1e-10) << "p=" << p;
            const double c = 1.7;
            const auto r2 = solve_scalar(g, p, ScalarField(g, std::pow(c, p - 1.0)), BoundaryCondition::neumann_zero, tight());
            EXPECT_LT(sup_distance(r2.solution, ScalarField(g, c)), 1e-10) << "p=" << p;
        }
    }
}

TEST(SolveScalar, DirichletLinearClosedForm) {
    const double e64 = dirichlet_torsion_error(65);
    const double e128 = dirichlet_torsion_error(129);
    EXPECT_LT(e64, 1e-4);
    const double ratio = e64 / e128;
    EXPECT_GE(ratio, 3.2);
    EXPECT_LE(ratio, 4.8);
}

TEST(SolveScalar, ResidualAndBoundaryPostconditions) {
    auto g = make_rectangle({0.0, 1.0}, {0.0, 1.0}, 17, 17);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(-1.0, 2.0);
    std::vector<double> f(g->size());
    for (double& x : f) x = U(rng);
    const ScalarField F(g, f);
    for (double p : {1.5, 2.0, 2.5, 3.0}) {
        for (auto bc : {BoundaryCondition::dirichlet_zero, BoundaryCondition::neumann_zero}) {
            ScalarSolveConfig cfg;
            const auto r = solve_scalar(g, p, F, bc, cfg);
            EXPECT_LE(r.residual, cfg.tol_res);
            EXPECT_LE(nodal_residual(r.solution, p, F, bc).sup_norm(), cfg.tol_res);
            if (bc == BoundaryCondition::dirichlet_zero)
                for (auto n : g->boundary_nodes()) EXPECT_EQ(r.solution[n], 0.0);
        }
    }
}

TEST(SolveScalar, EnergyIsNonIncreasing) {
    auto g = make_interval(0.0, 1.0, 129);
    const ScalarField f = ScalarField::from_function(g, [](const Point& x) { return 2.0 + std::sin(9.0 * x[0]); });
    for (double p : {1.5, 2.5, 3.0}) {
        const auto r = solve_scalar(g, p, f, BoundaryCondition::dirichlet_zero, ScalarSolveConfig{});
        ASSERT_FALSE(r.energy_history.empty());
        for (std::size_t k = 1; k < r.energy_history.size(); ++k)
            EXPECT_LE(r.energy_history[k], r.energy_history[k - 1] + 1e-12) << "p=" << p << " step " << k;
    }
}

TEST(SolveScalar, IndependentOfInitialIterate) {
    auto g = make_rectangle({0.0, 1.0}, {0.0, 1.0}, 17, 17);
    const ScalarField f = ScalarField::from_function(g, [](const Point& x) { return 1.0 + x[0] * x[1]; });
    for (double p : {1.5, 2.5}) {
        ScalarSolveConfig cfg;
        const auto a = solve_scalar(g, p, f, BoundaryCondition::neumann_zero, cfg);
        const auto b = solve_scalar(g, p, f, BoundaryCondition::neumann_zero, cfg, ScalarField(g, 5.0));
        EXPECT_LE(sup_distance(a.solution, b.solution), 10 * cfg.tol_res);
    }
}

TEST(SolveScalar, WeakComparisonRandomized) {
    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> U(-1.0, 3.0);
    std::uniform_real_distribution<double> gap(0.0, 1.0);
    auto g = make_interval(0.0, 1.0, 41);
    int violations = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const double p = trial % 2 ? 2.5 : 2.0;
        const auto bc = trial % 4 < 2 ? BoundaryCondition::neumann_zero : BoundaryCondition::dirichlet_zero;
        std::vector<double> f(g->size()), h(g->size());
        for (std::size_t n = 0; n < f.size(); ++n) {
            f[n] = U(rng);
            h[n] = f[n] + (gap(rng) < 0.3 ? 0.0 : gap(rng));
        }
        ScalarSolveConfig cfg;
        cfg.tol_res = 1e-12;
        const auto wf = solve_scalar(g, p, ScalarField(g, f), bc, cfg).solution;
        const auto wh = solve_scalar(g, p, ScalarField(g, h), bc, cfg).solution;
        for (std::size_t n = 0; n < f.size(); ++n) violations += wf[n] > wh[n] + tol_order;
    }
    EXPECT_EQ(violations, 0);
}

TEST(SolveScalar, IterationLimitCarriesBestIterate) {
    auto g = make_interval(0.0, 1.0, 65);
    ScalarSolveConfig cfg;
    cfg.max_inner_iterations = 1;
    cfg.tol_res = 1e-14;
    try {
        solve_scalar(g, 3.0, ScalarField(g, 5.0), BoundaryCondition::dirichlet_zero, cfg);
        FAIL() << "expected IterationLimitError";
    } catch (const IterationLimitError& e) {
        EXPECT_EQ(e.iterations(), 1);
        EXPECT_EQ(e.best_iterate().size(), g->size());
        EXPECT_GT(e.residual(), cfg.tol_res);
    }
    EXPECT_THROW(solve_scalar(g, 0.5, ScalarField(g, 1.0), BoundaryCondition::neumann_zero, cfg), ConfigError);
}

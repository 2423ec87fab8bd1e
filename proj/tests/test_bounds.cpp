#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "lanemden/bounds.hpp"

using namespace lanemden;

namespace {

const ExponentSet kHalf{2.0, 2.0, -0.5, -0.5, -0.5, -0.5};
const ExponentSet kCooperative{2.0, 2.0, -0.5, 0.5, 0.5, -0.5};

ScalarSolveConfig solver() {
    ScalarSolveConfig c;
    c.tol_res = 1e-10;
    return c;
}

}  // namespace

TEST(LambdaFloor, LinearArithmetic) {
    const double y = 0.1152;
    const double floor = lambda_floor_T3(kHalf, {1.0, 1.0}, {y, y});
    EXPECT_NEAR(floor, 2.0 * (1.0 + 3.0 + 1.0 + y), 1e-12);
    EXPECT_NEAR(floor, 10.2304, 1e-12);
    EXPECT_GT(floor / 2.0 - floor / 3.0, 1.0);
}

TEST(LambdaFloor, CubicArithmetic) {
    const ExponentSet e{3.0, 3.0, -0.5, -0.5, -0.5, -0.5};
    const double s = 0.07;
    EXPECT_NEAR(lambda_floor_T3(e, {1.0, 1.0}, {s, s}), 2.0 * (1.0 + 3.0 / std::sqrt(5.0) + 1.0 + s), 1e-12);
}

TEST(LambdaFloor, TakesWorseEquationAndDoublesWhenNeeded) {
    const ExponentSet e{2.0, 3.0, -0.5, -0.5, -0.5, -0.5};
    const double f = lambda_floor_T3(e, {1.0, 1.0}, {0.1, 0.2});
    EXPECT_NEAR(f, std::max(2.0 * (5.0 + 0.1), 2.0 * (2.0 + 3.0 / std::sqrt(5.0) + 0.2)), 1e-12);
    // A huge torsion sup forces the Λ/2 condition to bind the floor itself, never below it.
    const double g = lambda_floor_T3(kHalf, {1.0, 1.0}, {50.0, 50.0});
    EXPECT_GT(g - 50.0, g / 2.0);
}

TEST(ConstructT1, ConstantRectangle) {
    auto grid = make_interval(0.0, 1.0, 33);
    const auto aux = build_auxiliary(grid, kHalf, Recipe::T1, solver());
    const auto s = construct_T1(grid, kHalf, 10.0, aux);
    for (std::size_t n = 0; n < grid->size(); ++n) {
        EXPECT_NEAR(s.u_lower[n], 0.1, 1e-15);
        EXPECT_NEAR(s.u_upper[n], 10.0, 1e-9);
    }
    EXPECT_NEAR(s.positivity, 0.1, 1e-15);
    EXPECT_THROW(construct_T1(grid, kHalf, 1.0, aux), ConfigError);
    ExponentSet bad = kHalf;
    bad.alpha1 = -1.5;
    EXPECT_THROW(construct_T1(grid, bad, 10.0, aux), ConfigError);
}

TEST(ConstructT3, FieldsAndFloorPolicy) {
    auto grid = make_interval(0.0, 1.0, 65);
    const auto aux = build_auxiliary(grid, kHalf, Recipe::T3, solver());
    const double y_sup = aux.dirichlet_torsion[0]->field().sup_norm();
    const double floor = lambda_floor_T3(kHalf, {1.0, 1.0}, {y_sup, y_sup});
    const auto s = construct_T3(grid, kHalf, floor, aux);
    EXPECT_NEAR(s.u_lower[7], (floor - 1.0) / floor, 1e-15);
    EXPECT_GE(s.positivity, 0.5);
    EXPECT_NEAR(s.u_upper[0], floor * floor, 1e-12);
    EXPECT_THROW(construct_T3(grid, kHalf, 1.5, aux), ConfigError);
    EXPECT_NO_THROW(construct_T3(grid, kHalf, 1.5, aux, FloorPolicy::allow_below));

    const auto lam = construct_T3(grid, kHalf, 10.24, aux);
    EXPECT_NEAR(lam.u_lower[3], 0.90234375, 1e-12);
}

TEST(ConstructT5, EigenfunctionLowerBarrier) {
    auto grid = make_interval(0.0, 1.0, 129);
    const auto aux = build_auxiliary(grid, kCooperative, Recipe::T5, solver());
    const auto s = construct_T5(grid, kCooperative, 10.0, aux);
    for (std::size_t n = 0; n < grid->size(); ++n) {
        EXPECT_NEAR(s.u_lower[n], std::sin(std::numbers::pi * grid->point(n)[0]) / 10.0, 1e-4);
        EXPECT_NEAR(s.u_upper[n], 10.0, 1e-8);
    }
    for (auto n : grid->boundary_nodes()) EXPECT_EQ(s.u_lower[n], 0.0);
    EXPECT_NEAR(s.positivity, 0.2, 0.01);
    EXPECT_GE(s.positivity, 0.19);
    EXPECT_THROW(construct_T5(grid, kHalf, 10.0, aux), RecipeMismatchError);
}

TEST(ConstructT9, PreconditionAndBr1Flag) {
    EXPECT_TRUE(singular_coupling_holds(kHalf));
    EXPECT_FALSE(singular_coupling_holds(kCooperative));
    const ExponentSet shallow{1.5, 2.0, -0.5, -0.6, -0.5, -0.5};
    EXPECT_FALSE(singular_coupling_holds(shallow));

    auto grid = make_rectangle({0.0, 1.0}, {0.0, 1.0}, 17, 17);
    const ExponentSet e{2.0, 2.0, -0.5, -0.4, -0.4, -0.5};
    const auto aux = build_auxiliary(grid, e, Recipe::T9, solver());
    const auto s = construct_T9(grid, e, 8.0, aux);
    ASSERT_TRUE(s.bounded_regime.has_value());
    EXPECT_TRUE(*s.bounded_regime);
    EXPECT_GT(s.u_upper.min(), 0.0);
    EXPECT_GE(s.u_upper.min(), 8.0 * aux.singular_torsion[0]->c1 - 1e-12);

    const ExponentSet deep{2.0, 2.0, -0.5, -0.7, -0.7, -0.5};
    const auto aux2 = build_auxiliary(grid, deep, Recipe::T9, solver());
    EXPECT_FALSE(*construct_T9(grid, deep, 8.0, aux2).bounded_regime);
    EXPECT_THROW(construct_T9(grid, kCooperative, 8.0, aux), RecipeMismatchError);
}

TEST(VerifyPair, T3AtFloorPasses) {
    auto grid = make_interval(0.0, 1.0, 65);
    const auto aux = build_auxiliary(grid, kHalf, Recipe::T3, solver());
    const auto search = auto_lambda(grid, kHalf, Recipe::T3, aux);
    EXPECT_EQ(search.doublings, 0);
    EXPECT_TRUE(search.certificate.pass);
    EXPECT_EQ(search.certificate.growth.kind, "bounded");
}

TEST(VerifyPair, T3BelowFloorFailsSupersolution) {
    for (auto grid : {make_interval(0.0, 1.0, 65), make_rectangle({0.0, 1.0}, {0.0, 1.0}, 17, 17)}) {
        const auto aux = build_auxiliary(grid, kHalf, Recipe::T3, solver());
        const auto s = construct_T3(grid, kHalf, 1.5, aux, FloorPolicy::allow_below);
        const auto c = verify_pair(s, kHalf, grid);
        EXPECT_FALSE(c.pass);
        EXPECT_FALSE(c.check("supersolution_u").pass);
        EXPECT_GT(c.check("supersolution_u").margin, 0.0);
        EXPECT_TRUE(c.check("supersolution_u").node.has_value());
        EXPECT_TRUE(c.check("ordering").pass);
    }
}

TEST(VerifyPair, SwappedFieldsFailOrdering) {
    auto grid = make_interval(0.0, 1.0, 17);
    const auto aux = build_auxiliary(grid, kHalf, Recipe::T1, solver());
    auto s = construct_T1(grid, kHalf, 10.0, aux);
    std::swap(s.u_lower, s.u_upper);
    std::swap(s.v_lower, s.v_upper);
    const auto c = verify_pair(s, kHalf, grid);
    EXPECT_FALSE(c.check("ordering").pass);
    EXPECT_FALSE(c.pass);
}

TEST(VerifyPair, AutoLambdaCertifiesEveryRecipe) {
    auto grid = make_rectangle({0.0, 1.0}, {0.0, 1.0}, 17, 17);
    struct Case {
        Recipe recipe;
        ExponentSet e;
    };
    for (const Case& k : {Case{Recipe::T1, kHalf}, Case{Recipe::T3, kHalf}, Case{Recipe::T5, kCooperative},
                          Case{Recipe::T9, kHalf}}) {
        const auto aux = build_auxiliary(grid, k.e, k.recipe, solver());
        const auto search = auto_lambda(grid, k.e, k.recipe, aux);
        EXPECT_TRUE(search.certificate.pass) << to_string(k.recipe);
        EXPECT_LE(search.doublings, 60);
        EXPECT_GE(search.pair.lambda, 2.0);
        const bool zero_trace = k.recipe == Recipe::T5 || k.recipe == Recipe::T9;
        EXPECT_EQ(search.certificate.growth.kind, zero_trace ? "singular" : "bounded");
        EXPECT_EQ(search.certificate.positivity_kind, zero_trace ? "distance" : "minimum");
        EXPECT_GT(search.certificate.positivity, 0.0);
        for (const auto& c : search.certificate.checks) EXPECT_TRUE(c.pass) << to_string(k.recipe) << " " << c.name;
    }
}

TEST(VerifyPair, BoundedGrowthMatchesClosedForm) {
    auto grid = make_interval(0.0, 1.0, 33);
    const auto aux = build_auxiliary(grid, kHalf, Recipe::T1, solver());
    const auto s = construct_T1(grid, kHalf, 4.0, aux);
    const auto c = verify_pair(s, kHalf, grid);
    const double rho = s.positivity;
    EXPECT_NEAR(c.growth.constant, std::pow(rho, -0.5) + std::pow(rho, -0.5), 1e-12);
    EXPECT_TRUE(c.growth.pass);
}

TEST(VerifyPair, SingularGrowthUsesMostNegativeExponent) {
    auto grid = make_interval(0.0, 1.0, 33);
    const ExponentSet e{2.0, 2.0, -0.3, 0.4, 0.5, -0.6};
    const auto aux = build_auxiliary(grid, e, Recipe::T5, solver());
    const auto s = construct_T5(grid, e, 8.0, aux);
    const auto c = verify_pair(s, e, grid);
    EXPECT_EQ(c.growth.kind, "singular");
    EXPECT_DOUBLE_EQ(c.growth.gamma, -0.6);
    EXPECT_TRUE(std::isfinite(c.growth.constant));
}

TEST(EndpointRealization, MatchesSweep) {
    const double ul = 0.3, vl = 0.2, vh = 3.0;
    for (double b : {-0.7, -0.2, 0.0, 0.4, 0.9}) {
        double best = std::numeric_limits<double>::infinity();
        double worst = -best;
        for (int k = 0; k <= 16; ++k) {
            const double v = vl + (vh - vl) * k / 16.0;
            const double f = std::pow(ul, -0.5) + power_term(v, b);
            best = std::min(best, f);
            worst = std::max(worst, f);
        }
        EXPECT_DOUBLE_EQ(std::pow(ul, -0.5) + power_term(extremal_endpoint(vl, vh, b, true), b), best) << b;
        EXPECT_DOUBLE_EQ(std::pow(ul, -0.5) + power_term(extremal_endpoint(vl, vh, b, false), b), worst) << b;
    }
}

TEST(Recipe, ParseRoundTrip) {
    for (Recipe r : {Recipe::T1, Recipe::T3, Recipe::T5, Recipe::T9}) EXPECT_EQ(recipe_from_string(to_string(r)), r);
    EXPECT_THROW(recipe_from_string("T2"), ConfigError);
}

TEST(Certificate, JsonCarriesWorstNodeCoordinates) {
    auto grid = make_interval(0.0, 1.0, 17);
    const auto aux = build_auxiliary(grid, kHalf, Recipe::T3, solver());
    const auto c = verify_pair(construct_T3(grid, kHalf, 1.5, aux, FloorPolicy::allow_below), kHalf, grid);
    const auto j = to_json(c);
    EXPECT_FALSE(j.at("pass").get<bool>());
    bool found = false;
    for (const auto& k : j.at("checks"))
        if (k.at("name") == "supersolution_u") {
            found = true;
            EXPECT_TRUE(k.contains("x"));
            EXPECT_GT(k.at("margin").get<double>(), 0.0);
        }
    EXPECT_TRUE(found);
}

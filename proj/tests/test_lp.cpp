#include <doctest.h>

#include <cmath>
#include <numeric>

#include "adpp/lp.hpp"
#include "adpp/scenario.hpp"
#include "support.hpp"

using namespace adpp;

namespace {

LinearProgram random_lp(std::mt19937_64& rng, std::size_t F, std::size_t K) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    LinearProgram lp;
    lp.objective.resize(F);
    for (auto& x : lp.objective) x = u(rng);
    for (std::size_t k = 0; k < K; ++k) {
        std::vector<double> row(F);
        for (auto& x : row) x = u(rng);
        lp.constraints.push_back(row);
        // about a fifth of instances are infeasible
        lp.rhs.push_back(0.8 * u(rng) - 0.3);
    }
    return lp;
}

void check_solution_invariants(const LinearProgram& lp, const LpSolution& sol) {
    REQUIRE(sol.optimal());
    double sum = 0.0, obj = 0.0;
    std::size_t support = 0;
    for (std::size_t m = 0; m < lp.variables(); ++m) {
        CHECK(sol.theta[m] >= -1e-12);
        sum += sol.theta[m];
        obj += sol.theta[m] * lp.objective[m];
        if (sol.theta[m] > 1e-12) ++support;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(obj == doctest::Approx(sol.value).epsilon(1e-9));
    CHECK(support <= lp.rows() + 1);
    for (std::size_t k = 0; k < lp.rows(); ++k) {
        const double lhs = std::inner_product(lp.constraints[k].begin(), lp.constraints[k].end(), sol.theta.begin(), 0.0);
        CHECK(lhs <= lp.rhs[k] + 1e-9);
    }
}

}  // namespace

TEST_SUITE("lp_baseline") {

TEST_CASE("solve_lp hand examples") {
    LinearProgram a{{1.0, 2.0}, {}, {}};
    auto s = solve_lp(a);
    REQUIRE(s.optimal());
    CHECK(s.value == doctest::Approx(1.0));
    CHECK(s.theta[0] == doctest::Approx(1.0));

    LinearProgram b{{0.0, 1.0}, {{1.0, 0.0}}, {0.5}};
    s = solve_lp(b);
    REQUIRE(s.optimal());
    CHECK(s.value == doctest::Approx(0.5));
    CHECK(s.theta[0] == doctest::Approx(0.5));
    CHECK(s.theta[1] == doctest::Approx(0.5));

    LinearProgram c{{0.0, 1.0}, {{0.4, 0.7}}, {0.3}};
    CHECK(solve_lp(c).status == LpStatus::Infeasible);
    CHECK(brute_force_lp_oracle(c).status == LpStatus::Infeasible);
    CHECK(brute_force_lp_oracle(a).value == doctest::Approx(1.0));
}

TEST_CASE("oracle size cap") {
    LinearProgram big{std::vector<double>(9, 0.0), {}, {}};
    CHECK_THROWS_AS(brute_force_lp_oracle(big), CapacityError);
}

TEST_CASE("simplex agrees with vertex enumeration on random instances") {
    std::mt19937_64 rng(2024);
    int infeasible = 0;
    for (int i = 0; i < 300; ++i) {
        const std::size_t F = 1 + rng() % 8, K = rng() % 4;
        const auto lp = random_lp(rng, F, K);
        const auto fast = solve_lp(lp);
        const auto slow = brute_force_lp_oracle(lp);
        CHECK(fast.status == slow.status);
        if (fast.optimal() && slow.optimal()) {
            CHECK(std::abs(fast.value - slow.value) <= 1e-9);
            check_solution_invariants(lp, fast);
        }
        infeasible += fast.status == LpStatus::Infeasible;
    }
    CHECK(infeasible > 0);
}

TEST_CASE("degenerate instances terminate") {
    // repeated columns and a constraint that is tight at every vertex
    LinearProgram lp{{1.0, 1.0, 0.0, 0.0}, {{1.0, 1.0, 1.0, 1.0}, {0.0, 0.0, 1.0, 1.0}}, {1.0, 0.5}};
    const auto s = solve_lp(lp);
    REQUIRE(s.optimal());
    CHECK(s.value == doctest::Approx(0.5));
    CHECK(brute_force_lp_oracle(lp).value == doctest::Approx(0.5));
}

TEST_CASE("sensor LP optimum") {
    const auto spec = make_sensor_problem();
    const auto table = build_reward_matrix(make_sensor_cover().members[0], spec);
    const auto lp = make_lp(table, spec.constraints);
    const auto s = solve_lp(lp);
    check_solution_invariants(lp, s);
    // separable by sensor: 0.19/3 for sensor 1 plus 0.095/3 for each of the others
    CHECK(-s.value == doctest::Approx(19.0 / 150.0).epsilon(1e-9));
}

TEST_CASE("G(x) examples and monotonicity") {
    StrategyTable t(2, 2);
    t.at(0, 0) = 0.0;
    t.at(0, 1) = 1.0;
    t.at(1, 0) = 1.0;
    t.at(1, 1) = 0.0;
    const std::vector<double> c{0.5};
    CHECK(perturbed_value(0.0, t, c).value == doctest::Approx(0.5));
    CHECK(perturbed_value(0.2, t, c).value == doctest::Approx(0.3));
    CHECK(perturbed_value(5.0, t, c).value == doctest::Approx(0.0));
    CHECK(estimate_lipschitz(t, c, 0.5, 64) == doctest::Approx(1.0));
    CHECK(default_lipschitz_range(t, c) == doctest::Approx(0.25));

    StrategyTable loose(2, 2);
    loose.at(0, 0) = 0.3;
    loose.at(0, 1) = 0.1;
    loose.at(1, 0) = 0.0;
    loose.at(1, 1) = 0.1;
    CHECK(estimate_lipschitz(loose, c, 0.2, 16) == doctest::Approx(0.0));

    StrategyTable bad(2, 2);
    bad.at(1, 0) = 1.0;
    bad.at(1, 1) = 1.0;
    CHECK_THROWS_AS(estimate_lipschitz(bad, c, 0.2, 16), ValidationError);

    std::mt19937_64 rng(8);
    for (int i = 0; i < 20; ++i) {
        const auto spec = testing::random_problem({2}, {2}, 2, rng);
        const auto table = build_reward_matrix(testing::random_distribution(2, rng), spec);
        if (!solve_lp(make_lp(table, spec.constraints)).optimal()) continue;
        const auto grid = perturbed_value_grid(table, spec.constraints, 0.5, 32);
        for (std::size_t g = 1; g < grid.size(); ++g) CHECK(grid[g].second <= grid[g - 1].second + 1e-12);
    }
}

TEST_CASE("Lipschitz estimate is stable under grid refinement on the sensor LP") {
    const auto spec = make_sensor_problem();
    const auto table = build_reward_matrix(make_sensor_cover().members[0], spec);
    const double range = default_lipschitz_range(table, spec.constraints);
    const double coarse = estimate_lipschitz(table, spec.constraints, range, 32);
    const double fine = estimate_lipschitz(table, spec.constraints, range, 64);
    CHECK(fine > 0.0);
    CHECK(std::abs(fine - coarse) < 0.1 * fine);
}

TEST_CASE("theorem2_gap arithmetic") {
    CHECK(theorem2_gap(0.0, 0.0, 1.0, 3.0) == 0.0);
    CHECK(theorem2_gap(0.1, 0.05, 1.0, 1.0) == doctest::Approx(0.3));
}

}

#include <doctest.h>

#include <algorithm>

#include "adpp/scenario.hpp"
#include "adpp/strategy.hpp"
#include "support.hpp"

using namespace adpp;

namespace {

// One user, two states, two actions, p_0(a, w) = a * w.
ProblemSpec tiny_product_problem() {
    ProblemSpec spec;
    spec.state_cards = {2};
    spec.action_cards = {2};
    spec.penalty_count = 0;
    spec.p_min = {0.0};
    spec.p_max = {1.0};
    spec.cost_tables = {std::vector<double>(4)};
    for (std::size_t a = 0; a < 2; ++a)
        for (std::size_t w = 0; w < 2; ++w) spec.cost_tables[0][a * 2 + w] = static_cast<double>(a * w);
    return spec;
}

}  // namespace

TEST_SUITE("strategy_space") {

TEST_CASE("strategy_count") {
    CHECK(strategy_count(tiny_product_problem()) == 4);
    CHECK(strategy_count(make_sensor_problem()) == 4096);
    ProblemSpec single;
    single.state_cards = {3, 5};
    single.action_cards = {1, 1};
    CHECK(strategy_count(single) == 1);
    CHECK_THROWS_AS(strategy_count(make_sensor_problem(), 4095), CapacityError);
    ProblemSpec huge;
    huge.state_cards = {64, 64};
    huge.action_cards = {4, 4};
    CHECK_THROWS_AS(strategy_count(huge), CapacityError);
}

TEST_CASE("decode endpoints and round trip") {
    const auto spec = make_sensor_problem();
    const auto first = decode_strategy(0, spec);
    for (const auto& table : first.tables)
        CHECK(std::all_of(table.begin(), table.end(), [](std::size_t a) { return a == 0; }));
    const auto last = decode_strategy(4095, spec);
    for (const auto& table : last.tables)
        CHECK(std::all_of(table.begin(), table.end(), [](std::size_t a) { return a == 1; }));
    CHECK_THROWS_AS(decode_strategy(4096, spec), ValidationError);

    std::mt19937_64 rng(1);
    for (int i = 0; i < 200; ++i) {
        const StrategyIndex m = rng() % 4096;
        CHECK(encode_strategy(decode_strategy(m, spec), spec) == m);
    }
}

TEST_CASE("expected_value examples") {
    const auto tiny = tiny_product_problem();
    // s(w) = w is table {0, 1}: digit for state 0 is 0, for state 1 is 1 -> index 2
    const auto ident = encode_strategy(PureStrategy{{{0, 1}}}, tiny);
    CHECK(expected_value(ident, 0, Distribution({0.5, 0.5}), tiny) == doctest::Approx(0.5));

    const auto spec = make_sensor_problem();
    const auto cover = make_sensor_cover();
    for (const auto& lambda : cover.members) CHECK(expected_value(4095, 1, lambda, spec) == doctest::Approx(1.0));

    const auto at = Distribution::point_mass(64, 37);
    const auto s = decode_strategy(1234, spec);
    CHECK(expected_value(1234, 0, at, spec) == spec.cost(0, joint_action(s, 37, spec), 37));
}

TEST_CASE("reward matrix matches expected_value and respects bounds") {
    const auto spec = make_sensor_problem();
    const auto lambda = make_sensor_cover().members[5];
    const auto table = build_reward_matrix(lambda, spec);
    CHECK(table.rows() == 4);
    CHECK(table.count() == 4096);
    std::mt19937_64 rng(7);
    for (int i = 0; i < 100; ++i) {
        const std::size_t k = rng() % 4;
        const StrategyIndex m = rng() % 4096;
        CHECK(table.at(k, m) == doctest::Approx(expected_value(m, k, lambda, spec)).epsilon(1e-12));
    }
    const auto under_pi = build_reward_matrix(make_sensor_cover().members[0], spec);
    for (std::size_t k = 0; k < 4; ++k) CHECK(under_pi.at(k, 0) == 0.0);
}

TEST_CASE("Holder bound, entrywise range and linearity on random instances") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 20; ++trial) {
        const auto spec = testing::random_problem({2, 3}, {2, 2}, 2, rng);
        const auto n = spec.joint_state_count();
        const auto l1 = testing::random_distribution(n, rng), l2 = testing::random_distribution(n, rng);
        const StrategyActionMap actions(spec);
        const auto r1 = build_reward_matrix(l1, spec, actions), r2 = build_reward_matrix(l2, spec, actions);
        const double a = 0.37;
        const auto rmix = build_reward_matrix(mix(l1, l2, a), spec, actions);
        const double d = l1_distance(l1, l2);
        for (std::size_t k = 0; k <= spec.penalty_count; ++k) {
            for (StrategyIndex m = 0; m < actions.count(); ++m) {
                CHECK(std::abs(r1.at(k, m) - r2.at(k, m)) <= spec.b_max(k) * d + 1e-12);
                CHECK(rmix.at(k, m) == doctest::Approx(a * r1.at(k, m) + (1 - a) * r2.at(k, m)).epsilon(1e-12));
                double lo = 1e9, hi = -1e9;
                for (StateIndex w = 0; w < n; ++w) {
                    const double v = spec.cost(k, actions.action(m, w), w);
                    lo = std::min(lo, v);
                    hi = std::max(hi, v);
                }
                CHECK(r1.at(k, m) >= lo - 1e-12);
                CHECK(r1.at(k, m) <= hi + 1e-12);
            }
        }
    }
}

TEST_CASE("action map agrees with per-strategy decoding") {
    std::mt19937_64 rng(4);
    const auto spec = testing::random_problem({2, 3, 2}, {2, 1, 3}, 1, rng);
    const StrategyActionMap actions(spec);
    for (StrategyIndex m = 0; m < actions.count(); m += 7) {
        const auto s = decode_strategy(m, spec);
        for (StateIndex w = 0; w < spec.joint_state_count(); ++w) CHECK(actions.action(m, w) == joint_action(s, w, spec));
    }
}

}

#include <doctest.h>

#include <cmath>
#include <cstring>

#include "adpp/engine.hpp"
#include "adpp/scenario.hpp"
#include "support.hpp"

using namespace adpp;

namespace {

CoveringSet two_member_cover() {
    CoveringSet c;
    c.members = {Distribution({0.9, 0.1}), Distribution({0.2, 0.8})};
    c.radius = 0.05;
    c.floor = 0.05;
    c.ceiling = 0.95;
    return c;
}

EngineConfig small_config(double V, std::size_t T = 300) {
    EngineConfig c;
    c.V = V;
    c.delay = 3;
    c.window = 5;
    c.horizon = T;
    c.seed = 77;
    return c;
}

}  // namespace

TEST_SUITE("adpp_engine") {

TEST_CASE("engine config validation") {
    EngineConfig c = small_config(1.0);
    CHECK_NOTHROW(validate(c));
    c.V = -1.0;
    CHECK_THROWS_WITH_AS(validate(c), "V must be >= 0", ValidationError);
    c = small_config(1.0);
    c.window = 0;
    CHECK_THROWS_AS(validate(c), ValidationError);
    c = small_config(1.0, 8);
    CHECK_THROWS_AS(validate(c), ValidationError);  // T must exceed D + w
}

TEST_CASE("queue_update examples") {
    std::vector<double> q{0.0};
    const std::vector<double> half{0.5};
    queue_update(q, std::vector<double>{0.0}, half);
    CHECK(q[0] == 0.0);
    q = {2.0};
    queue_update(q, std::vector<double>{1.0}, half);
    CHECK(q[0] == doctest::Approx(2.5));
    q = {0.3};
    queue_update(q, std::vector<double>{0.0}, half);  // zero-padded feedback before slot D
    CHECK(q[0] == 0.0);
}

TEST_CASE("lyapunov") {
    CHECK(lyapunov(std::vector<double>{0.0, 0.0}) == 0.0);
    CHECK(lyapunov(std::vector<double>{3.0, 4.0}) == doctest::Approx(12.5));
}

TEST_CASE("maximum-likelihood detection") {
    const auto cover = two_member_cover();
    const std::vector<StateIndex> window{0, 0, 0, 1};
    const auto scores = log_likelihood_scores(window, cover);
    CHECK(4.0 * scores[0] == doctest::Approx(-2.619).epsilon(1e-3));
    CHECK(4.0 * scores[1] == doctest::Approx(-5.051).epsilon(1e-3));
    CHECK(detect_distribution(window, cover) == 0);

    CoveringSet twins;
    twins.members = {Distribution({0.5, 0.5}), Distribution({0.5, 0.5})};
    CHECK(detect_distribution(window, twins) == 0);

    CoveringSet zeros;
    zeros.members = {Distribution({1.0, 0.0}), Distribution({0.0, 1.0})};
    CHECK(detect_distribution(std::vector<StateIndex>{0, 0}, zeros) == 0);
    CHECK(std::isinf(log_likelihood_scores(std::vector<StateIndex>{0, 0}, zeros)[1]));
    CHECK_THROWS_WITH_AS(detect_distribution(std::vector<StateIndex>{0, 1}, zeros),
                         "covering set inconsistent with data", std::runtime_error);
}

TEST_CASE("detection picks the generating member with w = 200") {
    const auto cover = two_member_cover();
    Rng rng(31);
    int hits = 0;
    std::vector<StateIndex> window(200);
    for (int trial = 0; trial < 1000; ++trial) {
        for (auto& w : window) w = sample_from(cover.members[1], rng);
        hits += detect_distribution(window, cover) == 1;
    }
    CHECK(hits >= 990);
}

TEST_CASE("detection consistency on the sensor cover with w = 500") {
    const auto cover = make_sensor_cover();
    Rng rng(12);
    for (std::size_t i_star : {0u, 5u}) {
        int errors = 0;
        std::vector<StateIndex> window(500);
        for (int trial = 0; trial < 200; ++trial) {
            for (auto& w : window) w = sample_from(cover.members[i_star], rng);
            errors += detect_distribution(window, cover) != i_star;
        }
        CHECK(errors <= 2);
    }
}

TEST_CASE("select_strategy examples and scaling invariance") {
    StrategyTable t(3, 3);
    // r_0, r_1, r_2 per strategy
    const double vals[3][3] = {{0.0, -1.0, -0.5}, {0.9, 0.2, 0.5}, {0.1, 0.8, 0.2}};
    for (std::size_t k = 0; k < 3; ++k)
        for (std::size_t m = 0; m < 3; ++m) t.at(k, m) = vals[k][m];
    CHECK(select_strategy(std::vector<double>{0.0, 0.0}, t, 5.0) == 1);
    CHECK(select_strategy(std::vector<double>{1.0, 0.0}, t, 0.0) == 1);
    CHECK(select_strategy(std::vector<double>{0.0, 1.0}, t, 0.0) == 0);

    StrategyTable flat(2, 3);
    CHECK(select_strategy(std::vector<double>{0.3}, flat, 1.0) == 0);

    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        StrategyTable r(3, 20);
        for (std::size_t k = 0; k < 3; ++k)
            for (std::size_t m = 0; m < 20; ++m) r.at(k, m) = u(rng);
        const std::vector<double> q{5 * u(rng), 5 * u(rng)};
        const double V = 10 * u(rng);
        const double lambda = 0.25 + 4 * u(rng);
        const std::vector<double> qs{lambda * q[0], lambda * q[1]};
        CHECK(select_strategy(q, r, V) == select_strategy(qs, r, lambda * V));
    }
    CHECK_THROWS_AS(select_strategy(std::vector<double>{0.0}, t, 1.0), ValidationError);
}

TEST_CASE("compute_B_t examples") {
    ProblemSpec none;
    none.state_cards = {2};
    none.action_cards = {2};
    none.penalty_count = 0;
    none.p_min = {0.0};
    none.p_max = {1.0};
    none.cost_tables = {std::vector<double>(4, 0.5)};
    CHECK(compute_B_t(Distribution::uniform(2), none) == 0.0);

    ProblemSpec one;
    one.state_cards = {1};
    one.action_cards = {2};
    one.penalty_count = 1;
    one.p_min = {0.0, 0.0};
    one.p_max = {0.0, 1.0};
    one.constraints = {0.5};
    one.cost_tables = {{0.0, 0.0}, {0.0, 1.0}};
    CHECK(compute_B_t(Distribution({1.0}), one) == doctest::Approx(0.25));

    const auto spec = make_sensor_problem();
    const double B = compute_B_t(make_sensor_cover().members[0], spec);
    CHECK(B > 0.0);
    CHECK(B == doctest::Approx(1.0));  // every sensor reports: 3 * 0.5 * (2/3)
}

TEST_CASE("run_episode is deterministic and keeps queues non-negative") {
    std::mt19937_64 gen(3);
    const auto spec = testing::random_problem({2, 2}, {2, 2}, 2, gen);
    CoveringSet cover;
    cover.members = {testing::random_distribution(4, gen, true), testing::random_distribution(4, gen, true)};
    std::tie(cover.floor, cover.ceiling) = enclosing_bounds(cover.members);
    cover.radius = 0.1;
    const auto sched = DistributionSchedule::geometric_blend(cover.members[0], cover.members, 0.95, 300, 300);
    const auto ctx = EngineContext::prepare(spec, cover, sched);
    const auto a = run_episode(ctx, small_config(4.0));
    const auto b = run_episode(ctx, small_config(4.0));
    CHECK(a.states == b.states);
    CHECK(a.chosen == b.chosen);
    CHECK(std::memcmp(a.costs.data(), b.costs.data(), a.costs.size() * sizeof(double)) == 0);
    CHECK(std::memcmp(a.queues.data(), b.queues.data(), a.queues.size() * sizeof(double)) == 0);
    for (double q : a.queues) CHECK(q >= 0.0);

    auto other = small_config(4.0);
    other.seed = 78;
    CHECK(run_episode(ctx, other).states != a.states);

    // queue snapshots follow the delayed update rule
    for (std::size_t t = 0; t + 1 < a.horizon; ++t) {
        for (std::size_t k = 0; k < 2; ++k) {
            const double fed = t >= 3 ? a.cost(t - 3, k + 1) : 0.0;
            CHECK(a.queue(t + 1, k) == std::max(a.queue(t, k) + fed - spec.constraints[k], 0.0));
        }
    }
}

TEST_CASE("single member without penalties acts myopically") {
    std::mt19937_64 gen(5);
    const auto spec = testing::random_problem({3}, {3}, 0, gen);
    CoveringSet cover;
    cover.members = {Distribution({0.2, 0.3, 0.5})};
    cover.radius = 0.01;
    cover.floor = 0.1;
    cover.ceiling = 0.6;
    const auto sched = DistributionSchedule::stationary(cover.members[0], 100);
    const auto table = build_reward_matrix(cover.members[0], spec);
    StrategyIndex best = 0;
    for (StrategyIndex m = 1; m < table.count(); ++m)
        if (table.at(0, m) < table.at(0, best)) best = m;
    const auto ep = run_episode(spec, sched, cover, small_config(2.0, 100));
    for (auto m : ep.chosen) CHECK(m == best);
    for (auto j : ep.detected) CHECK(j == 0);
}

TEST_CASE("warm-up detection uses the available prefix") {
    const auto cover = make_sensor_cover();
    const auto sched = DistributionSchedule::stationary(cover.members[6], 200);
    auto cfg = small_config(10.0, 200);
    const auto ep = run_episode(make_sensor_problem(), sched, cover, cfg);
    for (std::size_t t = 0; t < cfg.delay; ++t) CHECK(ep.detected[t] == 0);  // empty window
    for (std::size_t t = cfg.delay; t < cfg.delay + cfg.window - 1; ++t) {
        const std::vector<StateIndex> prefix(ep.states.begin(), ep.states.begin() + static_cast<long>(t - cfg.delay + 1));
        CHECK(ep.detected[t] == detect_distribution(prefix, cover));
    }
}

TEST_CASE("replicated queues agree with the shared queue") {
    const auto sc = sensor_scenario();
    auto cfg = sc.engine;
    cfg.horizon = 400;
    const auto sched = make_sensor_schedule(sc.cover, cfg.horizon);
    const auto ctx = EngineContext::prepare(sc.problem, sc.cover, sched);
    const auto plain = run_episode(ctx, cfg);
    cfg.replicate_queues = true;
    Episode replicated;
    CHECK_NOTHROW(replicated = run_episode(ctx, cfg));
    CHECK(replicated.chosen == plain.chosen);
    CHECK(replicated.costs == plain.costs);
}

TEST_CASE("sample-path bound from the telescoped queue recursion") {
    const auto sc = sensor_scenario();
    auto cfg = sc.engine;
    cfg.horizon = 1000;
    const auto sched = make_sensor_schedule(sc.cover, cfg.horizon);
    const auto ctx = EngineContext::prepare(sc.problem, sc.cover, sched);
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        cfg.seed = seed;
        const auto ep = run_episode(ctx, cfg);
        for (std::size_t t : {100u, 500u, 1000u}) {
            for (std::size_t k = 1; k <= 3; ++k) {
                const double c = sc.problem.constraints[k - 1];
                double lhs = 0.0;
                for (std::size_t tau = 0; tau + cfg.delay < t; ++tau) lhs += ep.cost(tau, k) - c;
                const double rhs = ep.queue_at(t, k - 1) + cfg.delay * std::max(0.0, sc.problem.p_max[k] - c);
                CHECK(lhs <= rhs + 1e-9);
            }
        }
    }
}

}

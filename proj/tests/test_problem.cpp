#include <doctest.h>

#include <cmath>

#include "adpp/scenario.hpp"
#include "support.hpp"

using namespace adpp;
using testing::random_distribution;

TEST_SUITE("problem_model") {

TEST_CASE("mixed radix puts user 0 in the least significant digit") {
    const std::vector<std::size_t> radices{4, 3, 2};
    CHECK(decode_mixed_radix(1, radices) == std::vector<std::size_t>{1, 0, 0});
    CHECK(decode_mixed_radix(4, radices) == std::vector<std::size_t>{0, 1, 0});
    for (std::size_t i = 0; i < 24; ++i) {
        const auto d = decode_mixed_radix(i, radices);
        CHECK(encode_mixed_radix(d, radices) == i);
    }
}

TEST_CASE("validate_problem reports structural and bound problems") {
    auto spec = make_sensor_problem();
    CHECK(validate_problem(spec).empty());

    auto short_c = spec;
    short_c.constraints.pop_back();
    const auto r1 = validate_problem(short_c);
    REQUIRE_FALSE(r1.empty());
    CHECK(r1.front().find("constraint count mismatch") != std::string::npos);

    auto above = spec;
    above.cost_tables[0][5] = 0.5;  // p_max,0 = 0
    const auto r2 = validate_problem(above);
    REQUIRE_FALSE(r2.empty());
    CHECK(r2.front().find("bound violation") != std::string::npos);
    CHECK_THROWS_AS(require_valid(above), ValidationError);
}

TEST_CASE("distribution construction") {
    CHECK_THROWS_AS(Distribution({0.5, 0.6}), ValidationError);
    CHECK_THROWS_AS(Distribution({1.2, -0.2}), ValidationError);
    CHECK_NOTHROW(Distribution({0.25, 0.25, 0.5}));
    const auto d = Distribution::from_weights({1.0, 3.0});
    CHECK(d[0] == doctest::Approx(0.25));
    CHECK(Distribution::point_mass(4, 2)[2] == 1.0);
    const auto p = Distribution::product({{0.1, 0.9}, {0.5, 0.5}});
    CHECK(p[1] == doctest::Approx(0.45));  // user 0 in state 1, user 1 in state 0
}

TEST_CASE("l1_distance examples") {
    const Distribution a({0.9, 0.1}), b({0.2, 0.8});
    CHECK(l1_distance(a, a) == 0.0);
    CHECK(l1_distance(Distribution({1.0, 0.0}), Distribution({0.0, 1.0})) == doctest::Approx(2.0));
    CHECK(l1_distance(a, b) == doctest::Approx(1.4));
    CHECK(l1_distance(a, b) == l1_distance(b, a));
    CHECK_THROWS_AS(l1_distance(a, Distribution::uniform(3)), ValidationError);
}

TEST_CASE("l1 triangle inequality on random triples") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 200; ++i) {
        const std::size_t n = 2 + rng() % 10;
        const auto a = random_distribution(n, rng), b = random_distribution(n, rng), c = random_distribution(n, rng);
        CHECK(l1_distance(a, c) <= l1_distance(a, b) + l1_distance(b, c) + 1e-12);
    }
}

TEST_CASE("nearest_member") {
    CoveringSet cover;
    cover.members = {Distribution({0.9, 0.1}), Distribution({0.2, 0.8})};
    const auto n = nearest_member(cover, Distribution({0.8, 0.2}));
    CHECK(n.index == 0);
    CHECK(n.distance == doctest::Approx(0.2));

    const auto sensors = make_sensor_cover();
    const auto hit = nearest_member(sensors, sensors.members[3]);
    CHECK(hit.index == 3);
    CHECK(hit.distance == 0.0);

    CoveringSet tie;
    tie.members = {Distribution({0.6, 0.4}), Distribution({0.4, 0.6})};
    CHECK(nearest_member(tie, Distribution({0.5, 0.5})).index == 0);
    CHECK_THROWS_AS(nearest_member(CoveringSet{}, Distribution({1.0})), ValidationError);
}

TEST_CASE("metric_entropy is the natural log of the cover size") {
    CoveringSet c;
    c.members = {Distribution({1.0})};
    CHECK(metric_entropy(c) == 0.0);
    c.members.push_back(Distribution({1.0}));
    CHECK(metric_entropy(c) == doctest::Approx(std::log(2.0)));
    CHECK(metric_entropy(make_sensor_cover()) == doctest::Approx(2.0794).epsilon(1e-4));
}

TEST_CASE("sensor cover satisfies its invariants") {
    const auto cover = make_sensor_cover();
    const auto limit = Distribution::product({sensor_limit_marginal(), sensor_limit_marginal(),
                                              sensor_limit_marginal()});
    CHECK(cover.size() == 8);
    CHECK(cover.members[0] == limit);
    CHECK(validate_cover(cover, limit).empty());
    for (const auto& m : cover.members) CHECK(m.size() == 64);
}

TEST_CASE("sample_state") {
    Rng rng(5);
    const auto point = DistributionSchedule::stationary(Distribution::point_mass(8, 5), 10);
    for (int i = 0; i < 100; ++i) CHECK(sample_state(point, 3, rng) == 5);
    CHECK_THROWS_AS(sample_state(point, 10, rng), ValidationError);

    const auto uni = DistributionSchedule::stationary(Distribution::uniform(4), 1);
    std::vector<double> freq(4, 0.0);
    const int n = 100000;
    for (int i = 0; i < n; ++i) freq[sample_state(uni, 0, rng)] += 1.0 / n;
    for (double f : freq) CHECK(f == doctest::Approx(0.25).epsilon(0.04));  // 0.01 absolute

    Rng a(99), b(99);
    CHECK(sample_state(uni, 0, a) == sample_state(uni, 0, b));
}

TEST_CASE("empirical pmf converges at the 1/sqrt(n) rate") {
    std::mt19937_64 gen(3);
    for (int trial = 0; trial < 5; ++trial) {
        const auto target = random_distribution(16, gen);
        Rng rng(100 + trial);
        const std::size_t n = 20000;
        std::vector<double> counts(target.size(), 0.0);
        for (std::size_t i = 0; i < n; ++i) counts[sample_from(target, rng)] += 1.0;
        double err = 0.0;
        for (std::size_t s = 0; s < target.size(); ++s) err += std::abs(counts[s] / n - target[s]);
        CHECK(err < 5.0 / std::sqrt(static_cast<double>(n)));
    }
}

TEST_CASE("sensor schedule converges along its envelope") {
    const auto cover = make_sensor_cover();
    const auto sched = make_sensor_schedule(cover, 5000);
    double prev_env = sched.envelope(0);
    for (std::size_t t = 0; t < 5000; t += 37) {
        const double d = l1_distance(sched.at(t), sched.limit());
        CHECK(d <= sched.envelope(t) + 1e-12);
        CHECK(sched.envelope(t) <= prev_env);
        prev_env = sched.envelope(t);
    }
    CHECK(l1_distance(sched.at(4999), sched.limit()) < 1e-6);
    CHECK_THROWS_AS(sched.at(5000), ValidationError);
}

TEST_CASE("mix is the pointwise convex combination") {
    const Distribution a({1.0, 0.0}), b({0.0, 1.0});
    const auto m = mix(a, b, 0.3);
    CHECK(m[0] == doctest::Approx(0.3));
    CHECK(m[1] == doctest::Approx(0.7));
}

}

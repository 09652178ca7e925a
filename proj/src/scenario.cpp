#include "adpp/scenario.hpp"

#include <algorithm>
#include <tuple>

namespace adpp {

ProblemSpec make_sensor_problem() {
    ProblemSpec spec;
    spec.state_cards = {4, 4, 4};
    spec.action_cards = {2, 2, 2};
    spec.penalty_count = 3;
    spec.constraints = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    spec.p_min = {-1.0, 0.0, 0.0, 0.0};
    spec.p_max = {0.0, 1.0, 1.0, 1.0};

    const std::size_t n_states = spec.joint_state_count();
    const std::size_t n_actions = spec.joint_action_count();
    spec.cost_tables.assign(4, std::vector<double>(n_states * n_actions, 0.0));
    for (std::size_t a = 0; a < n_actions; ++a) {
        const auto alpha = decode_mixed_radix(a, spec.action_cards);
        for (std::size_t s = 0; s < n_states; ++s) {
            const auto omega = decode_mixed_radix(s, spec.state_cards);
            const double u0 = std::min(static_cast<double>(alpha[0] * omega[0]) / 10.0 +
                                           static_cast<double>(alpha[1] * omega[1] + alpha[2] * omega[2]) / 20.0,
                                       1.0);
            spec.cost_tables[0][a * n_states + s] = -u0;
            for (std::size_t i = 0; i < 3; ++i) spec.cost_tables[i + 1][a * n_states + s] = static_cast<double>(alpha[i]);
        }
    }
    return spec;
}

std::vector<double> sensor_limit_marginal() { return {0.1, 0.7, 0.1, 0.1}; }

std::vector<double> sensor_alternative_marginal() { return {0.1, 0.1, 0.7, 0.1}; }

CoveringSet make_sensor_cover(double radius) {
    CoveringSet cover;
    const auto base = sensor_limit_marginal();
    const auto alt = sensor_alternative_marginal();
    for (unsigned j = 0; j < 8; ++j) {
        std::vector<std::vector<double>> marginals;
        for (unsigned i = 0; i < 3; ++i) marginals.push_back(((j >> i) & 1U) ? alt : base);
        cover.members.push_back(Distribution::product(marginals));
    }
    cover.radius = radius;
    std::tie(cover.floor, cover.ceiling) = enclosing_bounds(cover.members);
    return cover;
}

DistributionSchedule make_sensor_schedule(const CoveringSet& cover, std::size_t horizon, double rho) {
    return DistributionSchedule::geometric_blend(cover.members.front(), cover.members, rho, horizon, horizon);
}

Scenario sensor_scenario() {
    Scenario sc;
    sc.name = kSensorScenarioName;
    sc.problem = make_sensor_problem();
    sc.cover = make_sensor_cover();
    sc.engine.V = 50.0;
    sc.engine.delay = 10;
    sc.engine.window = 40;
    sc.engine.horizon = 5000;
    sc.engine.seed = 20161;
    sc.schedule = make_sensor_schedule(sc.cover, sc.engine.horizon);
    sc.runs = 200;
    return sc;
}

}  // namespace adpp

#pragma once

#include <string>
#include <vector>

#include "adpp/engine.hpp"
#include "adpp/problem.hpp"

namespace adpp {

inline constexpr const char* kSensorScenarioName = "paper-sec4";

/// Three reporting sensors, local states {0,1,2,3}, binary report decision.
/// Utility u_0 = min{a1 w1 / 10 + (a2 w2 + a3 w3) / 20, 1} enters as p_0 = -u_0;
/// penalty k is the 1 W power of sensor k, constrained to 1/3 on average.
ProblemSpec make_sensor_problem();

/// Per-sensor marginal of the limiting state law: (0.1, 0.7, 0.1, 0.1).
std::vector<double> sensor_limit_marginal();

/// Per-sensor alternative marginal used by the default cover: the limit
/// marginal with its two middle entries swapped.
std::vector<double> sensor_alternative_marginal();

/// Eight product laws: member j gives sensor i the alternative marginal when
/// bit i of j is set. Member 0 is the limit itself.
CoveringSet make_sensor_cover(double radius = 0.05);

struct Scenario {
    std::string name;
    ProblemSpec problem;
    CoveringSet cover;
    DistributionSchedule schedule;
    EngineConfig engine;
    std::size_t runs = 200;
    std::vector<double> v_list{5.0, 50.0};
};

/// Default transient rule: geometric blend of the limit with the cover
/// members in cycle, rho = 0.995.
DistributionSchedule make_sensor_schedule(const CoveringSet& cover, std::size_t horizon, double rho = 0.995);

/// D = 10, w = 40, T = 5000, V = 50, R = 200.
Scenario sensor_scenario();

}  // namespace adpp

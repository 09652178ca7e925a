#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "adpp/strategy.hpp"

namespace adpp {

/// min objective . theta
/// s.t. constraints[k] . theta <= rhs[k], k = 0..K-1
///      sum(theta) = 1, theta >= 0
struct LinearProgram {
    std::vector<double> objective;
    std::vector<std::vector<double>> constraints;
    std::vector<double> rhs;

    std::size_t variables() const { return objective.size(); }
    std::size_t rows() const { return constraints.size(); }
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

const char* to_string(LpStatus status);

struct LpSolution {
    LpStatus status = LpStatus::Infeasible;
    std::vector<double> theta;
    double value = 0.0;
    std::size_t iterations = 0;

    bool optimal() const { return status == LpStatus::Optimal; }
};

class LpIterationLimit : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Builds LP_{P} from a reward matrix: objective row 0, constraint rows 1..K,
/// right-hand side c_k + relaxation.
LinearProgram make_lp(const StrategyTable& table, std::span<const double> constraints, double relaxation = 0.0);

/// Two-phase dense simplex with Bland's rule. Returns a basic optimal
/// solution (at most K+1 nonzero entries). Throws LpIterationLimit when
/// `max_iterations` pivots are exceeded.
LpSolution solve_lp(const LinearProgram& lp, std::size_t max_iterations = 200'000);

/// Reference solver by enumeration of every basic feasible solution.
/// Limited to F <= 8 and K <= 3; throws CapacityError otherwise.
LpSolution brute_force_lp_oracle(const LinearProgram& lp);

/// G(x): LP value with every constraint relaxed by x >= 0.
LpSolution perturbed_value(double x, const StrategyTable& table, std::span<const double> constraints);

/// Default right end of the Lipschitz grid: half the smallest constraint
/// slack c_k - min_m r_k^(m); 1.0 when there are no constraints or no slack.
double default_lipschitz_range(const StrategyTable& table, std::span<const double> constraints);

/// (x, G(x)) on `grid` evenly spaced points of [0, x_max].
std::vector<std::pair<double, double>> perturbed_value_grid(const StrategyTable& table,
                                                            std::span<const double> constraints, double x_max,
                                                            std::size_t grid);

/// Max secant slope of G over adjacent grid points on [0, x_max].
/// Throws ValidationError when the unrelaxed LP is infeasible.
double estimate_lipschitz(const StrategyTable& table, std::span<const double> constraints, double x_max,
                          std::size_t grid = 64);

/// (c_hat + 1) * b_max * (d + nu).
double theorem2_gap(double distance, double nu, double b_max, double c_hat);

}  // namespace adpp

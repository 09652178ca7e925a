#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "adpp/problem.hpp"

namespace adpp {

/// Raised when an instance is too large for exhaustive strategy enumeration.
class CapacityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kDefaultStrategyCap = 1'000'000;

using StrategyIndex = std::size_t;

/// A pure distributed strategy: user i maps its own state to an action.
struct PureStrategy {
    std::vector<std::vector<ActionIndex>> tables;  // tables[i][omega_i]

    bool operator==(const PureStrategy&) const = default;
};

/// F = prod_i |A_i|^|Omega_i|, exact. Throws CapacityError above `cap`.
std::size_t strategy_count(const ProblemSpec& spec, std::size_t cap = kDefaultStrategyCap);

/// Strategies are indexed 0..F-1 in mixed radix over (user, local state)
/// digits, user 0 and local state 0 least significant. Index 0 maps every
/// state to action 0.
PureStrategy decode_strategy(StrategyIndex m, const ProblemSpec& spec, std::size_t cap = kDefaultStrategyCap);
StrategyIndex encode_strategy(const PureStrategy& s, const ProblemSpec& spec);

/// Joint action chosen by strategy m at joint state omega.
ActionIndex joint_action(const PureStrategy& s, StateIndex omega, const ProblemSpec& spec);

/// r_{k,lambda}^{(m)} = sum_omega lambda(omega) p_k(S^m(omega), omega).
double expected_value(StrategyIndex m, std::size_t k, const Distribution& lambda, const ProblemSpec& spec);

/// Dense (K+1) x F matrix of expected cost/penalties under one distribution.
class StrategyTable {
public:
    StrategyTable() = default;
    StrategyTable(std::size_t rows, std::size_t count) : rows_(rows), count_(count), data_(rows * count) {}

    std::size_t count() const { return count_; }
    std::size_t rows() const { return rows_; }
    double at(std::size_t k, StrategyIndex m) const { return data_[k * count_ + m]; }
    double& at(std::size_t k, StrategyIndex m) { return data_[k * count_ + m]; }
    std::span<const double> row(std::size_t k) const { return {data_.data() + k * count_, count_}; }

private:
    std::size_t rows_ = 0;
    std::size_t count_ = 0;
    std::vector<double> data_;
};

/// Joint-action lookup for every (strategy, state), shared by all reward
/// matrices of one problem. Layout: actions[m * |Omega| + omega].
class StrategyActionMap {
public:
    explicit StrategyActionMap(const ProblemSpec& spec, std::size_t cap = kDefaultStrategyCap);

    std::size_t count() const { return count_; }
    std::size_t states() const { return states_; }
    ActionIndex action(StrategyIndex m, StateIndex omega) const { return actions_[m * states_ + omega]; }

private:
    std::size_t count_ = 0;
    std::size_t states_ = 0;
    std::vector<ActionIndex> actions_;
};

StrategyTable build_reward_matrix(const Distribution& lambda, const ProblemSpec& spec,
                                  std::size_t cap = kDefaultStrategyCap);
StrategyTable build_reward_matrix(const Distribution& lambda, const ProblemSpec& spec,
                                  const StrategyActionMap& actions);

}  // namespace adpp

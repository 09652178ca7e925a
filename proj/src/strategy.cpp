#include "adpp/strategy.hpp"

#include <string>

namespace adpp {

namespace {

// Per-user radix layout of the strategy index.
std::vector<std::size_t> strategy_radices(const ProblemSpec& spec) {
    std::vector<std::size_t> radices;
    for (std::size_t i = 0; i < spec.num_users(); ++i)
        for (std::size_t s = 0; s < spec.state_cards[i]; ++s) radices.push_back(spec.action_cards[i]);
    return radices;
}

}  // namespace

std::size_t strategy_count(const ProblemSpec& spec, std::size_t cap) {
    std::size_t f = 1;
    for (std::size_t i = 0; i < spec.num_users(); ++i) {
        for (std::size_t s = 0; s < spec.state_cards[i]; ++s) {
            const auto a = spec.action_cards[i];
            if (a == 0) throw ValidationError("action cardinality must be positive");
            if (f > cap / a) {
                throw CapacityError("strategy count exceeds cap " + std::to_string(cap) +
                                    "; instance too large for exhaustive enumeration");
            }
            f *= a;
        }
    }
    if (f > cap) throw CapacityError("strategy count exceeds cap " + std::to_string(cap));
    return f;
}

PureStrategy decode_strategy(StrategyIndex m, const ProblemSpec& spec, std::size_t cap) {
    const auto f = strategy_count(spec, cap);
    if (m >= f) throw ValidationError("strategy index " + std::to_string(m) + " out of range");
    const auto radices = strategy_radices(spec);
    const auto digits = decode_mixed_radix(m, radices);
    PureStrategy s;
    std::size_t d = 0;
    for (std::size_t i = 0; i < spec.num_users(); ++i) {
        s.tables.emplace_back(digits.begin() + d, digits.begin() + d + spec.state_cards[i]);
        d += spec.state_cards[i];
    }
    return s;
}

StrategyIndex encode_strategy(const PureStrategy& s, const ProblemSpec& spec) {
    if (s.tables.size() != spec.num_users()) throw ValidationError("strategy user count mismatch");
    std::vector<std::size_t> digits;
    for (std::size_t i = 0; i < spec.num_users(); ++i) {
        if (s.tables[i].size() != spec.state_cards[i]) throw ValidationError("strategy table is not total");
        digits.insert(digits.end(), s.tables[i].begin(), s.tables[i].end());
    }
    return encode_mixed_radix(digits, strategy_radices(spec));
}

ActionIndex joint_action(const PureStrategy& s, StateIndex omega, const ProblemSpec& spec) {
    const auto local = decode_mixed_radix(omega, spec.state_cards);
    std::vector<std::size_t> actions(spec.num_users());
    for (std::size_t i = 0; i < spec.num_users(); ++i) actions[i] = s.tables[i][local[i]];
    return encode_mixed_radix(actions, spec.action_cards);
}

double expected_value(StrategyIndex m, std::size_t k, const Distribution& lambda, const ProblemSpec& spec) {
    if (k > spec.penalty_count) throw ValidationError("cost index out of range");
    if (lambda.size() != spec.joint_state_count()) throw ValidationError("distribution dimension mismatch");
    const auto s = decode_strategy(m, spec);
    double r = 0.0;
    for (StateIndex omega = 0; omega < lambda.size(); ++omega)
        r += lambda[omega] * spec.cost(k, joint_action(s, omega, spec), omega);
    return r;
}

StrategyActionMap::StrategyActionMap(const ProblemSpec& spec, std::size_t cap)
    : count_(strategy_count(spec, cap)), states_(spec.joint_state_count()) {
    const auto n = spec.num_users();
    // action-index stride of each user in the joint action
    std::vector<std::size_t> action_stride(n, 1);
    for (std::size_t i = 1; i < n; ++i) action_stride[i] = action_stride[i - 1] * spec.action_cards[i - 1];
    std::vector<std::vector<std::size_t>> local(states_);
    for (StateIndex omega = 0; omega < states_; ++omega) local[omega] = decode_mixed_radix(omega, spec.state_cards);

    actions_.assign(count_ * states_, 0);
    const auto radices = strategy_radices(spec);
    std::vector<std::size_t> digits(radices.size(), 0);
    std::vector<std::size_t> offset(n, 0);
    for (std::size_t i = 1; i < n; ++i) offset[i] = offset[i - 1] + spec.state_cards[i - 1];

    for (StrategyIndex m = 0; m < count_; ++m) {
        for (StateIndex omega = 0; omega < states_; ++omega) {
            ActionIndex a = 0;
            for (std::size_t i = 0; i < n; ++i) a += digits[offset[i] + local[omega][i]] * action_stride[i];
            actions_[m * states_ + omega] = a;
        }
        // odometer increment
        for (std::size_t d = 0; d < digits.size(); ++d) {
            if (++digits[d] < radices[d]) break;
            digits[d] = 0;
        }
    }
}

StrategyTable build_reward_matrix(const Distribution& lambda, const ProblemSpec& spec, std::size_t cap) {
    return build_reward_matrix(lambda, spec, StrategyActionMap(spec, cap));
}

StrategyTable build_reward_matrix(const Distribution& lambda, const ProblemSpec& spec,
                                  const StrategyActionMap& actions) {
    if (lambda.size() != spec.joint_state_count()) throw ValidationError("distribution dimension mismatch");
    const std::size_t rows = spec.penalty_count + 1;
    StrategyTable table(rows, actions.count());
    const auto states = actions.states();
    for (std::size_t k = 0; k < rows; ++k) {
        const auto& costs = spec.cost_tables[k];
        for (StrategyIndex m = 0; m < actions.count(); ++m) {
            double r = 0.0;
            for (StateIndex omega = 0; omega < states; ++omega)
                r += lambda[omega] * costs[actions.action(m, omega) * states + omega];
            table.at(k, m) = r;
        }
    }
    return table;
}

}  // namespace adpp

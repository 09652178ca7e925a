#include "adpp/engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <stdexcept>
#include <string>

namespace adpp {

void validate(const EngineConfig& config) {
    if (!(config.V >= 0.0) || !std::isfinite(config.V)) throw ValidationError("V must be >= 0");
    if (config.window < 1) throw ValidationError("w must be >= 1");
    if (config.horizon <= config.delay + config.window) throw ValidationError("T must exceed D + w");
}

void queue_update(std::span<double> queues, std::span<const double> delayed_penalties,
                  std::span<const double> constraints) {
    for (std::size_t k = 0; k < queues.size(); ++k)
        queues[k] = std::max(queues[k] + delayed_penalties[k] - constraints[k], 0.0);
}

double lyapunov(std::span<const double> queues) {
    double s = 0.0;
    for (double q : queues) s += q * q;
    return 0.5 * s;
}

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::vector<double> log_pmf(const Distribution& d) {
    std::vector<double> out(d.size());
    for (std::size_t s = 0; s < d.size(); ++s) out[s] = d[s] > 0.0 ? std::log(d[s]) : kNegInf;
    return out;
}

std::vector<double> window_scores(std::span<const StateIndex> window,
                                  const std::vector<std::vector<double>>& member_log_pmf) {
    std::vector<double> scores(member_log_pmf.size(), 0.0);
    if (window.empty()) return scores;
    for (std::size_t j = 0; j < member_log_pmf.size(); ++j) {
        double s = 0.0;
        for (auto omega : window) {
            const double l = member_log_pmf[j][omega];
            if (l == kNegInf) {
                s = kNegInf;
                break;
            }
            s += l;
        }
        scores[j] = s == kNegInf ? kNegInf : s / static_cast<double>(window.size());
    }
    return scores;
}

std::size_t argmax_scores(const std::vector<double>& scores) {
    std::size_t best = scores.size();
    for (std::size_t j = 0; j < scores.size(); ++j) {
        if (scores[j] == kNegInf) continue;
        if (best == scores.size() || scores[j] > scores[best]) best = j;
    }
    if (best == scores.size()) throw std::runtime_error("covering set inconsistent with data");
    return best;
}

}  // namespace

std::vector<double> log_likelihood_scores(std::span<const StateIndex> window, const CoveringSet& cover) {
    std::vector<std::vector<double>> logs;
    for (const auto& m : cover.members) {
        for (auto omega : window)
            if (omega >= m.size()) throw ValidationError("observed state outside distribution support");
        logs.push_back(log_pmf(m));
    }
    return window_scores(window, logs);
}

std::size_t detect_distribution(std::span<const StateIndex> window, const CoveringSet& cover) {
    if (cover.members.empty()) throw ValidationError("detect_distribution: empty cover");
    return argmax_scores(log_likelihood_scores(window, cover));
}

StrategyIndex select_strategy(std::span<const double> queues, const StrategyTable& table, double V) {
    if (queues.size() + 1 != table.rows()) throw ValidationError("queue count does not match reward matrix");
    StrategyIndex best = 0;
    double best_score = std::numeric_limits<double>::infinity();
    const auto r0 = table.row(0);
    for (StrategyIndex m = 0; m < table.count(); ++m) {
        double score = V * r0[m];
        for (std::size_t k = 0; k < queues.size(); ++k) score += queues[k] * table.at(k + 1, m);
        if (score < best_score) {
            best_score = score;
            best = m;
        }
    }
    return best;
}

double compute_B_t(const Distribution& lambda, const ProblemSpec& spec, const StrategyActionMap& actions) {
    if (lambda.size() != spec.joint_state_count()) throw ValidationError("distribution dimension mismatch");
    const auto states = actions.states();
    double best = 0.0;
    for (StrategyIndex m = 0; m < actions.count(); ++m) {
        double s = 0.0;
        for (std::size_t k = 1; k <= spec.penalty_count; ++k) {
            const auto& costs = spec.cost_tables[k];
            const double c = spec.constraints[k - 1];
            for (StateIndex omega = 0; omega < states; ++omega)
                s += lambda[omega] * std::abs(costs[actions.action(m, omega) * states + omega] - c);
        }
        best = std::max(best, 0.5 * s);
    }
    return best;
}

double compute_B_t(const Distribution& lambda, const ProblemSpec& spec) {
    return compute_B_t(lambda, spec, StrategyActionMap(spec));
}

EngineContext EngineContext::prepare(ProblemSpec spec, CoveringSet cover, DistributionSchedule schedule,
                                     std::size_t cap) {
    require_valid(spec);
    if (cover.members.empty()) throw ValidationError("covering set must be non-empty");
    for (const auto& m : cover.members)
        if (m.size() != spec.joint_state_count()) throw ValidationError("cover member dimension mismatch");
    if (schedule.limit().size() != spec.joint_state_count())
        throw ValidationError("schedule dimension mismatch");
    StrategyActionMap actions(spec, cap);
    std::vector<StrategyTable> tables;
    std::vector<std::vector<double>> logs;
    for (const auto& m : cover.members) {
        tables.push_back(build_reward_matrix(m, spec, actions));
        logs.push_back(log_pmf(m));
    }
    return EngineContext{std::move(spec),   std::move(cover),  std::move(schedule),
                         std::move(actions), std::move(tables), std::move(logs)};
}

Episode run_episode(const EngineContext& ctx, const EngineConfig& config) {
    validate(config);
    if (config.horizon > ctx.schedule.horizon()) throw ValidationError("engine horizon exceeds schedule horizon");
    const auto& spec = ctx.spec;
    const std::size_t K = spec.penalty_count;
    const std::size_t kc = K + 1;
    const std::size_t T = config.horizon;
    const std::size_t D = config.delay;
    const std::size_t w = config.window;
    const std::size_t n_states = spec.joint_state_count();

    Episode ep;
    ep.horizon = T;
    ep.penalty_count = K;
    ep.states.resize(T);
    ep.detected.resize(T);
    ep.chosen.resize(T);
    ep.costs.resize(T * kc);
    ep.queues.resize(T * K);

    Rng rng(config.seed);
    std::vector<double> Q(K, 0.0);
    const std::vector<double> zeros(K, 0.0);
    const std::size_t replicas = config.replicate_queues ? spec.num_users() : 0;
    std::vector<std::vector<double>> replica_q(replicas, std::vector<double>(K, 0.0));

    // per-user digit extraction from a joint action
    std::vector<std::size_t> action_stride(spec.num_users(), 1);
    for (std::size_t i = 1; i < spec.num_users(); ++i)
        action_stride[i] = action_stride[i - 1] * spec.action_cards[i - 1];

    for (std::size_t t = 0; t < T; ++t) {
        const auto pi_t = ctx.schedule.at(t);
        const StateIndex omega = sample_from(pi_t, rng);
        ep.states[t] = omega;

        // Step 1 on omega(t-D-w+1 .. t-D), truncated to what exists
        std::span<const StateIndex> window;
        if (t >= D) {
            const std::size_t end = t - D + 1;
            const std::size_t begin = end >= w ? end - w : 0;
            window = std::span<const StateIndex>(ep.states.data() + begin, end - begin);
        }
        const std::size_t j_star = argmax_scores(window_scores(window, ctx.member_log_pmf));

        // Step 2
        const StrategyIndex m_star = select_strategy(Q, ctx.member_tables[j_star], config.V);

        ActionIndex action = ctx.actions.action(m_star, omega);
        if (replicas > 0) {
            // each user decides from its own queue copy and keeps only its own action digit
            ActionIndex composed = 0;
            for (std::size_t i = 0; i < replicas; ++i) {
                if (std::memcmp(replica_q[i].data(), Q.data(), K * sizeof(double)) != 0)
                    throw std::logic_error("queue replica diverged at slot " + std::to_string(t));
                const StrategyIndex m_i = select_strategy(replica_q[i], ctx.member_tables[j_star], config.V);
                const ActionIndex joint_i = ctx.actions.action(m_i, omega);
                composed += (joint_i / action_stride[i] % spec.action_cards[i]) * action_stride[i];
            }
            if (composed != action) throw std::logic_error("replicated decisions disagree at slot " + std::to_string(t));
            action = composed;
        }

        ep.detected[t] = j_star;
        ep.chosen[t] = m_star;
        for (std::size_t k = 0; k < kc; ++k) ep.costs[t * kc + k] = spec.cost_tables[k][action * n_states + omega];
        std::copy(Q.begin(), Q.end(), ep.queues.begin() + static_cast<std::ptrdiff_t>(t * K));

        std::span<const double> delayed = zeros;
        if (t >= D) delayed = std::span<const double>(ep.costs.data() + (t - D) * kc + 1, K);
        queue_update(Q, delayed, spec.constraints);
        for (auto& rq : replica_q) queue_update(rq, delayed, spec.constraints);
    }
    ep.final_queues = Q;
    return ep;
}

Episode run_episode(const ProblemSpec& spec, const DistributionSchedule& schedule, const CoveringSet& cover,
                    const EngineConfig& config) {
    return run_episode(EngineContext::prepare(spec, cover, schedule), config);
}

}  // namespace adpp

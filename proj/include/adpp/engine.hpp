#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "adpp/problem.hpp"
#include "adpp/strategy.hpp"

namespace adpp {

struct EngineConfig {
    double V = 0.0;             // drift-penalty weight
    std::size_t delay = 0;      // D, feedback delay in slots
    std::size_t window = 1;     // w, estimation window in slots
    std::size_t horizon = 0;    // T
    std::uint64_t seed = 0;
    /// Run one queue replica per user and require bitwise agreement.
    bool replicate_queues = false;
};

/// Throws ValidationError unless V >= 0, w >= 1 and T > D + w.
void validate(const EngineConfig& config);

/// Q_k <- max(Q_k + p_k(t - D) - c_k, 0) for every k, in place.
void queue_update(std::span<double> queues, std::span<const double> delayed_penalties,
                  std::span<const double> constraints);

/// 0.5 * ||Q||^2
double lyapunov(std::span<const double> queues);

/// Mean log-likelihood of the window under each cover member; -inf for a
/// member that gives zero mass to an observed state. All zeros for an
/// empty window.
std::vector<double> log_likelihood_scores(std::span<const StateIndex> window, const CoveringSet& cover);

/// Maximum-likelihood member, lowest index on ties. Throws
/// std::runtime_error when every member is excluded by the data.
std::size_t detect_distribution(std::span<const StateIndex> window, const CoveringSet& cover);

/// argmin_m V r_0^(m) + sum_k Q_k r_k^(m), lowest m on ties.
StrategyIndex select_strategy(std::span<const double> queues, const StrategyTable& table, double V);

/// max_m 0.5 sum_k sum_omega lambda(omega) |p_k(S^m(omega), omega) - c_k|.
double compute_B_t(const Distribution& lambda, const ProblemSpec& spec, const StrategyActionMap& actions);
double compute_B_t(const Distribution& lambda, const ProblemSpec& spec);

/// Immutable per-problem data shared by every run of an ensemble.
struct EngineContext {
    ProblemSpec spec;
    CoveringSet cover;
    DistributionSchedule schedule;
    StrategyActionMap actions;
    std::vector<StrategyTable> member_tables;
    std::vector<std::vector<double>> member_log_pmf;

    static EngineContext prepare(ProblemSpec spec, CoveringSet cover, DistributionSchedule schedule,
                                 std::size_t cap = kDefaultStrategyCap);

    std::size_t penalties() const { return spec.penalty_count; }
};

/// One slot of an episode.
struct SlotRecord {
    std::size_t t;
    StateIndex state;
    std::size_t detected;       // j*
    StrategyIndex chosen;       // m*
    std::span<const double> costs;   // p_0..p_K realized at t
    std::span<const double> queues;  // Q(t) used by the decision at t
};

/// Flat per-slot storage of one run.
struct Episode {
    std::size_t horizon = 0;
    std::size_t penalty_count = 0;
    std::vector<StateIndex> states;
    std::vector<std::size_t> detected;
    std::vector<StrategyIndex> chosen;
    std::vector<double> costs;   // horizon x (K+1)
    std::vector<double> queues;  // horizon x K
    std::vector<double> final_queues;  // Q(T)

    SlotRecord record(std::size_t t) const {
        const std::size_t kc = penalty_count + 1;
        return {t, states[t], detected[t], chosen[t],
                std::span<const double>(costs.data() + t * kc, kc),
                std::span<const double>(queues.data() + t * penalty_count, penalty_count)};
    }
    double cost(std::size_t t, std::size_t k) const { return costs[t * (penalty_count + 1) + k]; }
    double queue(std::size_t t, std::size_t k) const { return queues[t * penalty_count + k]; }
    /// Q_k(t) for 0 <= t <= T.
    double queue_at(std::size_t t, std::size_t k) const {
        return t == horizon ? final_queues[k] : queue(t, k);
    }
};

/// Executes the per-slot loop for t = 0..T-1: sample omega(t), detect the
/// cover member on the delayed window, pick the drift-plus-penalty minimizer,
/// realize p_k(t), then update queues with p_k(t - D). During warm-up the
/// window holds only the observations available so far.
Episode run_episode(const EngineContext& context, const EngineConfig& config);
Episode run_episode(const ProblemSpec& spec, const DistributionSchedule& schedule, const CoveringSet& cover,
                    const EngineConfig& config);

}  // namespace adpp

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace adpp {

/// Raised for malformed inputs (bad dimensions, out-of-range indices,
/// invalid configuration). The CLI maps it to exit code 1.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

using StateIndex = std::size_t;
using ActionIndex = std::size_t;

/// Mixed-radix helpers. Digit 0 is least significant.
std::vector<std::size_t> decode_mixed_radix(std::size_t index, std::span<const std::size_t> radices);
std::size_t encode_mixed_radix(std::span<const std::size_t> digits, std::span<const std::size_t> radices);

/// A finite distributed optimization instance.
///
/// Joint states and joint actions are enumerated in mixed-radix order with
/// user 0 as the least significant digit. Cost table k is stored densely,
/// row-major by joint action: `cost_tables[k][action * |Omega| + state]`.
/// Table 0 is the objective cost p_0; tables 1..K are the penalties.
struct ProblemSpec {
    std::vector<std::size_t> state_cards;
    std::vector<std::size_t> action_cards;
    std::size_t penalty_count = 0;
    std::vector<std::vector<double>> cost_tables;
    std::vector<double> constraints;
    std::vector<double> p_max;
    std::vector<double> p_min;

    std::size_t num_users() const { return state_cards.size(); }
    std::size_t joint_state_count() const;
    std::size_t joint_action_count() const;

    double cost(std::size_t k, ActionIndex action, StateIndex state) const {
        return cost_tables[k][action * joint_state_count() + state];
    }

    double u_max(std::size_t k) const { return p_max[k] - p_min[k]; }
    double b_max(std::size_t k) const;
    /// max over k = 0..K of b_max,k
    double b_max_all() const;
};

/// Returns one human-readable line per violated invariant; empty iff well-formed.
std::vector<std::string> validate_problem(const ProblemSpec& spec);

/// Throws ValidationError listing every problem if the spec is malformed.
void require_valid(const ProblemSpec& spec);

/// Probability mass function over the joint state enumeration.
class Distribution {
public:
    Distribution() = default;
    /// Throws ValidationError unless entries are non-negative and sum to 1 within 1e-12.
    explicit Distribution(std::vector<double> pmf);

    /// Normalizes non-negative weights before construction.
    static Distribution from_weights(std::vector<double> weights);
    static Distribution point_mass(std::size_t size, StateIndex at);
    static Distribution uniform(std::size_t size);
    /// Product of per-user marginals, user 0 least significant.
    static Distribution product(const std::vector<std::vector<double>>& marginals);

    std::size_t size() const { return pmf_.size(); }
    double operator[](StateIndex s) const { return pmf_[s]; }
    std::span<const double> pmf() const { return pmf_; }

    bool operator==(const Distribution&) const = default;

private:
    std::vector<double> pmf_;
};

/// Sum over states of |a - b|. Throws ValidationError on size mismatch.
double l1_distance(const Distribution& a, const Distribution& b);

/// Pointwise convex combination weight * a + (1 - weight) * b.
Distribution mix(const Distribution& a, const Distribution& b, double weight);

/// A finite delta-net of the distribution family.
struct CoveringSet {
    std::vector<Distribution> members;
    double radius = 0.0;   // delta
    double floor = 0.0;    // beta_delta
    double ceiling = 1.0;  // alpha_delta

    std::size_t size() const { return members.size(); }
};

struct NearestMember {
    std::size_t index;
    double distance;
};

/// Argmin of l1 distance over the cover; ties go to the lowest index.
NearestMember nearest_member(const CoveringSet& cover, const Distribution& target);

/// Natural log of the cover size.
double metric_entropy(const CoveringSet& cover);

/// Lists violations of the cover invariants: member entries inside
/// (floor, ceiling) wherever nonzero, and the limit within `radius`.
std::vector<std::string> validate_cover(const CoveringSet& cover, const Distribution& limit);

/// Smallest (floor, ceiling) pair strictly enclosing every nonzero member entry.
std::pair<double, double> enclosing_bounds(const std::vector<Distribution>& members);

/// Deterministic sequence of state distributions pi_t converging to a limit.
///
/// Two rules are supported. `Stationary` returns the limit at every slot.
/// `GeometricBlend` returns (1 - rho^t) * limit + rho^t * cycle[t mod |cycle|]
/// for t < mix_until and the limit afterwards, so ||pi_t - limit||_1 is
/// bounded by the envelope 2 * rho^t.
class DistributionSchedule {
public:
    enum class Rule { Stationary, GeometricBlend };

    static DistributionSchedule stationary(Distribution limit, std::size_t horizon);
    static DistributionSchedule geometric_blend(Distribution limit, std::vector<Distribution> cycle,
                                                double rho, std::size_t mix_until, std::size_t horizon);

    /// pi_t; throws ValidationError for t >= horizon.
    Distribution at(std::size_t t) const;
    /// Upper envelope on ||pi_t - limit||_1, non-increasing in t.
    double envelope(std::size_t t) const;

    const Distribution& limit() const { return limit_; }
    std::size_t horizon() const { return horizon_; }
    Rule rule() const { return rule_; }
    double rho() const { return rho_; }
    std::size_t mix_until() const { return mix_until_; }
    const std::vector<Distribution>& cycle() const { return cycle_; }

private:
    Rule rule_ = Rule::Stationary;
    Distribution limit_;
    std::vector<Distribution> cycle_;
    double rho_ = 0.0;
    std::size_t mix_until_ = 0;
    std::size_t horizon_ = 0;
};

using Rng = std::mt19937_64;

/// Uniform double in [0, 1) from the top 53 bits of one engine draw.
/// Platform-independent, unlike std::uniform_real_distribution.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Inverse-CDF draw over the fixed state order.
StateIndex sample_from(const Distribution& dist, Rng& rng);

/// Draw of omega(t) from pi_t. Throws ValidationError beyond the horizon.
StateIndex sample_state(const DistributionSchedule& schedule, std::size_t t, Rng& rng);

}  // namespace adpp

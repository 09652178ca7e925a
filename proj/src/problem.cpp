#include "adpp/problem.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace adpp {

std::vector<std::size_t> decode_mixed_radix(std::size_t index, std::span<const std::size_t> radices) {
    std::vector<std::size_t> digits(radices.size());
    for (std::size_t i = 0; i < radices.size(); ++i) {
        digits[i] = index % radices[i];
        index /= radices[i];
    }
    if (index != 0) throw ValidationError("mixed-radix index out of range");
    return digits;
}

std::size_t encode_mixed_radix(std::span<const std::size_t> digits, std::span<const std::size_t> radices) {
    if (digits.size() != radices.size()) throw ValidationError("mixed-radix digit count mismatch");
    std::size_t index = 0;
    for (std::size_t i = radices.size(); i-- > 0;) {
        if (digits[i] >= radices[i]) throw ValidationError("mixed-radix digit out of range");
        index = index * radices[i] + digits[i];
    }
    return index;
}

namespace {

std::size_t product_of(const std::vector<std::size_t>& cards) {
    std::size_t p = 1;
    for (auto c : cards) p *= c;
    return p;
}

}  // namespace

std::size_t ProblemSpec::joint_state_count() const { return product_of(state_cards); }
std::size_t ProblemSpec::joint_action_count() const { return product_of(action_cards); }

double ProblemSpec::b_max(std::size_t k) const { return std::max(std::abs(p_max[k]), std::abs(p_min[k])); }

double ProblemSpec::b_max_all() const {
    double b = 0.0;
    for (std::size_t k = 0; k <= penalty_count; ++k) b = std::max(b, b_max(k));
    return b;
}

std::vector<std::string> validate_problem(const ProblemSpec& spec) {
    std::vector<std::string> report;
    const auto n = spec.num_users();
    if (n == 0) report.emplace_back("num_users must be positive");
    if (spec.action_cards.size() != n) report.emplace_back("action_cards length differs from state_cards");
    for (auto c : spec.state_cards)
        if (c == 0) report.emplace_back("state cardinality must be positive");
    for (auto c : spec.action_cards)
        if (c == 0) report.emplace_back("action cardinality must be positive");
    const std::size_t k_total = spec.penalty_count + 1;
    if (spec.constraints.size() != spec.penalty_count) report.emplace_back("constraint count mismatch");
    if (spec.p_max.size() != k_total || spec.p_min.size() != k_total) report.emplace_back("bound count mismatch");
    if (spec.cost_tables.size() != k_total) report.emplace_back("cost table count mismatch");
    if (!report.empty()) return report;

    const std::size_t cells = spec.joint_state_count() * spec.joint_action_count();
    for (std::size_t k = 0; k < k_total; ++k) {
        if (spec.p_min[k] > spec.p_max[k]) {
            report.push_back("bound inversion at k=" + std::to_string(k));
        }
        const auto& table = spec.cost_tables[k];
        if (table.size() != cells) {
            report.push_back("cost table size mismatch at k=" + std::to_string(k));
            continue;
        }
        for (std::size_t i = 0; i < cells; ++i) {
            if (!std::isfinite(table[i])) {
                report.push_back("non-finite cost at k=" + std::to_string(k));
                break;
            }
            if (table[i] > spec.p_max[k] || table[i] < spec.p_min[k]) {
                std::ostringstream os;
                os << "bound violation at k=" << k << " cell " << i << ": " << table[i] << " outside ["
                   << spec.p_min[k] << ", " << spec.p_max[k] << "]";
                report.push_back(os.str());
                break;
            }
        }
    }
    for (auto c : spec.constraints)
        if (!std::isfinite(c)) report.emplace_back("non-finite constraint level");
    return report;
}

void require_valid(const ProblemSpec& spec) {
    auto report = validate_problem(spec);
    if (report.empty()) return;
    std::string msg = "invalid problem:";
    for (auto& line : report) msg += "\n  " + line;
    throw ValidationError(msg);
}

Distribution::Distribution(std::vector<double> pmf) : pmf_(std::move(pmf)) {
    if (pmf_.empty()) throw ValidationError("distribution must be non-empty");
    double sum = 0.0;
    for (double p : pmf_) {
        if (!(p >= 0.0) || !std::isfinite(p)) throw ValidationError("distribution entries must be finite and >= 0");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw ValidationError("distribution entries must sum to 1");
}

Distribution Distribution::from_weights(std::vector<double> weights) {
    double sum = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) throw ValidationError("weights must be >= 0");
        sum += w;
    }
    if (!(sum > 0.0)) throw ValidationError("weights must have positive mass");
    for (double& w : weights) w /= sum;
    // absorb rounding so the sum lands within tolerance
    double resid = 1.0 - std::accumulate(weights.begin(), weights.end(), 0.0);
    auto it = std::max_element(weights.begin(), weights.end());
    *it += resid;
    return Distribution(std::move(weights));
}

Distribution Distribution::point_mass(std::size_t size, StateIndex at) {
    if (at >= size) throw ValidationError("point mass outside support");
    std::vector<double> pmf(size, 0.0);
    pmf[at] = 1.0;
    return Distribution(std::move(pmf));
}

Distribution Distribution::uniform(std::size_t size) {
    return from_weights(std::vector<double>(size, 1.0));
}

Distribution Distribution::product(const std::vector<std::vector<double>>& marginals) {
    std::vector<double> joint{1.0};
    for (const auto& m : marginals) {
        std::vector<double> next(joint.size() * m.size());
        // new user becomes the more significant digit
        for (std::size_t a = 0; a < m.size(); ++a)
            for (std::size_t j = 0; j < joint.size(); ++j) next[a * joint.size() + j] = m[a] * joint[j];
        joint = std::move(next);
    }
    return from_weights(std::move(joint));
}

double l1_distance(const Distribution& a, const Distribution& b) {
    if (a.size() != b.size()) throw ValidationError("l1_distance: dimension mismatch");
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d += std::abs(a[i] - b[i]);
    return d;
}

Distribution mix(const Distribution& a, const Distribution& b, double weight) {
    if (a.size() != b.size()) throw ValidationError("mix: dimension mismatch");
    std::vector<double> pmf(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) pmf[i] = weight * a[i] + (1.0 - weight) * b[i];
    return Distribution::from_weights(std::move(pmf));
}

NearestMember nearest_member(const CoveringSet& cover, const Distribution& target) {
    if (cover.members.empty()) throw ValidationError("nearest_member: empty cover");
    NearestMember best{0, l1_distance(cover.members[0], target)};
    for (std::size_t j = 1; j < cover.members.size(); ++j) {
        double d = l1_distance(cover.members[j], target);
        if (d < best.distance) best = {j, d};
    }
    return best;
}

double metric_entropy(const CoveringSet& cover) {
    if (cover.members.empty()) throw ValidationError("metric_entropy: empty cover");
    return std::log(static_cast<double>(cover.members.size()));
}

std::vector<std::string> validate_cover(const CoveringSet& cover, const Distribution& limit) {
    std::vector<std::string> report;
    if (cover.members.empty()) {
        report.emplace_back("cover must be non-empty");
        return report;
    }
    if (!(cover.radius > 0.0)) report.emplace_back("cover radius must be positive");
    if (!(cover.ceiling > cover.floor && cover.floor > 0.0)) report.emplace_back("cover requires ceiling > floor > 0");
    for (std::size_t j = 0; j < cover.members.size(); ++j) {
        const auto& m = cover.members[j];
        if (m.size() != limit.size()) {
            report.push_back("cover member " + std::to_string(j) + " has wrong dimension");
            continue;
        }
        for (double p : m.pmf()) {
            if (p != 0.0 && !(p > cover.floor && p < cover.ceiling)) {
                report.push_back("cover member " + std::to_string(j) + " has an entry outside (floor, ceiling)");
                break;
            }
        }
    }
    if (report.empty() && !(nearest_member(cover, limit).distance < cover.radius))
        report.emplace_back("limit distribution is not within the cover radius");
    return report;
}

std::pair<double, double> enclosing_bounds(const std::vector<Distribution>& members) {
    double lo = 1.0, hi = 0.0;
    for (const auto& m : members)
        for (double p : m.pmf())
            if (p > 0.0) {
                lo = std::min(lo, p);
                hi = std::max(hi, p);
            }
    const double ceiling = hi < 1.0 ? 0.5 * (1.0 + hi) : 1.5;
    return {0.9 * lo, ceiling};
}

DistributionSchedule DistributionSchedule::stationary(Distribution limit, std::size_t horizon) {
    DistributionSchedule s;
    s.rule_ = Rule::Stationary;
    s.limit_ = std::move(limit);
    s.horizon_ = horizon;
    return s;
}

DistributionSchedule DistributionSchedule::geometric_blend(Distribution limit, std::vector<Distribution> cycle,
                                                           double rho, std::size_t mix_until,
                                                           std::size_t horizon) {
    if (cycle.empty()) throw ValidationError("geometric blend needs a non-empty cycle");
    if (!(rho >= 0.0 && rho < 1.0)) throw ValidationError("geometric blend needs 0 <= rho < 1");
    for (const auto& c : cycle)
        if (c.size() != limit.size()) throw ValidationError("geometric blend cycle dimension mismatch");
    DistributionSchedule s;
    s.rule_ = Rule::GeometricBlend;
    s.limit_ = std::move(limit);
    s.cycle_ = std::move(cycle);
    s.rho_ = rho;
    s.mix_until_ = mix_until;
    s.horizon_ = horizon;
    return s;
}

Distribution DistributionSchedule::at(std::size_t t) const {
    if (t >= horizon_) throw ValidationError("slot " + std::to_string(t) + " beyond schedule horizon");
    if (rule_ == Rule::Stationary || t >= mix_until_) return limit_;
    const double weight = std::pow(rho_, static_cast<double>(t));
    return mix(cycle_[t % cycle_.size()], limit_, weight);
}

double DistributionSchedule::envelope(std::size_t t) const {
    if (rule_ == Rule::Stationary || t >= mix_until_) return 0.0;
    return 2.0 * std::pow(rho_, static_cast<double>(t));
}

StateIndex sample_from(const Distribution& dist, Rng& rng) {
    const double u = uniform01(rng);
    double cdf = 0.0;
    const auto pmf = dist.pmf();
    std::size_t last_positive = 0;
    for (std::size_t s = 0; s < pmf.size(); ++s) {
        if (pmf[s] <= 0.0) continue;
        last_positive = s;
        cdf += pmf[s];
        if (u < cdf) return s;
    }
    return last_positive;
}

StateIndex sample_state(const DistributionSchedule& schedule, std::size_t t, Rng& rng) {
    return sample_from(schedule.at(t), rng);
}

}  // namespace adpp

#include "adpp/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace adpp {

void require_rectangular(const TraceEnsemble& ensemble) {
    if (ensemble.runs.empty()) throw ValidationError("trace ensemble is empty");
    const auto& first = ensemble.runs.front();
    for (const auto& ep : ensemble.runs) {
        if (ep.horizon != first.horizon || ep.penalty_count != first.penalty_count)
            throw ValidationError("trace ensemble is not rectangular");
        if (ep.costs.size() != ep.horizon * (ep.penalty_count + 1))
            throw ValidationError("episode cost storage inconsistent with its horizon");
    }
    if (ensemble.constraints.size() != first.penalty_count)
        throw ValidationError("ensemble constraint count does not match traces");
}

namespace {

double run_average(const Episode& ep, std::size_t k, std::size_t t) {
    double s = 0.0;
    for (std::size_t tau = 0; tau < t; ++tau) s += ep.cost(tau, k);
    return s / static_cast<double>(t);
}

void check_slot(const TraceEnsemble& ensemble, std::size_t k, std::size_t t) {
    require_rectangular(ensemble);
    if (t == 0 || t > ensemble.horizon()) throw ValidationError("time index must be in [1, T]");
    if (k > ensemble.penalty_count()) throw ValidationError("cost index out of range");
}

}  // namespace

TimeAverage time_average(const TraceEnsemble& ensemble, std::size_t k, std::size_t t) {
    check_slot(ensemble, k, t);
    TimeAverage out;
    out.per_run.reserve(ensemble.size());
    double sum = 0.0;
    for (const auto& ep : ensemble.runs) {
        out.per_run.push_back(run_average(ep, k, t));
        sum += out.per_run.back();
    }
    out.mean = sum / static_cast<double>(ensemble.size());
    return out;
}

std::vector<double> mean_running_average(const TraceEnsemble& ensemble, std::size_t k) {
    check_slot(ensemble, k, 1);
    const std::size_t T = ensemble.horizon();
    std::vector<double> mean(T, 0.0);
    for (const auto& ep : ensemble.runs) {
        double s = 0.0;
        for (std::size_t t = 0; t < T; ++t) {
            s += ep.cost(t, k);
            mean[t] += s / static_cast<double>(t + 1);
        }
    }
    for (double& m : mean) m /= static_cast<double>(ensemble.size());
    return mean;
}

double empirical_tail(const TraceEnsemble& ensemble, std::size_t k, std::size_t t, double threshold,
                      double reference) {
    const auto avg = time_average(ensemble, k, t);
    std::size_t hits = 0;
    for (double a : avg.per_run)
        if (a - reference > threshold) ++hits;
    return static_cast<double>(hits) / static_cast<double>(ensemble.size());
}

double empirical_dependence_tv(std::span<const double> first, std::span<const double> second) {
    if (first.size() != second.size() || first.empty())
        throw ValidationError("dependence estimate needs equally sized non-empty samples");
    std::map<double, std::size_t> levels_a, levels_b;
    for (double v : first) levels_a.emplace(v, 0);
    for (double v : second) levels_b.emplace(v, 0);
    std::size_t i = 0;
    for (auto& [v, id] : levels_a) id = i++;
    i = 0;
    for (auto& [v, id] : levels_b) id = i++;
    const std::size_t na = levels_a.size(), nb = levels_b.size();
    std::vector<double> joint(na * nb, 0.0), ma(na, 0.0), mb(nb, 0.0);
    const double inv = 1.0 / static_cast<double>(first.size());
    for (std::size_t r = 0; r < first.size(); ++r) {
        const auto a = levels_a[first[r]], b = levels_b[second[r]];
        joint[a * nb + b] += inv;
        ma[a] += inv;
        mb[b] += inv;
    }
    double tv = 0.0;
    for (std::size_t a = 0; a < na; ++a)
        for (std::size_t b = 0; b < nb; ++b) tv += std::abs(joint[a * nb + b] - ma[a] * mb[b]);
    return std::clamp(0.5 * tv, 0.0, 1.0);
}

std::vector<std::size_t> anchor_grid(std::size_t first, std::size_t horizon, std::size_t lag, std::size_t count) {
    std::vector<std::size_t> out;
    if (lag >= horizon || count == 0) return out;
    const std::size_t last = horizon - 1 - lag;  // need t + s <= T - 1
    if (first > last) return out;
    if (count == 1 || first == last) return {first};
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t t = first + (last - first) * i / (count - 1);
        if (out.empty() || out.back() != t) out.push_back(t);
    }
    return out;
}

MixingEstimate estimate_beta_one(const TraceEnsemble& ensemble, std::size_t k, std::span<const std::size_t> lags,
                                 std::size_t anchor_start, std::size_t anchor_count) {
    require_rectangular(ensemble);
    if (ensemble.size() < kMinMixingRuns)
        throw ValidationError("insufficient runs for mixing estimate (need at least " +
                              std::to_string(kMinMixingRuns) + ")");
    if (k > ensemble.penalty_count()) throw ValidationError("cost index out of range");
    MixingEstimate est;
    est.k = k;
    const std::size_t R = ensemble.size();
    std::vector<double> a(R), b(R);
    for (auto s : lags) {
        if (s == 0) throw ValidationError("mixing lag must be positive");
        auto anchors = anchor_grid(anchor_start, ensemble.horizon(), s, anchor_count);
        if (anchors.empty()) throw ValidationError("no anchor times fit lag " + std::to_string(s));
        double beta = 0.0;
        for (auto t : anchors) {
            for (std::size_t r = 0; r < R; ++r) {
                a[r] = ensemble.runs[r].cost(t, k);
                b[r] = ensemble.runs[r].cost(t + s, k);
            }
            beta = std::max(beta, empirical_dependence_tv(a, b));
            // sparse-cell check on the product law
            std::map<double, double> fa, fb;
            for (double v : a) fa[v] += 1.0;
            for (double v : b) fb[v] += 1.0;
            for (auto& [va, ca] : fa)
                for (auto& [vb, cb] : fb)
                    if (ca * cb / static_cast<double>(R) < 5.0) est.sparse_cells = true;
        }
        est.lags.push_back(s);
        est.beta_hat.push_back(beta);
        est.anchors.push_back(std::move(anchors));
    }
    return est;
}

PacBound pac_tail_bound(double epsilon, std::size_t t, std::size_t u_t, double beta_at_u, double u_max,
                        double mean_gap, PacExponent variant) {
    if (t == 0 || u_t == 0 || t % u_t != 0) throw ValidationError("u_t must divide t (u_t * v_t = t)");
    if (epsilon < mean_gap) throw ValidationError("epsilon below mean gap");
    PacBound out;
    out.u_t = u_t;
    out.v_t = t / u_t;
    out.eps_tk = epsilon - mean_gap;
    const double v = static_cast<double>(out.v_t);
    const double u = static_cast<double>(u_t);
    auto term = [&](double v_power) {
        const double num = 2.0 * out.eps_tk * out.eps_tk * v_power;
        if (u_max <= 0.0) return num > 0.0 ? 0.0 : u;
        return u * std::exp(-num / (u_max * u_max));
    };
    const double mixing = static_cast<double>(t) * beta_at_u;
    const double printed = term(v * v) + mixing;
    const double mcdiarmid = term(v) + mixing;
    out.value = variant == PacExponent::Printed ? printed : mcdiarmid;
    out.alternative = variant == PacExponent::Printed ? mcdiarmid : printed;
    return out;
}

std::vector<double> divergence_terms(const Distribution& pi_tau, const CoveringSet& cover, std::size_t i_star) {
    if (i_star >= cover.size()) throw ValidationError("i* outside the cover");
    const auto& ref = cover.members[i_star];
    std::vector<double> out;
    for (std::size_t j = 0; j < cover.size(); ++j) {
        if (j == i_star) continue;
        const auto& pj = cover.members[j];
        if (pj.size() != pi_tau.size() || ref.size() != pi_tau.size())
            throw ValidationError("divergence: dimension mismatch");
        double s = 0.0;
        for (std::size_t w = 0; w < pi_tau.size(); ++w) {
            if (pi_tau[w] == 0.0) continue;
            if (pj[w] <= 0.0 || ref[w] <= 0.0)
                throw ValidationError("cover member " + std::to_string(pj[w] <= 0.0 ? j : i_star) +
                                      " has zero mass where the state distribution does not; "
                                      "strictly positive members are required");
            s += pi_tau[w] * std::log(pj[w] / ref[w]);
        }
        out.push_back(s);
    }
    return out;
}

std::vector<double> divergence_series(const DistributionSchedule& schedule, const CoveringSet& cover,
                                      std::size_t i_star, std::size_t first, std::size_t last) {
    std::vector<double> out;
    if (cover.size() <= 1) return out;
    for (std::size_t tau = first; tau < last; ++tau) {
        const auto terms = divergence_terms(schedule.at(tau), cover, i_star);
        out.push_back(*std::min_element(terms.begin(), terms.end()));
    }
    return out;
}

DetectionBound detection_error_bound(double divergence, std::size_t w, double log_ratio, double entropy,
                                     DetectionBoundVariant variant, bool has_competitor) {
    if (w < 1) throw ValidationError("w must be >= 1");
    if (!has_competitor) return {0.0, 0.0};
    const double zeta = log_ratio * log_ratio;
    const double d2w = divergence * divergence * static_cast<double>(w);
    double exponent = 0.0;
    if (variant == DetectionBoundVariant::Printed) {
        exponent = -2.0 * zeta * d2w + entropy;
    } else {
        exponent = (zeta > 0.0 ? -2.0 * d2w / zeta : (d2w > 0.0 ? -std::numeric_limits<double>::infinity() : 0.0)) +
                   entropy;
    }
    const double raw = std::exp(exponent);
    return {raw, std::min(1.0, raw)};
}

namespace {

std::vector<double> strategy_drift_terms(const Distribution& lambda, const ProblemSpec& spec,
                                         const StrategyActionMap& actions) {
    const auto states = actions.states();
    std::vector<double> out(actions.count(), 0.0);
    for (StrategyIndex m = 0; m < actions.count(); ++m) {
        double s = 0.0;
        for (std::size_t k = 1; k <= spec.penalty_count; ++k) {
            const auto& costs = spec.cost_tables[k];
            const double c = spec.constraints[k - 1];
            for (StateIndex omega = 0; omega < states; ++omega)
                s += lambda[omega] * std::abs(costs[actions.action(m, omega) * states + omega] - c);
        }
        out[m] = 0.5 * s;
    }
    return out;
}

}  // namespace

std::vector<double> drift_constant_series(const DistributionSchedule& schedule, const ProblemSpec& spec,
                                          const StrategyActionMap& actions, std::size_t last) {
    std::vector<double> out(last, 0.0);
    const auto limit_terms = strategy_drift_terms(schedule.limit(), spec, actions);
    const double b_limit = limit_terms.empty() ? 0.0 : *std::max_element(limit_terms.begin(), limit_terms.end());
    if (schedule.rule() == DistributionSchedule::Rule::Stationary) {
        std::fill(out.begin(), out.end(), b_limit);
        return out;
    }
    std::vector<std::vector<double>> cycle_terms;
    for (const auto& d : schedule.cycle()) cycle_terms.push_back(strategy_drift_terms(d, spec, actions));
    for (std::size_t tau = 0; tau < last; ++tau) {
        if (tau >= schedule.mix_until()) {
            out[tau] = b_limit;
            continue;
        }
        const double weight = std::pow(schedule.rho(), static_cast<double>(tau));
        const auto& cyc = cycle_terms[tau % cycle_terms.size()];
        double best = 0.0;
        for (std::size_t m = 0; m < cyc.size(); ++m) best = std::max(best, weight * cyc[m] + (1.0 - weight) * limit_terms[m]);
        out[tau] = best;
    }
    return out;
}

BoundSeries bound_series(const EngineContext& ctx, std::size_t i_star, std::size_t window,
                         DetectionBoundVariant variant, std::size_t last) {
    BoundSeries s;
    s.B = drift_constant_series(ctx.schedule, ctx.spec, ctx.actions, last);
    s.l1_to_limit.resize(last);
    for (std::size_t tau = 0; tau < last; ++tau) s.l1_to_limit[tau] = l1_distance(ctx.schedule.at(tau), ctx.schedule.limit());
    s.D = divergence_series(ctx.schedule, ctx.cover, i_star, 0, last);
    const double log_ratio = std::log(ctx.cover.ceiling / ctx.cover.floor);
    const double entropy = metric_entropy(ctx.cover);
    s.Pe_up.assign(last, 0.0);
    if (!s.D.empty())
        for (std::size_t tau = 0; tau < last; ++tau)
            s.Pe_up[tau] = detection_error_bound(s.D[tau], window, log_ratio, entropy, variant).clipped;
    return s;
}

double waiting_time_threshold(double u_max0, std::size_t u_t, double epsilon, double gamma, double t_beta) {
    if (!(gamma > t_beta)) throw MixingTooSlow("mixing too slow for requested confidence");
    if (!(epsilon > 0.0)) throw ValidationError("epsilon must be positive");
    const double arg = std::log(static_cast<double>(u_t) / (gamma - t_beta));
    if (arg <= 0.0) return 0.0;
    return u_max0 * static_cast<double>(u_t) / (std::sqrt(2.0) * epsilon) * std::sqrt(arg);
}

BoundReport theorem3_quantities(const EngineContext& ctx, const BoundSeries& series, const Theorem3Inputs& in,
                                std::size_t t) {
    if (t == 0 || t > series.B.size()) throw ValidationError("t outside the computed bound series");
    if (in.u_t == 0 || t % in.u_t != 0) throw ValidationError("u_t must divide t (u_t * v_t = t)");
    if (!(in.V > 0.0)) throw ValidationError("finite-time envelopes need V > 0");
    const auto& spec = ctx.spec;
    const double td = static_cast<double>(t);
    const double D1 = 1.0 + 2.0 * static_cast<double>(in.delay);

    BoundReport r;
    r.t = t;
    r.u_t = in.u_t;
    r.v_t = t / in.u_t;
    r.delta_pi = spec.b_max_all() * (in.distance + in.nu);

    double p_max_all = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k <= spec.penalty_count; ++k) p_max_all = std::max(p_max_all, spec.p_max[k]);
    double l1_sum = 0.0, b_sum = 0.0;
    for (std::size_t tau = 0; tau < t; ++tau) {
        l1_sum += series.l1_to_limit[tau];
        b_sum += series.B[tau];
        r.sum_B_Pe += series.B[tau] * series.Pe_up[tau];
        r.sum_Pe += series.Pe_up[tau];
    }
    r.J_bar = p_max_all * (l1_sum / td + ctx.cover.radius);
    r.H_bar = D1 / td * b_sum;
    r.B_t = series.B[t - 1];
    r.D_t = series.D.empty() ? std::numeric_limits<double>::quiet_NaN() : series.D[t - 1];
    r.Pe_up = series.Pe_up[t - 1];

    const double V = in.V;
    const double c1 = in.c_hat + 1.0;
    const double p_max0 = spec.p_max[0];
    r.psi = (V * c1 * r.J_bar + r.H_bar + in.C / td) / V + D1 / (td * V) * r.sum_B_Pe + p_max0 / td * r.sum_Pe;
    r.Gamma = V * c1 * (r.delta_pi + r.J_bar) + r.H_bar + in.C + D1 * r.sum_B_Pe + p_max0 * r.sum_Pe;
    r.Q_up = std::sqrt(std::max(0.0, V * in.F_slack / td + r.Gamma / (td * td)));
    r.objective_bound = in.p_opt + c1 * r.delta_pi + r.psi + in.epsilon;
    for (double c : spec.constraints) r.constraint_bounds.push_back(c + r.Q_up + in.epsilon);

    const double u_max0 = spec.u_max(0);
    if (in.gamma0) r.threshold0 = waiting_time_threshold(u_max0, in.u_t, in.epsilon, *in.gamma0, td * in.beta0);
    if (in.gamma1) r.threshold1 = waiting_time_threshold(u_max0, in.u_t, in.epsilon, *in.gamma1, td * in.beta1);
    return r;
}

double lyapunov_constant(const TraceEnsemble& ensemble, std::size_t delay) {
    require_rectangular(ensemble);
    if (delay > ensemble.horizon()) throw ValidationError("delay beyond trace horizon");
    double c = 0.0;
    std::vector<double> q(ensemble.penalty_count());
    for (const auto& ep : ensemble.runs) {
        for (std::size_t k = 0; k < q.size(); ++k) q[k] = ep.queue_at(delay, k);
        c = std::max(c, lyapunov(q));
    }
    return c;
}

double slack_constant(double p_opt, double p_min0) { return std::max(0.0, p_opt - p_min0); }

}  // namespace adpp

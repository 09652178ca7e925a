#include "adpp/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>

namespace adpp {

namespace fs = std::filesystem;
using nlohmann::json;

Baseline solve_baseline(const RunConfig& config) {
    const auto start = std::chrono::steady_clock::now();
    const auto& spec = config.problem;
    const auto& limit = config.schedule.limit();
    Baseline b;
    const StrategyActionMap actions(spec);
    b.strategies = actions.count();
    const auto nearest = nearest_member(config.cover, limit);
    b.i_star = nearest.index;
    b.distance = nearest.distance;

    const auto table_limit = build_reward_matrix(limit, spec, actions);
    const auto table_member = build_reward_matrix(config.cover.members[b.i_star], spec, actions);
    b.under_limit = solve_lp(make_lp(table_limit, spec.constraints));
    b.under_member = solve_lp(make_lp(table_member, spec.constraints));
    // G is the relaxed LP under the nearest member
    if (b.under_limit.optimal() && b.under_member.optimal()) {
        b.lipschitz_range = config.analysis.lipschitz_range.value_or(
            default_lipschitz_range(table_member, spec.constraints));
        b.c_hat = estimate_lipschitz(table_member, spec.constraints, b.lipschitz_range, config.analysis.lipschitz_grid);
        b.gap = theorem2_gap(b.distance, config.analysis.nu, spec.b_max_all(), b.c_hat);
    }
    b.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return b;
}

json baseline_json(const Baseline& b) {
    json j{{"strategies", b.strategies},
           {"i_star", b.i_star},
           {"distance", b.distance},
           {"status", to_string(b.under_limit.status)},
           {"lp_value", b.under_limit.value},
           {"lp_utility", b.utility()},
           {"lp_iterations", b.under_limit.iterations},
           {"member_status", to_string(b.under_member.status)},
           {"member_lp_value", b.under_member.value},
           {"lipschitz_range", b.lipschitz_range},
           {"c_hat", b.c_hat},
           {"theorem2_gap", b.gap},
           {"seconds", b.seconds}};
    json support = json::array();
    for (std::size_t m = 0; m < b.under_limit.theta.size(); ++m)
        if (b.under_limit.theta[m] > 1e-12) support.push_back({{"m", m}, {"theta", b.under_limit.theta[m]}});
    j["support"] = support;
    return j;
}

SamplePathCheck sample_path_check(const TraceEnsemble& ensemble, const ProblemSpec& spec, std::size_t delay,
                                  std::span<const std::size_t> checkpoints) {
    require_rectangular(ensemble);
    SamplePathCheck out;
    out.worst_margin = -std::numeric_limits<double>::infinity();
    const std::size_t K = spec.penalty_count;
    for (const auto& ep : ensemble.runs) {
        for (std::size_t k = 1; k <= K; ++k) {
            const double c = spec.constraints[k - 1];
            const double slack = static_cast<double>(delay) * std::max(0.0, spec.p_max[k] - c);
            for (std::size_t t : checkpoints) {
                if (t == 0 || t > ep.horizon) throw ValidationError("checkpoint outside the trace horizon");
                double sum = 0.0;
                for (std::size_t tau = 0; tau + delay < t; ++tau) sum += ep.cost(tau, k) - c;
                const double td = static_cast<double>(t);
                const double margin = sum / td - (ep.queue_at(t, k - 1) / td + slack / td);
                ++out.checks;
                if (margin > 1e-12) ++out.violations;
                out.worst_margin = std::max(out.worst_margin, margin);
            }
        }
    }
    return out;
}

std::vector<PacCheck> pac_checks(const TraceEnsemble& ensemble, const ProblemSpec& spec, std::size_t anchor_start,
                                 std::span<const std::size_t> slot_counts, std::span<const double> offsets,
                                 PacExponent exponent, std::size_t anchors) {
    require_rectangular(ensemble);
    const std::size_t T = ensemble.horizon();
    std::vector<PacCheck> out;
    for (std::size_t k = 1; k <= spec.penalty_count; ++k) {
        const double c = spec.constraints[k - 1];
        std::map<std::size_t, double> beta;  // lag -> beta_hat_k
        for (std::size_t t : slot_counts) {
            if (t == 0 || t > T) throw ValidationError("slot count outside the trace horizon");
            std::vector<std::size_t> divisors;
            for (std::size_t u = 1; u <= t; ++u)
                if (t % u == 0 && anchor_start + u + 1 <= T) divisors.push_back(u);
            std::vector<std::size_t> missing;
            for (auto u : divisors)
                if (!beta.count(u)) missing.push_back(u);
            if (!missing.empty()) {
                const auto est = estimate_beta_one(ensemble, k, missing, anchor_start, anchors);
                for (std::size_t i = 0; i < est.lags.size(); ++i) beta[est.lags[i]] = est.beta_hat[i];
            }
            const double mean_gap = time_average(ensemble, k, t).mean - c;
            for (double e : offsets) {
                PacCheck best;
                best.k = k;
                best.t = t;
                best.epsilon = mean_gap + e;
                best.mean_gap = mean_gap;
                best.bound = std::numeric_limits<double>::infinity();
                for (auto u : divisors) {
                    const auto b = pac_tail_bound(best.epsilon, t, u, beta[u], spec.u_max(k), mean_gap, exponent);
                    if (b.clipped() < best.bound || best.u_t == 0) {
                        best.u_t = u;
                        best.beta = beta[u];
                        best.bound = b.clipped();
                        best.alternative = std::clamp(b.alternative, 0.0, 1.0);
                    }
                }
                if (best.u_t == 0) continue;
                best.empirical = empirical_tail(ensemble, k, t, best.epsilon, c);
                out.push_back(best);
            }
        }
    }
    return out;
}

namespace {

std::vector<std::size_t> usable_lags(std::span<const std::size_t> lags, std::size_t anchor_start, std::size_t T) {
    std::vector<std::size_t> out;
    for (auto s : lags)
        if (s > 0 && anchor_start + s + 1 <= T) out.push_back(s);
    return out;
}

}  // namespace

std::vector<BoundRow> bound_rows(const EngineContext& context, const RunConfig& config, const Baseline& baseline,
                                 const TraceEnsemble& ensemble, double V, std::span<const std::size_t> checkpoints) {
    require_rectangular(ensemble);
    const auto& spec = context.spec;
    const auto& an = config.analysis;
    const std::size_t T = ensemble.horizon();
    const std::size_t anchor_start = config.engine.delay + config.engine.window;
    const auto series = bound_series(context, baseline.i_star, config.engine.window, an.bound_variant, T);

    // beta_hat_0(s) and max_{k>=1} beta_hat_k(s)
    const auto lags = usable_lags(an.lags, anchor_start, T);
    const bool can_mix = ensemble.size() >= kMinMixingRuns && !lags.empty();
    std::map<std::size_t, double> beta0, beta1;
    if (can_mix) {
        for (std::size_t k = 0; k <= spec.penalty_count; ++k) {
            const auto est = estimate_beta_one(ensemble, k, lags, anchor_start, an.anchors);
            for (std::size_t i = 0; i < est.lags.size(); ++i) {
                auto& slot = k == 0 ? beta0[est.lags[i]] : beta1[est.lags[i]];
                slot = std::max(slot, est.beta_hat[i]);
            }
        }
    }

    Theorem3Inputs in;
    in.V = V;
    in.delay = config.engine.delay;
    in.window = config.engine.window;
    in.c_hat = baseline.c_hat;
    in.nu = an.nu;
    in.distance = baseline.distance;
    in.i_star = baseline.i_star;
    in.C = lyapunov_constant(ensemble, std::min(config.engine.delay, T));
    in.p_opt = baseline.under_limit.value;
    in.F_slack = slack_constant(in.p_opt, spec.p_min[0]);
    in.epsilon = an.epsilon;
    in.detection_variant = an.bound_variant;

    std::vector<BoundRow> rows;
    for (std::size_t t : checkpoints) {
        std::vector<std::size_t> candidates;
        for (auto s : an.lags)
            if (s > 0 && t % s == 0) candidates.push_back(s);
        if (candidates.empty()) candidates.push_back(1);
        BoundRow best;
        bool have = false;
        for (auto u : candidates) {
            in.u_t = u;
            in.beta0 = beta0.count(u) ? beta0[u] : 0.0;
            in.beta1 = beta1.count(u) ? beta1[u] : 0.0;
            const bool know_beta = can_mix && beta0.count(u);
            in.gamma0 = know_beta ? an.gamma0 : std::nullopt;
            in.gamma1 = know_beta ? an.gamma1 : std::nullopt;
            BoundRow row;
            try {
                row.report = theorem3_quantities(context, series, in, t);
            } catch (const MixingTooSlow&) {
                in.gamma0.reset();
                in.gamma1.reset();
                row.report = theorem3_quantities(context, series, in, t);
                row.mixing_too_slow = true;
            }
            if (!have || row.report.objective_bound < best.report.objective_bound) {
                best = std::move(row);
                have = true;
            }
        }
        best.empirical_objective = time_average(ensemble, 0, t).mean;
        for (std::size_t k = 1; k <= spec.penalty_count; ++k)
            best.empirical_constraints.push_back(time_average(ensemble, k, t).mean);
        rows.push_back(std::move(best));
    }
    return rows;
}

OutputFile write_bound_rows(const fs::path& dir, const std::string& name, const std::vector<BoundRow>& rows,
                            std::size_t penalties) {
    std::vector<std::string> header{"t",     "u_t", "v_t",   "delta_pi", "J_bar",           "H_bar",
                                    "B_t",   "D_t", "Pe_up", "psi",      "Gamma",           "Q_up",
                                    "objective_bound", "empirical_objective"};
    for (std::size_t k = 1; k <= penalties; ++k) header.push_back("constraint_bound_" + std::to_string(k));
    for (std::size_t k = 1; k <= penalties; ++k) header.push_back("empirical_constraint_" + std::to_string(k));
    header.insert(header.end(), {"threshold0", "threshold1", "mixing_too_slow"});
    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<std::vector<double>> data;
    for (const auto& row : rows) {
        const auto& r = row.report;
        std::vector<double> v{static_cast<double>(r.t), static_cast<double>(r.u_t), static_cast<double>(r.v_t),
                              r.delta_pi, r.J_bar, r.H_bar, r.B_t, r.D_t, r.Pe_up, r.psi, r.Gamma, r.Q_up,
                              r.objective_bound, row.empirical_objective};
        v.insert(v.end(), r.constraint_bounds.begin(), r.constraint_bounds.end());
        v.insert(v.end(), row.empirical_constraints.begin(), row.empirical_constraints.end());
        v.push_back(r.threshold0.value_or(nan));
        v.push_back(r.threshold1.value_or(nan));
        v.push_back(row.mixing_too_slow ? 1.0 : 0.0);
        data.push_back(std::move(v));
    }
    return write_csv(dir, name, header, data);
}

OutputFile write_mixing(const fs::path& dir, const TraceEnsemble& ensemble, std::span<const std::size_t> lags,
                        std::size_t anchor_start, std::size_t anchors) {
    std::vector<std::vector<double>> data;
    for (std::size_t k = 0; k <= ensemble.penalty_count(); ++k) {
        const auto est = estimate_beta_one(ensemble, k, lags, anchor_start, anchors);
        for (std::size_t i = 0; i < est.lags.size(); ++i)
            data.push_back({static_cast<double>(k), static_cast<double>(est.lags[i]), est.beta_hat[i],
                            static_cast<double>(est.anchors[i].size()), est.sparse_cells ? 1.0 : 0.0});
    }
    return write_csv(dir, "mixing.csv", {"k", "s", "beta_hat", "anchors", "sparse_cells"}, data);
}

std::vector<std::size_t> default_checkpoints(std::size_t horizon) {
    std::vector<std::size_t> out;
    for (std::size_t t : {100, 500, 1000, 2000, 5000, 10000, 20000, 50000})
        if (t < horizon) out.push_back(t);
    out.push_back(horizon);
    return out;
}

Reproduction reproduce_paper(const RunConfig& config, const fs::path& out, const EnsembleOptions& options) {
    Reproduction rep;
    rep.baseline = solve_baseline(config);
    if (!rep.baseline.under_limit.optimal())
        throw std::runtime_error(std::string("baseline LP is ") + to_string(rep.baseline.under_limit.status));
    const auto context = EngineContext::prepare(config.problem, config.cover, config.schedule);
    const std::size_t K = config.problem.penalty_count;
    const double p_opt_utility = rep.baseline.utility();

    std::vector<OutputFile> files;
    EnsembleResult last;
    json curves = json::array();
    for (double V : config.v_list) {
        EngineConfig engine = config.engine;
        engine.V = V;
        auto result = run_ensemble(context, engine, config.runs, options);
        if (result.ensemble.size() == 0) {
            if (result.error) std::rethrow_exception(result.error);
            throw std::runtime_error("ensemble interrupted before any run completed");
        }
        const std::string tag = format_double(V);

        const std::size_t T = result.ensemble.horizon();
        std::vector<std::vector<double>> mean(K + 1);
        for (std::size_t k = 0; k <= K; ++k) mean[k] = mean_running_average(result.ensemble, k);
        std::vector<std::vector<double>> util_rows, power_rows;
        for (std::size_t t = 1; t <= T; ++t) {
            util_rows.push_back({static_cast<double>(t), -mean[0][t - 1], p_opt_utility});
            std::vector<double> row{static_cast<double>(t)};
            for (std::size_t k = 1; k <= K; ++k) row.push_back(mean[k][t - 1]);
            power_rows.push_back(std::move(row));
        }
        std::vector<std::string> power_header{"t"};
        for (std::size_t k = 1; k <= K; ++k) power_header.push_back("power_" + std::to_string(k));
        files.push_back(write_csv(out, "utility_V" + tag + ".csv", {"t", "utility", "lp_optimum"}, util_rows));
        files.push_back(write_csv(out, "power_V" + tag + ".csv", power_header, power_rows));

        CurveSummary cs;
        cs.V = V;
        cs.utility = -mean[0][T - 1];
        for (std::size_t k = 1; k <= K; ++k) cs.power.push_back(mean[k][T - 1]);
        cs.wall_seconds = result.wall_seconds;
        cs.complete = result.complete();

        if (V > 0.0) {
            const auto cps = default_checkpoints(T);
            const auto rows = bound_rows(context, config, rep.baseline, result.ensemble, V, cps);
            files.push_back(write_bound_rows(out, "bounds_V" + tag + ".csv", rows, K));
        }
        curves.push_back({{"V", V},
                          {"runs", result.ensemble.size()},
                          {"complete", cs.complete},
                          {"utility_at_T", cs.utility},
                          {"gap_to_optimum", p_opt_utility - cs.utility},
                          {"power_at_T", cs.power},
                          {"wall_seconds", cs.wall_seconds}});
        rep.curves.push_back(cs);
        const bool stop = !result.complete();
        last = std::move(result);
        if (stop) break;
    }

    {
        fs::create_directories(out);
        std::ofstream b(out / "baseline.json");
        b << baseline_json(rep.baseline).dump(2) << '\n';
        std::ofstream s(out / "summary.json");
        s << json{{"lp_optimum_utility", p_opt_utility},
                  {"theorem2_gap", rep.baseline.gap},
                  {"runs", config.runs},
                  {"horizon", config.engine.horizon},
                  {"curves", curves}}
                 .dump(2)
          << '\n';
    }
    files.push_back({"baseline.json", 0});
    files.push_back({"summary.json", 0});
    // the ensemble fields describe the last V processed
    last.ensemble.runs.clear();
    write_manifest(out, config, last, files, json{{"v_list", config.v_list}});
    if (last.error) std::rethrow_exception(last.error);
    return rep;
}

}  // namespace adpp

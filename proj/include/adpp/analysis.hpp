#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "adpp/engine.hpp"
#include "adpp/problem.hpp"

namespace adpp {

/// R runs of equal length plus the constraint levels they were run against.
struct TraceEnsemble {
    std::vector<Episode> runs;
    std::vector<double> constraints;

    std::size_t size() const { return runs.size(); }
    std::size_t horizon() const { return runs.empty() ? 0 : runs.front().horizon; }
    std::size_t penalty_count() const { return runs.empty() ? 0 : runs.front().penalty_count; }
};

/// Throws ValidationError unless every run shares horizon and penalty count.
void require_rectangular(const TraceEnsemble& ensemble);

struct TimeAverage {
    std::vector<double> per_run;
    double mean = 0.0;
};

/// (1/t) sum_{tau < t} p_k(tau) per run, plus the ensemble mean.
TimeAverage time_average(const TraceEnsemble& ensemble, std::size_t k, std::size_t t);

/// Ensemble mean of the running average (1/t) sum_{tau < t} p_k(tau) for t = 1..T.
std::vector<double> mean_running_average(const TraceEnsemble& ensemble, std::size_t k);

/// Fraction of runs whose time average minus `reference` exceeds `threshold`.
double empirical_tail(const TraceEnsemble& ensemble, std::size_t k, std::size_t t, double threshold,
                      double reference);

/// Total variation (half L1) between the empirical joint law of paired
/// samples and the product of its empirical marginals.
double empirical_dependence_tv(std::span<const double> first, std::span<const double> second);

struct MixingEstimate {
    std::size_t k = 0;
    std::vector<std::size_t> lags;
    std::vector<double> beta_hat;                     // one per lag
    std::vector<std::vector<std::size_t>> anchors;    // anchor times per lag
    bool sparse_cells = false;  // some joint cell had expected count < 5
};

inline constexpr std::size_t kMinMixingRuns = 50;

/// `count` anchors evenly spaced in [first, T - s]; fewer if the range is short.
std::vector<std::size_t> anchor_grid(std::size_t first, std::size_t horizon, std::size_t lag, std::size_t count);

/// beta_hat(s) = max over anchors t of TV(joint(p_k(t), p_k(t+s)), product of marginals),
/// with laws estimated across runs. Throws ValidationError for R < 50.
MixingEstimate estimate_beta_one(const TraceEnsemble& ensemble, std::size_t k, std::span<const std::size_t> lags,
                                 std::size_t anchor_start, std::size_t anchor_count = 20);

enum class PacExponent {
    Printed,    // exp(-2 eps^2 v_t^2 / u_max^2)
    McDiarmid,  // exp(-2 eps^2 v_t / u_max^2)
};

struct PacBound {
    double eps_tk = 0.0;
    std::size_t u_t = 0;
    std::size_t v_t = 0;
    double value = 0.0;        // selected variant, raw
    double alternative = 0.0;  // the other exponent variant, raw
    double clipped() const { return value < 0.0 ? 0.0 : (value > 1.0 ? 1.0 : value); }
};

/// u_t exp{-2 eps_tk^2 v_t^(2 or 1) / u_max^2} + t beta(u_t), with
/// eps_tk = epsilon - mean_gap and v_t = t / u_t. Throws ValidationError if
/// u_t does not divide t or epsilon < mean_gap.
PacBound pac_tail_bound(double epsilon, std::size_t t, std::size_t u_t, double beta_at_u, double u_max,
                        double mean_gap, PacExponent variant = PacExponent::Printed);

/// D_{tau,j} = E_{pi_tau} log(P_j / P_{i*}) for every j != i*, exact.
std::vector<double> divergence_terms(const Distribution& pi_tau, const CoveringSet& cover, std::size_t i_star);

/// D_tau = min_{j != i*} D_{tau,j} for tau in [first, last). Empty for a
/// single-member cover.
std::vector<double> divergence_series(const DistributionSchedule& schedule, const CoveringSet& cover,
                                      std::size_t i_star, std::size_t first, std::size_t last);

enum class DetectionBoundVariant {
    Printed,    // exp{-2 zeta D^2 w + H}, zeta = [log(alpha/beta)]^2
    Hoeffding,  // exp{-2 D^2 w / [log(alpha/beta)]^2 + H}
};

struct DetectionBound {
    double raw = 0.0;
    double clipped = 0.0;
};

/// Upper bound on Pr{j* != i*}. `log_ratio` is log(ceiling / floor).
/// A cover without competitors (H = 0 and no j != i*) yields 0.
DetectionBound detection_error_bound(double divergence, std::size_t w, double log_ratio, double entropy,
                                     DetectionBoundVariant variant = DetectionBoundVariant::Printed,
                                     bool has_competitor = true);

class MixingTooSlow : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Inputs to the finite-time objective/constraint envelopes.
struct Theorem3Inputs {
    double V = 0.0;
    std::size_t delay = 0;
    std::size_t window = 1;
    double c_hat = 0.0;         // Lipschitz estimate of G
    double nu = 0.0;            // stationarity tolerance
    double distance = 0.0;      // d_{pi, P_i*}
    std::size_t i_star = 0;
    double C = 0.0;             // bound on L(D)
    double F_slack = 0.0;
    double p_opt = 0.0;         // cost convention
    double epsilon = 0.05;
    std::size_t u_t = 1;
    double beta0 = 0.0;         // beta_hat_0(u_t)
    double beta1 = 0.0;         // max_{k>=1} beta_hat_k(u_t)
    std::optional<double> gamma0;
    std::optional<double> gamma1;
    DetectionBoundVariant detection_variant = DetectionBoundVariant::Printed;
};

struct BoundReport {
    std::size_t t = 0;
    std::size_t u_t = 0;
    std::size_t v_t = 0;
    double delta_pi = 0.0;     // b_max (d + nu)
    double J_bar = 0.0;
    double H_bar = 0.0;
    double B_t = 0.0;          // B at slot t-1
    double D_t = 0.0;          // D at slot t-1 (NaN without competitors)
    double Pe_up = 0.0;        // clipped, slot t-1
    double sum_B_Pe = 0.0;
    double sum_Pe = 0.0;
    double psi = 0.0;
    double Gamma = 0.0;
    double Q_up = 0.0;
    double objective_bound = 0.0;             // p_opt + (c+1) Delta + psi + eps
    std::vector<double> constraint_bounds;    // c_k + Q_up + eps
    std::optional<double> threshold0;         // T_{t,0}
    std::optional<double> threshold1;         // T_{t,1}
};

/// Per-slot series that the envelopes sum over, computed once per schedule.
struct BoundSeries {
    std::vector<double> B;          // B_tau
    std::vector<double> l1_to_limit;
    std::vector<double> D;          // D_tau (empty without competitors)
    std::vector<double> Pe_up;      // clipped
};

/// B_tau exploits linearity in pi_tau for blended schedules.
std::vector<double> drift_constant_series(const DistributionSchedule& schedule, const ProblemSpec& spec,
                                          const StrategyActionMap& actions, std::size_t last);

BoundSeries bound_series(const EngineContext& context, std::size_t i_star, std::size_t window,
                         DetectionBoundVariant variant, std::size_t last);

/// Direct substitution of every finite-time quantity at slot count t.
/// Throws MixingTooSlow when a supplied gamma_i <= t beta_i(u_t).
BoundReport theorem3_quantities(const EngineContext& context, const BoundSeries& series, const Theorem3Inputs& in,
                                std::size_t t);

/// Waiting-time threshold T_{t,i}; throws MixingTooSlow unless gamma > t beta.
double waiting_time_threshold(double u_max0, std::size_t u_t, double epsilon, double gamma, double t_beta);

/// max over runs of 0.5 ||Q(D)||^2
double lyapunov_constant(const TraceEnsemble& ensemble, std::size_t delay);

/// max(0, p_opt - p_min,0)
double slack_constant(double p_opt, double p_min0);

}  // namespace adpp

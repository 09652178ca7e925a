#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "adpp/analysis.hpp"
#include "adpp/config.hpp"
#include "adpp/ensemble.hpp"
#include "adpp/lp.hpp"

namespace adpp {

/// LP under the limit law and under the nearest cover member, plus the
/// Lipschitz estimate and perturbation gap relating them.
struct Baseline {
    std::size_t strategies = 0;
    std::size_t i_star = 0;
    double distance = 0.0;  // ||pi - P_i*||_1
    LpSolution under_limit;
    LpSolution under_member;
    double lipschitz_range = 0.0;
    double c_hat = 0.0;
    double gap = 0.0;
    double seconds = 0.0;

    double utility() const { return -under_limit.value; }
};

Baseline solve_baseline(const RunConfig& config);
nlohmann::json baseline_json(const Baseline& baseline);

/// Checks (1/t) sum_{tau < t-D} (p_k - c_k) <= Q_k(t)/t + D max(0, p_max,k - c_k)/t.
struct SamplePathCheck {
    std::size_t checks = 0;
    std::size_t violations = 0;
    double worst_margin = 0.0;  // max of lhs - rhs
};

SamplePathCheck sample_path_check(const TraceEnsemble& ensemble, const ProblemSpec& spec, std::size_t delay,
                                  std::span<const std::size_t> checkpoints);

struct PacCheck {
    std::size_t k = 0;
    std::size_t t = 0;
    std::size_t u_t = 0;
    double epsilon = 0.0;    // eps_k
    double mean_gap = 0.0;   // ensemble-mean time average minus c_k
    double beta = 0.0;       // beta_hat_k(u_t)
    double bound = 0.0;      // clipped, selected exponent
    double alternative = 0.0;
    double empirical = 0.0;  // tail frequency of time average - c_k > eps_k
};

/// Default grid. At desk-scale R, t beta_hat stays below 1 only for small t.
inline constexpr std::size_t kPacSlotCounts[] = {2, 4, 5, 10, 20, 50, 100, 500, 1000, 5000};
inline constexpr double kPacOffsets[] = {0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.5};

/// For each penalty k >= 1, slot count t and offset e, evaluates the tail
/// bound at eps_k = mean_gap + e, minimized over divisors u_t of t with a
/// usable mixing estimate.

std::vector<PacCheck> pac_checks(const TraceEnsemble& ensemble, const ProblemSpec& spec, std::size_t anchor_start,
                                 std::span<const std::size_t> slot_counts, std::span<const double> offsets,
                                 PacExponent exponent, std::size_t anchors = 20);

/// One BoundReport row per checkpoint, u_t chosen among `lags` dividing t to
/// minimize the objective envelope. Beta estimates need R >= 50; with fewer
/// runs the waiting-time thresholds are skipped.
struct BoundRow {
    BoundReport report;
    double empirical_objective = 0.0;
    std::vector<double> empirical_constraints;
    bool mixing_too_slow = false;
};

std::vector<BoundRow> bound_rows(const EngineContext& context, const RunConfig& config, const Baseline& baseline,
                                 const TraceEnsemble& ensemble, double V, std::span<const std::size_t> checkpoints);

OutputFile write_bound_rows(const std::filesystem::path& dir, const std::string& name,
                            const std::vector<BoundRow>& rows, std::size_t penalties);

/// mixing.csv rows (k, s, beta_hat, anchors, sparse_cells) for every penalty.
OutputFile write_mixing(const std::filesystem::path& dir, const TraceEnsemble& ensemble,
                        std::span<const std::size_t> lags, std::size_t anchor_start, std::size_t anchors);

struct CurveSummary {
    double V = 0.0;
    double utility = 0.0;            // mean running-average utility at T
    std::vector<double> power;       // mean running-average penalty k at T
    double wall_seconds = 0.0;
    bool complete = true;
};

struct Reproduction {
    Baseline baseline;
    std::vector<CurveSummary> curves;
};

/// For each V in config.v_list: run the ensemble and write utility_V*.csv,
/// power_V*.csv and bounds_V*.csv; then baseline.json, summary.json and a
/// manifest. Traces themselves are not persisted.
Reproduction reproduce_paper(const RunConfig& config, const std::filesystem::path& out,
                             const EnsembleOptions& options = {});

/// Checkpoints 100, 500, 1000, ... up to T, always including T.
std::vector<std::size_t> default_checkpoints(std::size_t horizon);

}  // namespace adpp

#include "adpp/cli.hpp"

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "adpp/harness.hpp"
#include "adpp/scenario.hpp"

namespace adpp {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::atomic<bool> g_interrupted{false};

extern "C" void on_sigint(int) { g_interrupted = true; }

class SigintScope {
public:
    SigintScope() { previous_ = std::signal(SIGINT, on_sigint); }
    ~SigintScope() { std::signal(SIGINT, previous_); }

private:
    void (*previous_)(int);
};

struct Common {
    std::string config_path;
    std::string scenario;
    std::optional<std::size_t> runs;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> horizon;
    std::optional<double> V;
    std::string out;
    std::vector<double> v_list;
    std::string bound_variant;
    std::vector<std::size_t> lags;
    std::size_t threads = 0;
    bool quiet = false;
};

void add_source(CLI::App* app, Common& c) {
    app->add_option("--config", c.config_path, "JSON run configuration")->check(CLI::ExistingFile);
    app->add_option("--scenario", c.scenario, "built-in scenario (paper-sec4); default when --config is absent");
}

void add_overrides(CLI::App* app, Common& c) {
    app->add_option("--runs", c.runs, "ensemble size R")->check(CLI::PositiveNumber);
    app->add_option("--seed", c.seed, "master seed");
    app->add_option("--horizon", c.horizon, "slot count T")->check(CLI::PositiveNumber);
    app->add_option("--out", c.out, "output directory");
    app->add_option("--threads", c.threads, "worker threads (default ADPP_THREADS or all cores)");
    app->add_flag("--quiet", c.quiet, "no progress output");
}

void add_analysis(CLI::App* app, Common& c) {
    app->add_option("--bound-variant", c.bound_variant, "detection bound form")
        ->check(CLI::IsMember({"printed", "hoeffding"}));
    app->add_option("--lags", c.lags, "mixing lags, comma separated")->delimiter(',');
}

RunConfig resolve(const Common& c) {
    if (!c.config_path.empty() && !c.scenario.empty())
        throw ValidationError("give either --config or --scenario, not both");
    RunConfig cfg = !c.config_path.empty() ? load_config(c.config_path)
                                           : preset_config(c.scenario.empty() ? kSensorScenarioName : c.scenario);
    if (c.runs) cfg.runs = *c.runs;
    if (c.seed) cfg.engine.seed = *c.seed;
    if (c.V) {
        if (*c.V < 0.0) throw ValidationError("V must be >= 0");
        cfg.engine.V = *c.V;
    }
    if (!c.out.empty()) cfg.output_dir = c.out;
    if (!c.v_list.empty()) {
        for (double v : c.v_list)
            if (v < 0.0) throw ValidationError("v_list entries must be >= 0");
        cfg.v_list = c.v_list;
    }
    if (!c.bound_variant.empty())
        cfg.analysis.bound_variant =
            c.bound_variant == "printed" ? DetectionBoundVariant::Printed : DetectionBoundVariant::Hoeffding;
    if (!c.lags.empty()) cfg.analysis.lags = c.lags;
    if (c.horizon) {
        cfg.engine.horizon = *c.horizon;
        if (cfg.schedule_source.contains("mix_until")) cfg.schedule_source.erase("mix_until");
        rebuild_schedule(cfg);
    }
    validate(cfg.engine);
    return cfg;
}

EnsembleOptions ensemble_options(const Common& c, std::ostream& err) {
    EnsembleOptions opt;
    opt.threads = c.threads;
    opt.cancel = &g_interrupted;
    if (!c.quiet) {
        opt.progress = [&err](std::size_t done, std::size_t total) {
            if (done == total || done % 10 == 0) err << "  runs " << done << "/" << total << "\n";
        };
    }
    return opt;
}

int cmd_solve_baseline(const Common& c, std::ostream& out) {
    const auto cfg = resolve(c);
    const auto b = solve_baseline(cfg);
    out << "strategies: " << b.strategies << "\n";
    out << "status: " << to_string(b.under_limit.status) << "\n";
    if (!b.under_limit.optimal()) return 2;
    char line[160];
    std::snprintf(line, sizeof line, "LP optimum (utility): %.6f\n", b.utility());
    out << line;
    std::snprintf(line, sizeof line, "LP optimum under nearest cover member %zu (utility): %.6f\n", b.i_star,
                  -b.under_member.value);
    out << line;
    std::snprintf(line, sizeof line, "lipschitz estimate c_hat: %.6f on [0, %.6f]\n", b.c_hat, b.lipschitz_range);
    out << line;
    std::snprintf(line, sizeof line, "perturbation gap: %.6f (distance %.6f, nu %.4f)\n", b.gap, b.distance,
                  cfg.analysis.nu);
    out << line;
    std::snprintf(line, sizeof line, "solve time: %.3f s\n", b.seconds);
    out << line;
    if (!c.out.empty()) {
        fs::create_directories(c.out);
        std::ofstream f(fs::path(c.out) / "baseline.json");
        f << baseline_json(b).dump(2) << '\n';
    }
    return 0;
}

int cmd_simulate(const Common& c, std::ostream& out, std::ostream& err) {
    const auto cfg = resolve(c);
    const auto context = EngineContext::prepare(cfg.problem, cfg.cover, cfg.schedule);
    SigintScope guard;
    auto result = run_ensemble(context, cfg.engine, cfg.runs, ensemble_options(c, err));
    const fs::path dir = cfg.output_dir;
    const auto files = write_traces(dir, result, cfg.shard_traces);
    write_manifest(dir, cfg, result, files);
    out << "runs completed: " << result.run_ids.size() << "/" << result.requested << "\n";
    out << "wall clock: " << format_double(result.wall_seconds) << " s\n";
    out << "manifest: " << (dir / "manifest.json").string() << "\n";
    if (result.error) std::rethrow_exception(result.error);
    if (!result.complete()) {
        err << "interrupted; manifest marks the ensemble incomplete\n";
        return 2;
    }
    return 0;
}

int cmd_analyze(const Common& c, const std::string& traces, std::ostream& out) {
    auto st = read_traces(traces);
    auto& cfg = st.config;
    if (!c.lags.empty()) cfg.analysis.lags = c.lags;
    if (!c.bound_variant.empty())
        cfg.analysis.bound_variant =
            c.bound_variant == "printed" ? DetectionBoundVariant::Printed : DetectionBoundVariant::Hoeffding;
    const fs::path dir = c.out.empty() ? fs::path(traces) : fs::path(c.out);
    const std::size_t anchor_start = cfg.engine.delay + cfg.engine.window;
    std::vector<OutputFile> files;
    files.push_back(write_mixing(dir, st.ensemble, cfg.analysis.lags, anchor_start, cfg.analysis.anchors));
    const auto baseline = solve_baseline(cfg);
    if (cfg.engine.V > 0.0 && baseline.under_limit.optimal()) {
        const auto context = EngineContext::prepare(cfg.problem, cfg.cover, cfg.schedule);
        const auto rows = bound_rows(context, cfg, baseline, st.ensemble, cfg.engine.V,
                                     default_checkpoints(st.ensemble.horizon()));
        files.push_back(write_bound_rows(dir, "bounds.csv", rows, cfg.problem.penalty_count));
    }
    for (const auto& f : files) out << (dir / f.path).string() << " (" << f.rows << " rows)\n";
    return 0;
}

int cmd_verify_bounds(const Common& c, const std::string& traces, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    TraceEnsemble ensemble;
    if (!traces.empty()) {
        auto st = read_traces(traces);
        cfg = std::move(st.config);
        ensemble = std::move(st.ensemble);
        if (!c.bound_variant.empty())
            cfg.analysis.bound_variant =
                c.bound_variant == "printed" ? DetectionBoundVariant::Printed : DetectionBoundVariant::Hoeffding;
        if (!c.lags.empty()) cfg.analysis.lags = c.lags;
        if (!c.out.empty()) cfg.output_dir = c.out;
    } else {
        cfg = resolve(c);
    }
    const auto context = EngineContext::prepare(cfg.problem, cfg.cover, cfg.schedule);
    if (traces.empty()) {
        SigintScope guard;
        auto result = run_ensemble(context, cfg.engine, cfg.runs, ensemble_options(c, err));
        if (result.error) std::rethrow_exception(result.error);
        if (!result.complete()) throw std::runtime_error("interrupted");
        ensemble = std::move(result.ensemble);
    }
    const fs::path dir = cfg.output_dir;
    const std::size_t T = ensemble.horizon();
    const std::size_t K = cfg.problem.penalty_count;
    const auto checkpoints = default_checkpoints(T);
    const auto baseline = solve_baseline(cfg);
    if (!baseline.under_limit.optimal()) throw std::runtime_error("baseline LP is not optimal");

    const auto sp = sample_path_check(ensemble, cfg.problem, cfg.engine.delay, checkpoints);
    write_csv(dir, "sample_path.csv", {"checks", "violations", "worst_margin"},
              {{static_cast<double>(sp.checks), static_cast<double>(sp.violations), sp.worst_margin}});
    out << "sample-path queue bound: " << sp.violations << " violations in " << sp.checks << " checks\n";

    // Detection: empirical error at slot t-1 against both bound forms.
    const auto printed = bound_series(context, baseline.i_star, cfg.engine.window, DetectionBoundVariant::Printed, T);
    const auto hoeff = bound_series(context, baseline.i_star, cfg.engine.window, DetectionBoundVariant::Hoeffding, T);
    std::vector<std::vector<double>> det;
    for (std::size_t t : checkpoints) {
        std::size_t miss = 0;
        for (const auto& ep : ensemble.runs) miss += ep.detected[t - 1] != baseline.i_star;
        const double nan = std::numeric_limits<double>::quiet_NaN();
        det.push_back({static_cast<double>(t), printed.D.empty() ? nan : printed.D[t - 1], printed.Pe_up[t - 1],
                       hoeff.Pe_up[t - 1], static_cast<double>(miss) / static_cast<double>(ensemble.size())});
    }
    write_csv(dir, "detection.csv", {"t", "D_t", "Pe_up_printed", "Pe_up_hoeffding", "empirical"}, det);

    if (ensemble.size() >= kMinMixingRuns) {
        std::vector<std::size_t> slot_counts;
        for (std::size_t t : kPacSlotCounts)
            if (t <= T) slot_counts.push_back(t);
        const auto pac = pac_checks(ensemble, cfg.problem, cfg.engine.delay + cfg.engine.window, slot_counts, kPacOffsets,
                                    cfg.analysis.pac_exponent, cfg.analysis.anchors);
        std::vector<std::vector<double>> rows;
        std::size_t live = 0, bad = 0;
        for (const auto& p : pac) {
            rows.push_back({static_cast<double>(p.k), static_cast<double>(p.t), static_cast<double>(p.u_t), p.epsilon,
                            p.mean_gap, p.beta, p.bound, p.alternative, p.empirical});
            if (p.bound < 0.9) {
                ++live;
                if (p.empirical > p.bound) ++bad;
            }
        }
        write_csv(dir, "pac.csv",
                  {"k", "t", "u_t", "epsilon", "mean_gap", "beta_hat", "bound", "alternative", "empirical"}, rows);
        out << "tail bound: " << live << " non-vacuous thresholds, " << bad << " exceeded\n";
        if (cfg.engine.V > 0.0) {
            const auto br = bound_rows(context, cfg, baseline, ensemble, cfg.engine.V, checkpoints);
            write_bound_rows(dir, "bounds.csv", br, K);
        }
    } else {
        out << "tail bound and mixing checks skipped: need at least " << kMinMixingRuns << " runs\n";
    }
    out << "reports in " << dir.string() << "\n";
    return 0;
}

int cmd_reproduce(const Common& c, std::ostream& out, std::ostream& err) {
    auto cfg = resolve(c);
    if (c.out.empty()) cfg.output_dir = "paper-out";
    SigintScope guard;
    const auto rep = reproduce_paper(cfg, cfg.output_dir, ensemble_options(c, err));
    char line[200];
    std::snprintf(line, sizeof line, "LP optimum (utility): %.6f\n", rep.baseline.utility());
    out << line;
    for (const auto& cs : rep.curves) {
        std::snprintf(line, sizeof line, "V=%g: utility at T %.6f (gap %.6f), power", cs.V, cs.utility,
                      rep.baseline.utility() - cs.utility);
        out << line;
        for (double p : cs.power) {
            std::snprintf(line, sizeof line, " %.6f", p);
            out << line;
        }
        std::snprintf(line, sizeof line, ", %.1f s\n", cs.wall_seconds);
        out << line;
    }
    out << "figure data in " << cfg.output_dir << "\n";
    return 0;
}

}  // namespace

int cli_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"ADPP simulator: LP baseline, Monte Carlo ensembles and finite-time bound checks", "adpp"};
    app.require_subcommand(1);
    Common c;
    std::string traces;

    auto* base = app.add_subcommand("solve-baseline", "solve the LP optimum and the perturbation gap");
    add_source(base, c);
    base->add_option("--out", c.out, "write baseline.json here");
    base->add_option("--bound-variant", c.bound_variant)->check(CLI::IsMember({"printed", "hoeffding"}));

    auto* sim = app.add_subcommand("simulate", "run an ensemble and write traces plus manifest");
    add_source(sim, c);
    add_overrides(sim, c);
    sim->add_option("--V", c.V, "drift-penalty weight");

    auto* ana = app.add_subcommand("analyze", "mixing estimates and bounds from stored traces");
    ana->add_option("--traces", traces, "directory holding manifest.json")->required()->check(CLI::ExistingDirectory);
    ana->add_option("--out", c.out, "output directory (default: the traces directory)");
    add_analysis(ana, c);

    auto* ver = app.add_subcommand("verify-bounds", "compare empirical behavior with the theoretical bounds");
    add_source(ver, c);
    add_overrides(ver, c);
    add_analysis(ver, c);
    ver->add_option("--V", c.V, "drift-penalty weight");
    ver->add_option("--traces", traces, "reuse stored traces instead of simulating")->check(CLI::ExistingDirectory);

    auto* rep = app.add_subcommand("reproduce-paper", "utility and power curves for each V plus bound reports");
    add_source(rep, c);
    add_overrides(rep, c);
    add_analysis(rep, c);
    rep->add_option("--v-list", c.v_list, "V values, comma separated")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    g_interrupted = false;
    try {
        if (base->parsed()) return cmd_solve_baseline(c, out);
        if (sim->parsed()) return cmd_simulate(c, out, err);
        if (ana->parsed()) return cmd_analyze(c, traces, out);
        if (ver->parsed()) return cmd_verify_bounds(c, traces, out, err);
        if (rep->parsed()) return cmd_reproduce(c, out, err);
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "runtime error: " << e.what() << "\n";
        return 2;
    }
    err << app.help();
    return 1;
}

}  // namespace adpp

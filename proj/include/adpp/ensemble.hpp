#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "adpp/analysis.hpp"
#include "adpp/config.hpp"
#include "adpp/engine.hpp"

namespace adpp {

/// splitmix64 of master + run index; every run gets an independent stream.
std::uint64_t derive_seed(std::uint64_t master, std::size_t run);

/// Worker count: ADPP_THREADS if set and positive, else hardware concurrency.
std::size_t thread_budget();

struct EnsembleOptions {
    std::size_t threads = 0;  // 0 = thread_budget()
    const std::atomic<bool>* cancel = nullptr;
    std::function<void(std::size_t done, std::size_t total)> progress;
};

struct EnsembleResult {
    TraceEnsemble ensemble;           // completed runs, ascending run id
    std::vector<std::size_t> run_ids;
    std::size_t requested = 0;
    double wall_seconds = 0.0;
    std::exception_ptr error;          // first failure, if any

    bool complete() const { return !error && run_ids.size() == requested; }
};

/// R episodes with seeds derive_seed(config.seed, r). Stops early on cancel
/// or on the first failing run; whatever finished is kept.
EnsembleResult run_ensemble(const EngineContext& context, const EngineConfig& config, std::size_t runs,
                            const EnsembleOptions& options = {});

struct OutputFile {
    std::string path;  // relative to the output directory
    std::size_t rows = 0;
};

/// %.12g, the fixed float format of every emitted CSV.
std::string format_double(double x);

/// Trace CSV: run,t,omega,j_star,m_star,p_0..p_K,Q_1..Q_K where Q is the
/// backlog the decision at t saw. One file, or one per run under traces/.
std::vector<OutputFile> write_traces(const std::filesystem::path& dir, const EnsembleResult& result, bool shard);

/// Writes a header plus rows to `dir / name` and returns its manifest entry.
OutputFile write_csv(const std::filesystem::path& dir, const std::string& name,
                     const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows);

/// manifest.json: emitted files with row counts, config hash, the effective
/// config, completed runs and a completeness flag.
void write_manifest(const std::filesystem::path& dir, const RunConfig& config, const EnsembleResult& result,
                    const std::vector<OutputFile>& files, const nlohmann::json& extra = nlohmann::json::object());

struct StoredTraces {
    RunConfig config;
    nlohmann::json manifest;
    TraceEnsemble ensemble;
    std::vector<std::size_t> run_ids;
};

/// Reads traces listed in `dir/manifest.json`. Q(T) is rebuilt from the last
/// row and the delayed penalty.
StoredTraces read_traces(const std::filesystem::path& dir);

}  // namespace adpp

#include "adpp/ensemble.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

namespace adpp {

namespace fs = std::filesystem;
using nlohmann::json;

std::uint64_t derive_seed(std::uint64_t master, std::size_t run) {
    std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(run) + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::size_t thread_budget() {
    if (const char* env = std::getenv("ADPP_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v > 0) return static_cast<std::size_t>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

EnsembleResult run_ensemble(const EngineContext& context, const EngineConfig& config, std::size_t runs,
                            const EnsembleOptions& options) {
    validate(config);
    if (runs == 0) throw ValidationError("ensemble size must be >= 1");
    const auto start = std::chrono::steady_clock::now();

    std::vector<std::optional<Episode>> slots(runs);
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> done{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex mu;

    auto stop = [&] { return failed.load() || (options.cancel && options.cancel->load()); };
    auto worker = [&] {
        while (!stop()) {
            const std::size_t r = next.fetch_add(1);
            if (r >= runs) return;
            try {
                EngineConfig cfg = config;
                cfg.seed = derive_seed(config.seed, r);
                slots[r] = run_episode(context, cfg);
            } catch (...) {
                std::lock_guard<std::mutex> lock(mu);
                if (!error) error = std::current_exception();
                failed = true;
                return;
            }
            const std::size_t n = done.fetch_add(1) + 1;
            if (options.progress) {
                std::lock_guard<std::mutex> lock(mu);
                options.progress(n, runs);
            }
        }
    };

    std::size_t threads = options.threads == 0 ? thread_budget() : options.threads;
    threads = std::min(threads, runs);
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    EnsembleResult result;
    result.requested = runs;
    result.error = error;
    result.ensemble.constraints = context.spec.constraints;
    for (std::size_t r = 0; r < runs; ++r) {
        if (!slots[r]) continue;
        result.ensemble.runs.push_back(std::move(*slots[r]));
        result.run_ids.push_back(r);
    }
    result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

namespace {

std::string header_line(const std::vector<std::string>& header) {
    std::string line;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) line += ',';
        line += header[i];
    }
    return line + "\r\n";
}

std::vector<std::string> trace_header(std::size_t K) {
    std::vector<std::string> h{"run", "t", "omega", "j_star", "m_star"};
    for (std::size_t k = 0; k <= K; ++k) h.push_back("p_" + std::to_string(k));
    for (std::size_t k = 1; k <= K; ++k) h.push_back("Q_" + std::to_string(k));
    return h;
}

std::size_t append_run(std::ofstream& out, std::size_t id, const Episode& ep) {
    std::string line;
    for (std::size_t t = 0; t < ep.horizon; ++t) {
        line.clear();
        line += std::to_string(id) + ',' + std::to_string(t) + ',' + std::to_string(ep.states[t]) + ',' +
                std::to_string(ep.detected[t]) + ',' + std::to_string(ep.chosen[t]);
        for (std::size_t k = 0; k <= ep.penalty_count; ++k) line += ',' + format_double(ep.cost(t, k));
        for (std::size_t k = 0; k < ep.penalty_count; ++k) line += ',' + format_double(ep.queue(t, k));
        line += "\r\n";
        out << line;
    }
    return ep.horizon;
}

std::ofstream open_out(const fs::path& path) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

}  // namespace

std::vector<OutputFile> write_traces(const fs::path& dir, const EnsembleResult& result, bool shard) {
    std::vector<OutputFile> files;
    const auto header = header_line(trace_header(result.ensemble.penalty_count()));
    if (!shard) {
        OutputFile f{"traces.csv", 0};
        auto out = open_out(dir / f.path);
        out << header;
        for (std::size_t i = 0; i < result.run_ids.size(); ++i)
            f.rows += append_run(out, result.run_ids[i], result.ensemble.runs[i]);
        files.push_back(f);
        return files;
    }
    for (std::size_t i = 0; i < result.run_ids.size(); ++i) {
        char name[48];
        std::snprintf(name, sizeof name, "traces/run_%05zu.csv", result.run_ids[i]);
        OutputFile f{name, 0};
        auto out = open_out(dir / f.path);
        out << header;
        f.rows = append_run(out, result.run_ids[i], result.ensemble.runs[i]);
        files.push_back(f);
    }
    return files;
}

OutputFile write_csv(const fs::path& dir, const std::string& name, const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows) {
    auto out = open_out(dir / name);
    out << header_line(header);
    std::string line;
    for (const auto& row : rows) {
        line.clear();
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) line += ',';
            line += format_double(row[i]);
        }
        line += "\r\n";
        out << line;
    }
    return {name, rows.size()};
}

void write_manifest(const fs::path& dir, const RunConfig& config, const EnsembleResult& result,
                    const std::vector<OutputFile>& files, const json& extra) {
    json listed = json::array();
    for (const auto& f : files) listed.push_back({{"path", f.path}, {"rows", f.rows}});
    json doc{{"schema_version", kConfigSchemaVersion},
             {"config_hash", config_hash(config)},
             {"config", to_json(config)},
             {"runs_requested", result.requested},
             {"completed_runs", result.run_ids},
             {"complete", result.complete()},
             {"wall_seconds", result.wall_seconds},
             {"files", listed}};
    for (const auto& [key, value] : extra.items()) doc[key] = value;
    auto out = open_out(dir / "manifest.json");
    out << doc.dump(2) << '\n';
}

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    return cells;
}

}  // namespace

StoredTraces read_traces(const fs::path& dir) {
    std::ifstream min(dir / "manifest.json");
    if (!min) throw ValidationError("no manifest.json in " + dir.string());
    StoredTraces st;
    try {
        st.manifest = json::parse(min);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("manifest parse error: ") + e.what());
    }
    st.config = parse_config(st.manifest.at("config"), dir);
    const std::size_t K = st.config.problem.penalty_count;
    const std::size_t kc = K + 1;
    const std::size_t D = st.config.engine.delay;
    const auto expected_header = header_line(trace_header(K));

    std::vector<std::size_t> ids;
    std::vector<Episode> runs;
    for (const auto& f : st.manifest.at("files")) {
        const std::string path = f.at("path").get<std::string>();
        if (path.rfind("traces", 0) != 0) continue;
        std::ifstream in(dir / path, std::ios::binary);
        if (!in) throw ValidationError("listed trace file missing: " + path);
        std::string line;
        std::getline(in, line);
        if (line + "\n" != expected_header) throw ValidationError("unexpected trace header in " + path);
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            const auto cells = split(line);
            if (cells.size() != 5 + kc + K) throw ValidationError("malformed trace row in " + path);
            const std::size_t id = std::stoull(cells[0]);
            const std::size_t t = std::stoull(cells[1]);
            if (ids.empty() || ids.back() != id) {
                ids.push_back(id);
                runs.emplace_back();
                runs.back().penalty_count = K;
            }
            Episode& ep = runs.back();
            if (t != ep.horizon) throw ValidationError("trace rows out of order in " + path);
            ep.states.push_back(std::stoull(cells[2]));
            ep.detected.push_back(std::stoull(cells[3]));
            ep.chosen.push_back(std::stoull(cells[4]));
            for (std::size_t k = 0; k < kc; ++k) ep.costs.push_back(std::stod(cells[5 + k]));
            for (std::size_t k = 0; k < K; ++k) ep.queues.push_back(std::stod(cells[5 + kc + k]));
            ++ep.horizon;
        }
    }
    for (auto& ep : runs) {
        if (ep.horizon == 0) continue;
        std::vector<double> q(ep.queues.end() - static_cast<std::ptrdiff_t>(K), ep.queues.end());
        std::vector<double> delayed(K, 0.0);
        const std::size_t last = ep.horizon - 1;
        if (last >= D)
            std::copy_n(ep.costs.begin() + static_cast<std::ptrdiff_t>((last - D) * kc + 1), K, delayed.begin());
        queue_update(q, delayed, st.config.problem.constraints);
        ep.final_queues = q;
    }
    st.ensemble.runs = std::move(runs);
    st.ensemble.constraints = st.config.problem.constraints;
    st.run_ids = std::move(ids);
    require_rectangular(st.ensemble);
    return st;
}

}  // namespace adpp

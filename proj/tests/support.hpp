#pragma once

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "adpp/analysis.hpp"
#include "adpp/problem.hpp"

namespace testing {

using namespace adpp;

inline Distribution random_distribution(std::size_t n, std::mt19937_64& rng, bool strictly_positive = false) {
    std::uniform_real_distribution<double> u(strictly_positive ? 0.05 : 0.0, 1.0);
    std::vector<double> w(n);
    for (auto& x : w) x = u(rng);
    if (!strictly_positive && n > 1 && rng() % 4 == 0) w[rng() % n] = 0.0;
    return Distribution::from_weights(w);
}

/// Random instance with costs in [p_min, p_max] = [-1, 1] for k = 0 and
/// [0, 1] for penalties. Constraint levels are drawn inside the range.
inline ProblemSpec random_problem(std::vector<std::size_t> states, std::vector<std::size_t> actions, std::size_t K,
                                  std::mt19937_64& rng) {
    ProblemSpec spec;
    spec.state_cards = std::move(states);
    spec.action_cards = std::move(actions);
    spec.penalty_count = K;
    spec.p_min.assign(K + 1, 0.0);
    spec.p_max.assign(K + 1, 1.0);
    spec.p_min[0] = -1.0;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const std::size_t cells = spec.joint_state_count() * spec.joint_action_count();
    spec.cost_tables.assign(K + 1, std::vector<double>(cells));
    for (std::size_t k = 0; k <= K; ++k)
        for (auto& x : spec.cost_tables[k]) x = k == 0 ? 2.0 * u(rng) - 1.0 : u(rng);
    for (std::size_t k = 0; k < K; ++k) spec.constraints.push_back(0.2 + 0.6 * u(rng));
    return spec;
}

/// Ensemble built from a value generator f(run, t, k); queues left at zero.
inline TraceEnsemble synthetic_ensemble(std::size_t runs, std::size_t horizon, std::size_t K,
                                        const std::function<double(std::size_t, std::size_t, std::size_t)>& f) {
    TraceEnsemble ens;
    ens.constraints.assign(K, 0.5);
    for (std::size_t r = 0; r < runs; ++r) {
        Episode ep;
        ep.horizon = horizon;
        ep.penalty_count = K;
        ep.states.assign(horizon, 0);
        ep.detected.assign(horizon, 0);
        ep.chosen.assign(horizon, 0);
        ep.queues.assign(horizon * K, 0.0);
        ep.final_queues.assign(K, 0.0);
        for (std::size_t t = 0; t < horizon; ++t)
            for (std::size_t k = 0; k <= K; ++k) ep.costs.push_back(f(r, t, k));
        ens.runs.push_back(std::move(ep));
    }
    return ens;
}

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Fresh directory under the system temp path, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("adpp-test-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() { std::filesystem::remove_all(path_); }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

}  // namespace testing

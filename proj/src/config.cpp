#include "adpp/config.hpp"

#include <cstdio>
#include <fstream>

#include "adpp/scenario.hpp"

namespace adpp {

using nlohmann::json;

namespace {

// Collects every schema violation instead of stopping at the first.
class Reader {
public:
    explicit Reader(std::vector<std::string>& errors) : errors_(errors) {}

    template <class T>
    std::optional<T> get(const json& obj, const char* key, const std::string& path) {
        if (!obj.is_object() || !obj.contains(key)) return std::nullopt;
        try {
            return obj.at(key).get<T>();
        } catch (const json::exception&) {
            errors_.push_back(path + key + " has the wrong type");
            return std::nullopt;
        }
    }

private:
    std::vector<std::string>& errors_;
};

std::vector<Distribution> read_distributions(const json& arr, const std::string& what,
                                             std::vector<std::string>& errors) {
    std::vector<Distribution> out;
    if (!arr.is_array()) {
        errors.push_back(what + " must be an array of probability vectors");
        return out;
    }
    for (std::size_t j = 0; j < arr.size(); ++j) {
        try {
            out.emplace_back(arr[j].get<std::vector<double>>());
        } catch (const std::exception& e) {
            errors.push_back(what + "[" + std::to_string(j) + "]: " + e.what());
        }
    }
    return out;
}

std::string join_errors(const std::string& head, const std::vector<std::string>& errors) {
    std::string msg = head;
    for (const auto& e : errors) msg += "\n  " + e;
    return msg;
}

void apply_schedule(RunConfig& cfg, std::vector<std::string>& errors) {
    const json& src = cfg.schedule_source;
    const std::size_t horizon = cfg.engine.horizon;
    Distribution limit;
    if (src.contains("limit")) {
        try {
            limit = Distribution(src.at("limit").get<std::vector<double>>());
        } catch (const std::exception& e) {
            errors.push_back(std::string("schedule.limit: ") + e.what());
            return;
        }
    } else {
        const std::size_t idx = src.value("limit_member", std::size_t{0});
        if (idx >= cfg.cover.size()) {
            errors.emplace_back("schedule.limit_member outside the cover");
            return;
        }
        limit = cfg.cover.members[idx];
    }
    const std::string rule = src.value("rule", std::string("stationary"));
    try {
        if (rule == "stationary") {
            cfg.schedule = DistributionSchedule::stationary(limit, horizon);
        } else if (rule == "geometric_blend") {
            const double rho = src.value("rho", 0.995);
            const std::size_t mix_until = src.value("mix_until", horizon);
            cfg.schedule = DistributionSchedule::geometric_blend(limit, cfg.cover.members, rho, mix_until, horizon);
        } else {
            errors.push_back("schedule.rule must be \"stationary\" or \"geometric_blend\"");
        }
    } catch (const std::exception& e) {
        errors.push_back(std::string("schedule: ") + e.what());
    }
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace

nlohmann::json problem_to_json(const ProblemSpec& spec) {
    return json{{"state_cards", spec.state_cards},   {"action_cards", spec.action_cards},
                {"penalty_count", spec.penalty_count}, {"cost_tables", spec.cost_tables},
                {"constraints", spec.constraints},   {"p_max", spec.p_max},
                {"p_min", spec.p_min}};
}

ProblemSpec problem_from_json(const nlohmann::json& doc, std::vector<std::string>& errors) {
    ProblemSpec spec;
    if (!doc.is_object()) {
        errors.emplace_back("problem must be an object");
        return spec;
    }
    Reader rd(errors);
    const std::string p = "problem.";
    auto need = [&](const char* key) {
        if (!doc.contains(key)) errors.push_back(p + key + " is required");
    };
    for (const char* key : {"state_cards", "action_cards", "penalty_count", "cost_tables", "constraints", "p_max", "p_min"})
        need(key);
    spec.state_cards = rd.get<std::vector<std::size_t>>(doc, "state_cards", p).value_or(std::vector<std::size_t>{});
    spec.action_cards = rd.get<std::vector<std::size_t>>(doc, "action_cards", p).value_or(std::vector<std::size_t>{});
    spec.penalty_count = rd.get<std::size_t>(doc, "penalty_count", p).value_or(0);
    spec.cost_tables = rd.get<std::vector<std::vector<double>>>(doc, "cost_tables", p).value_or(std::vector<std::vector<double>>{});
    spec.constraints = rd.get<std::vector<double>>(doc, "constraints", p).value_or(std::vector<double>{});
    spec.p_max = rd.get<std::vector<double>>(doc, "p_max", p).value_or(std::vector<double>{});
    spec.p_min = rd.get<std::vector<double>>(doc, "p_min", p).value_or(std::vector<double>{});
    return spec;
}

RunConfig preset_config(const std::string& name) {
    if (name != kSensorScenarioName) throw ValidationError("unknown scenario \"" + name + "\"");
    auto sc = sensor_scenario();
    RunConfig cfg;
    cfg.scenario = sc.name;
    cfg.problem = std::move(sc.problem);
    cfg.cover = std::move(sc.cover);
    cfg.engine = sc.engine;
    cfg.runs = sc.runs;
    cfg.v_list = sc.v_list;
    cfg.schedule_source = json{{"rule", "geometric_blend"}, {"rho", 0.995}, {"limit_member", 0}};
    cfg.schedule = std::move(sc.schedule);
    return cfg;
}

void rebuild_schedule(RunConfig& cfg) {
    std::vector<std::string> errors;
    apply_schedule(cfg, errors);
    if (!errors.empty()) throw ValidationError(join_errors("invalid schedule:", errors));
}

RunConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir) {
    std::vector<std::string> errors;
    if (!doc.is_object()) throw ValidationError("config must be a JSON object");
    Reader rd(errors);

    if (auto v = rd.get<int>(doc, "schema_version", ""); v && *v != kConfigSchemaVersion)
        errors.push_back("schema_version " + std::to_string(*v) + " is not supported (expected " +
                         std::to_string(kConfigSchemaVersion) + ")");

    RunConfig cfg;
    const auto scenario = rd.get<std::string>(doc, "scenario", "");
    if (scenario) {
        try {
            cfg = preset_config(*scenario);
        } catch (const ValidationError& e) {
            errors.emplace_back(e.what());
        }
    }

    bool have_problem = scenario.has_value();
    if (doc.contains("problem") && doc.contains("problem_file"))
        errors.emplace_back("give either problem or problem_file, not both");
    if (doc.contains("problem")) {
        cfg.problem = problem_from_json(doc.at("problem"), errors);
        have_problem = true;
    } else if (auto file = rd.get<std::string>(doc, "problem_file", "")) {
        const auto path = base_dir / *file;
        std::ifstream in(path);
        if (!in) {
            errors.push_back("problem_file " + path.string() + " does not exist");
        } else {
            try {
                cfg.problem = problem_from_json(json::parse(in), errors);
                have_problem = true;
            } catch (const json::parse_error& e) {
                errors.push_back("problem_file parse error: " + std::string(e.what()));
            }
        }
    }
    if (!have_problem) errors.emplace_back("one of scenario, problem or problem_file is required");

    if (doc.contains("cover")) {
        const auto& c = doc.at("cover");
        if (!c.contains("members")) {
            errors.emplace_back("cover.members is required");
        } else {
            cfg.cover.members = read_distributions(c.at("members"), "cover.members", errors);
        }
        cfg.cover.radius = rd.get<double>(c, "radius", "cover.").value_or(0.05);
        auto [lo, hi] = enclosing_bounds(cfg.cover.members);
        cfg.cover.floor = rd.get<double>(c, "floor", "cover.").value_or(lo);
        cfg.cover.ceiling = rd.get<double>(c, "ceiling", "cover.").value_or(hi);
    } else if (!scenario) {
        errors.emplace_back("cover is required without a scenario preset");
    }

    if (doc.contains("engine")) {
        const auto& e = doc.at("engine");
        const std::string p = "engine.";
        if (auto v = rd.get<double>(e, "V", p)) {
            if (*v < 0.0) errors.emplace_back("V must be >= 0");
            cfg.engine.V = *v;
        }
        if (auto v = rd.get<long long>(e, "D", p)) {
            if (*v < 0) errors.emplace_back("D must be >= 0");
            else cfg.engine.delay = static_cast<std::size_t>(*v);
        }
        if (auto v = rd.get<long long>(e, "w", p)) {
            if (*v < 1) errors.emplace_back("w must be >= 1");
            else cfg.engine.window = static_cast<std::size_t>(*v);
        }
        if (auto v = rd.get<long long>(e, "T", p)) {
            if (*v < 1) errors.emplace_back("T must be >= 1");
            else cfg.engine.horizon = static_cast<std::size_t>(*v);
        }
        if (auto v = rd.get<std::uint64_t>(e, "seed", p)) cfg.engine.seed = *v;
        if (auto v = rd.get<bool>(e, "replicate_queues", p)) cfg.engine.replicate_queues = *v;
    } else if (!scenario) {
        errors.emplace_back("engine is required without a scenario preset");
    }

    if (auto v = rd.get<long long>(doc, "runs", "")) {
        if (*v < 1) errors.emplace_back("runs must be >= 1");
        else cfg.runs = static_cast<std::size_t>(*v);
    }
    if (auto v = rd.get<std::string>(doc, "output_dir", "")) cfg.output_dir = *v;
    if (auto v = rd.get<bool>(doc, "shard_traces", "")) cfg.shard_traces = *v;
    if (auto v = rd.get<std::vector<double>>(doc, "v_list", "")) {
        for (double x : *v)
            if (x < 0.0) errors.emplace_back("v_list entries must be >= 0");
        cfg.v_list = *v;
    }

    if (doc.contains("analysis")) {
        const auto& a = doc.at("analysis");
        const std::string p = "analysis.";
        auto& an = cfg.analysis;
        if (auto v = rd.get<double>(a, "nu", p)) {
            if (*v < 0.0) errors.emplace_back("analysis.nu must be >= 0");
            an.nu = *v;
        }
        if (auto v = rd.get<double>(a, "epsilon", p)) {
            if (*v <= 0.0) errors.emplace_back("analysis.epsilon must be > 0");
            an.epsilon = *v;
        }
        if (auto v = rd.get<double>(a, "gamma0", p)) an.gamma0 = *v;
        if (auto v = rd.get<double>(a, "gamma1", p)) an.gamma1 = *v;
        if (auto v = rd.get<std::string>(a, "bound_variant", p)) {
            if (*v == "printed") an.bound_variant = DetectionBoundVariant::Printed;
            else if (*v == "hoeffding") an.bound_variant = DetectionBoundVariant::Hoeffding;
            else errors.emplace_back("analysis.bound_variant must be \"printed\" or \"hoeffding\"");
        }
        if (auto v = rd.get<std::string>(a, "pac_exponent", p)) {
            if (*v == "printed") an.pac_exponent = PacExponent::Printed;
            else if (*v == "mcdiarmid") an.pac_exponent = PacExponent::McDiarmid;
            else errors.emplace_back("analysis.pac_exponent must be \"printed\" or \"mcdiarmid\"");
        }
        if (auto v = rd.get<std::vector<std::size_t>>(a, "lags", p)) an.lags = *v;
        if (auto v = rd.get<std::size_t>(a, "anchors", p)) an.anchors = *v;
        if (auto v = rd.get<std::size_t>(a, "lipschitz_grid", p)) {
            if (*v < 2) errors.emplace_back("analysis.lipschitz_grid must be >= 2");
            an.lipschitz_grid = *v;
        }
        if (auto v = rd.get<double>(a, "lipschitz_range", p)) {
            if (*v <= 0.0) errors.emplace_back("analysis.lipschitz_range must be > 0");
            an.lipschitz_range = *v;
        }
    }

    if (doc.contains("schedule")) {
        if (!doc.at("schedule").is_object()) errors.emplace_back("schedule must be an object");
        else cfg.schedule_source = doc.at("schedule");
    } else if (!scenario) {
        cfg.schedule_source = json{{"rule", "stationary"}, {"limit_member", 0}};
    }

    if (errors.empty()) {
        auto report = validate_problem(cfg.problem);
        errors.insert(errors.end(), report.begin(), report.end());
    }
    if (errors.empty()) apply_schedule(cfg, errors);
    if (errors.empty()) {
        auto report = validate_cover(cfg.cover, cfg.schedule.limit());
        errors.insert(errors.end(), report.begin(), report.end());
        try {
            validate(cfg.engine);
        } catch (const ValidationError& e) {
            errors.emplace_back(e.what());
        }
    }
    if (!errors.empty()) throw ValidationError(join_errors("invalid config:", errors));
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("config file " + path.string() + " does not exist or is unreadable");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError("config parse error in " + path.string() + ": " + e.what());
    }
    return parse_config(doc, path.parent_path());
}

nlohmann::json to_json(const RunConfig& cfg) {
    json cover_members = json::array();
    for (const auto& m : cfg.cover.members) cover_members.push_back(std::vector<double>(m.pmf().begin(), m.pmf().end()));
    json analysis{{"nu", cfg.analysis.nu},
                  {"epsilon", cfg.analysis.epsilon},
                  {"bound_variant", cfg.analysis.bound_variant == DetectionBoundVariant::Printed ? "printed" : "hoeffding"},
                  {"pac_exponent", cfg.analysis.pac_exponent == PacExponent::Printed ? "printed" : "mcdiarmid"},
                  {"lags", cfg.analysis.lags},
                  {"anchors", cfg.analysis.anchors},
                  {"lipschitz_grid", cfg.analysis.lipschitz_grid}};
    if (cfg.analysis.gamma0) analysis["gamma0"] = *cfg.analysis.gamma0;
    if (cfg.analysis.gamma1) analysis["gamma1"] = *cfg.analysis.gamma1;
    if (cfg.analysis.lipschitz_range) analysis["lipschitz_range"] = *cfg.analysis.lipschitz_range;
    return json{{"schema_version", kConfigSchemaVersion},
                {"problem", problem_to_json(cfg.problem)},
                {"cover",
                 {{"members", cover_members},
                  {"radius", cfg.cover.radius},
                  {"floor", cfg.cover.floor},
                  {"ceiling", cfg.cover.ceiling}}},
                {"schedule", cfg.schedule_source},
                {"engine",
                 {{"V", cfg.engine.V},
                  {"D", cfg.engine.delay},
                  {"w", cfg.engine.window},
                  {"T", cfg.engine.horizon},
                  {"seed", cfg.engine.seed},
                  {"replicate_queues", cfg.engine.replicate_queues}}},
                {"runs", cfg.runs},
                {"output_dir", cfg.output_dir},
                {"shard_traces", cfg.shard_traces},
                {"v_list", cfg.v_list},
                {"analysis", analysis}};
}

std::string config_hash(const RunConfig& cfg) {
    char buf[17];
    auto doc = to_json(cfg);
    doc.erase("output_dir");
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(doc.dump())));
    return buf;
}

}  // namespace adpp

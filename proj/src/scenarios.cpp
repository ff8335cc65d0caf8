#include "agora/scenarios.hpp"

#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "agora/baselines.hpp"

namespace agora {

namespace {

using nlohmann::json;

constexpr int kScenarioSchemaVersion = 1;

[[noreturn]] void schema_error(const std::string& path,
                               const std::string& what) {
    throw std::invalid_argument("scenario schema: " + path + ": " + what);
}

const json& require(const json& doc, const char* key, const std::string& at) {
    if (!doc.contains(key)) schema_error(at + key, "missing required field");
    return doc.at(key);
}

template <typename T>
T get_or(const json& doc, const char* key, T fallback, const std::string& at) {
    if (!doc.contains(key)) return fallback;
    try {
        return doc.at(key).get<T>();
    } catch (const json::exception&) {
        schema_error(at + key, "wrong type");
    }
}

UncertaintyVector vector_field(const json& doc, const std::string& at) {
    UncertaintyVector u;
    u.perc = get_or(doc, "perc", 0.0, at + ".");
    u.sem = get_or(doc, "sem", 0.0, at + ".");
    u.inf = get_or(doc, "inf", 0.0, at + ".");
    return u;
}

json vector_json(const UncertaintyVector& u) {
    return {{"perc", u.perc}, {"sem", u.sem}, {"inf", u.inf}};
}

}  // namespace

std::string scenario_to_json(const ScenarioConfig& c) {
    json pool = json::array();
    for (const auto& a : c.pool) {
        pool.push_back({{"id", a.id},
                        {"unit_cost", a.unit_cost},
                        {"expertise", vector_json(a.expertise)},
                        {"capacity", vector_json(a.capacity)},
                        {"fixed_cost", a.fixed_cost},
                        {"tflops_per_token", a.tflops_per_token},
                        {"transfer_efficiency", a.transfer_efficiency}});
    }
    json strategy = {{"kind", strategy_kind_name(c.strategy.kind)},
                     {"seed", c.strategy.seed},
                     {"alpha", c.strategy.alpha},
                     {"beta_sim", c.strategy.beta_sim},
                     {"escalation_threshold", c.strategy.escalation_threshold}};
    if (!c.strategy.agent_id.empty())
        strategy["agent_id"] = c.strategy.agent_id;
    if (!c.strategy.top2_ids.empty()) strategy["top2_ids"] = c.strategy.top2_ids;
    if (!c.strategy.cascade_order.empty())
        strategy["cascade_order"] = c.strategy.cascade_order;
    if (!c.strategy.calibrated_counts.empty())
        strategy["calibrated_counts"] = c.strategy.calibrated_counts;

    json doc = {
        {"schema_version", kScenarioSchemaVersion},
        {"name", c.name},
        {"pool", pool},
        {"n_tasks", c.n_tasks},
        {"task_mix",
         {{"perc", {c.task_mix.perc_lo, c.task_mix.perc_hi}},
          {"sem", {c.task_mix.sem_lo, c.task_mix.sem_hi}},
          {"inf", {c.task_mix.inf_lo, c.task_mix.inf_hi}},
          {"knowledge_gap_cue", c.task_mix.knowledge_gap_cue},
          {"randomness_signal", c.task_mix.randomness_signal}}},
        {"tokens_per_task", c.tokens_per_task},
        {"weights",
         {{"perc", c.weights.perc},
          {"sem", c.weights.sem},
          {"inf", c.weights.inf}}},
        {"market",
         {{"trade_trigger", c.market.trade_trigger},
          {"benefit_threshold", c.market.benefit_threshold},
          {"min_improvement", c.market.min_improvement},
          {"use_effective_capacity", c.market.use_effective_capacity}}},
        {"max_trades", c.max_trades},
        {"broker",
         {{"lambda_dist", c.broker.lambda_dist},
          {"gamma_decay", c.broker.gamma_decay},
          {"eta_synergy", c.broker.eta_synergy},
          {"omega_strategic", c.broker.omega_strategic},
          {"distance_metric",
           c.broker.distance_metric == DistanceMetric::normalized_euclidean
               ? "normalized_euclidean"
               : "cosine_dissimilarity"},
          {"sample_posterior", c.broker.sample_posterior}}},
        {"strategy", strategy},
        {"seed", c.seed},
        {"epsilon_resolve", c.epsilon_resolve},
        {"cost_per_tflop", c.cost_per_tflop},
        {"tau_sim", c.tau_sim},
    };
    return doc.dump(2);
}

ScenarioConfig scenario_from_json(const std::string& json_text) {
    json doc = json::parse(json_text, nullptr, false);
    if (doc.is_discarded())
        throw std::invalid_argument("scenario schema: malformed JSON");
    const std::string root;
    if (get_or(doc, "schema_version", 0, root) != kScenarioSchemaVersion)
        schema_error("schema_version", "unsupported version");

    ScenarioConfig c;
    c.name = require(doc, "name", root).get<std::string>();
    c.n_tasks = require(doc, "n_tasks", root).get<std::size_t>();
    c.seed = require(doc, "seed", root).get<std::uint64_t>();

    const json& pool = require(doc, "pool", root);
    for (std::size_t i = 0; i < pool.size(); ++i) {
        const json& a = pool[i];
        const std::string at = "pool[" + std::to_string(i) + "].";
        AgentProfile profile;
        profile.id = require(a, "id", at).get<std::string>();
        profile.unit_cost = get_or(a, "unit_cost", 1.0, at);
        if (a.contains("expertise"))
            profile.expertise = vector_field(a.at("expertise"), at + "expertise");
        if (a.contains("capacity"))
            profile.capacity = vector_field(a.at("capacity"), at + "capacity");
        profile.fixed_cost = get_or(a, "fixed_cost", 0.0, at);
        profile.tflops_per_token = get_or(a, "tflops_per_token", 1.0, at);
        profile.transfer_efficiency = get_or(a, "transfer_efficiency", 1.0, at);
        c.pool.push_back(std::move(profile));
    }

    if (doc.contains("task_mix")) {
        const json& m = doc.at("task_mix");
        auto range = [&](const char* key, double& lo, double& hi) {
            if (!m.contains(key)) return;
            const json& r = m.at(key);
            if (!r.is_array() || r.size() != 2)
                schema_error(std::string("task_mix.") + key,
                             "expected [lo, hi]");
            lo = r[0].get<double>();
            hi = r[1].get<double>();
        };
        range("perc", c.task_mix.perc_lo, c.task_mix.perc_hi);
        range("sem", c.task_mix.sem_lo, c.task_mix.sem_hi);
        range("inf", c.task_mix.inf_lo, c.task_mix.inf_hi);
        c.task_mix.knowledge_gap_cue =
            get_or(m, "knowledge_gap_cue", 0.0, "task_mix.");
        c.task_mix.randomness_signal =
            get_or(m, "randomness_signal", 0.0, "task_mix.");
    }

    c.tokens_per_task = get_or(doc, "tokens_per_task", 20, root);
    if (doc.contains("weights")) {
        const json& w = doc.at("weights");
        c.weights.perc = get_or(w, "perc", 0.4, "weights.");
        c.weights.sem = get_or(w, "sem", 0.3, "weights.");
        c.weights.inf = get_or(w, "inf", 0.3, "weights.");
    }
    if (doc.contains("market")) {
        const json& m = doc.at("market");
        c.market.trade_trigger = get_or(m, "trade_trigger", 0.15, "market.");
        c.market.benefit_threshold =
            get_or(m, "benefit_threshold", 0.08, "market.");
        c.market.min_improvement =
            get_or(m, "min_improvement", 1e-9, "market.");
        c.market.use_effective_capacity =
            get_or(m, "use_effective_capacity", true, "market.");
    }
    c.max_trades = get_or<std::size_t>(doc, "max_trades", 256, root);
    if (doc.contains("broker")) {
        const json& b = doc.at("broker");
        c.broker.lambda_dist = get_or(b, "lambda_dist", 0.2, "broker.");
        c.broker.gamma_decay = get_or(b, "gamma_decay", 0.99, "broker.");
        c.broker.eta_synergy = get_or(b, "eta_synergy", 0.8, "broker.");
        c.broker.omega_strategic =
            get_or(b, "omega_strategic", 1.2, "broker.");
        const std::string metric = get_or<std::string>(
            b, "distance_metric", "normalized_euclidean", "broker.");
        if (metric == "normalized_euclidean")
            c.broker.distance_metric = DistanceMetric::normalized_euclidean;
        else if (metric == "cosine_dissimilarity")
            c.broker.distance_metric = DistanceMetric::cosine_dissimilarity;
        else
            schema_error("broker.distance_metric", "unknown metric");
        c.broker.sample_posterior =
            get_or(b, "sample_posterior", true, "broker.");
    }

    const json& s = require(doc, "strategy", root);
    try {
        c.strategy.kind = strategy_kind_from_name(
            require(s, "kind", "strategy.").get<std::string>());
    } catch (const std::invalid_argument& e) {
        schema_error("strategy.kind", e.what());
    }
    c.strategy.seed = get_or<std::uint64_t>(s, "seed", 0, "strategy.");
    c.strategy.agent_id =
        get_or<std::string>(s, "agent_id", "", "strategy.");
    c.strategy.alpha = get_or(s, "alpha", 0.5, "strategy.");
    c.strategy.beta_sim = get_or(s, "beta_sim", 0.5, "strategy.");
    c.strategy.top2_ids = get_or<std::vector<std::string>>(
        s, "top2_ids", {}, "strategy.");
    c.strategy.cascade_order = get_or<std::vector<std::string>>(
        s, "cascade_order", {}, "strategy.");
    c.strategy.escalation_threshold =
        get_or(s, "escalation_threshold", 0.5, "strategy.");
    c.strategy.calibrated_counts = get_or<std::vector<std::size_t>>(
        s, "calibrated_counts", {}, "strategy.");

    c.epsilon_resolve = get_or(doc, "epsilon_resolve", 0.25, root);
    c.cost_per_tflop = get_or(doc, "cost_per_tflop", 0.0, root);
    c.tau_sim = get_or(doc, "tau_sim", 0.75, root);
    return c;
}

namespace {

ScenarioConfig appendix_e_scenario() {
    ScenarioConfig c;
    c.name = "appendix-e";
    AgentProfile small;
    small.id = "small";
    small.unit_cost = 1.0;
    small.expertise = {0.5, 0.5, 0.5};
    small.tflops_per_token = 1.4;
    AgentProfile medium;
    medium.id = "medium";
    medium.unit_cost = 2.0;
    medium.expertise = {0.7, 0.7, 0.7};
    medium.tflops_per_token = 2.8;
    AgentProfile large;
    large.id = "large";
    large.unit_cost = 5.0;
    large.expertise = {0.9, 0.9, 0.9};
    large.tflops_per_token = 15.6;
    c.pool = {small, medium, large};
    c.n_tasks = 100;
    c.tokens_per_task = 20;
    c.seed = 7;
    c.strategy.kind = StrategyKind::uncertainty_aware;
    c.strategy.cascade_order = {"small", "medium", "large"};
    c.strategy.calibrated_counts = {88, 4, 8};
    return c;
}

ScenarioConfig theorem1_scenario() {
    const SuboptimalityInstance inst = agnostic_suboptimality_instance();
    ScenarioConfig c;
    c.name = "theorem1";
    c.pool = inst.pool;
    c.n_tasks = 100;
    c.seed = 11;
    c.strategy.kind = StrategyKind::heuristic_router;
    c.strategy.alpha = inst.alpha;
    c.strategy.beta_sim = inst.beta_sim;
    return c;
}

ScenarioConfig default_market_scenario() {
    ScenarioConfig c;
    c.name = "default-market";
    const struct {
        const char* id;
        double cost;
        UncertaintyVector expertise;
        double tflops;
    } specs[] = {
        {"generalist", 0.50, {0.5, 0.5, 0.5}, 2.0},
        {"perception", 0.70, {0.9, 0.3, 0.3}, 3.0},
        {"reasoner", 1.00, {0.3, 0.4, 0.9}, 6.0},
        {"semantic", 0.85, {0.3, 0.9, 0.4}, 4.0},
        {"cheap", 0.35, {0.2, 0.2, 0.2}, 1.0},
    };
    for (const auto& s : specs) {
        AgentProfile a;
        a.id = s.id;
        a.unit_cost = s.cost;
        a.expertise = s.expertise;
        a.capacity = {2.0, 2.0, 2.0};
        a.tflops_per_token = s.tflops;
        c.pool.push_back(std::move(a));
    }
    c.n_tasks = 100;
    c.seed = 42;
    c.strategy.kind = StrategyKind::agora;
    return c;
}

}  // namespace

std::vector<std::string> bundled_scenario_names() {
    return {"appendix-e", "theorem1", "default-market"};
}

ScenarioConfig bundled_scenario(const std::string& name) {
    if (name == "appendix-e") return appendix_e_scenario();
    if (name == "theorem1") return theorem1_scenario();
    if (name == "default-market") return default_market_scenario();
    throw std::invalid_argument("unknown bundled scenario: " + name);
}

void write_bundled_scenarios(const std::string& dir) {
    std::filesystem::create_directories(dir);
    for (const auto& name : bundled_scenario_names()) {
        std::ofstream out(std::filesystem::path(dir) / (name + ".json"));
        out << scenario_to_json(bundled_scenario(name)) << '\n';
    }
}

}  // namespace agora

#include "agora/baselines.hpp"

#include <stdexcept>

#include "agora/broker.hpp"

namespace agora {

const char* strategy_kind_name(StrategyKind k) {
    switch (k) {
        case StrategyKind::single_agent: return "single_agent";
        case StrategyKind::random_assignment: return "random";
        case StrategyKind::heuristic_router: return "heuristic_router";
        case StrategyKind::top2: return "top2";
        case StrategyKind::tiered_cascade: return "tiered_cascade";
        case StrategyKind::uncertainty_aware: return "uncertainty_aware";
        case StrategyKind::agora: return "agora";
    }
    return "agora";
}

StrategyKind strategy_kind_from_name(const std::string& name) {
    if (name == "single_agent") return StrategyKind::single_agent;
    if (name == "random") return StrategyKind::random_assignment;
    if (name == "heuristic_router") return StrategyKind::heuristic_router;
    if (name == "top2") return StrategyKind::top2;
    if (name == "tiered_cascade") return StrategyKind::tiered_cascade;
    if (name == "uncertainty_aware") return StrategyKind::uncertainty_aware;
    if (name == "agora") return StrategyKind::agora;
    throw std::invalid_argument("unknown strategy kind: " + name);
}

bool StrategyConfig::valid(const std::vector<AgentProfile>& pool,
                           std::vector<std::string>* diagnostics) const {
    bool ok = true;
    auto fail = [&](const std::string& msg) {
        ok = false;
        if (diagnostics) diagnostics->push_back(msg);
    };
    auto known = [&](const std::string& id) {
        return find_agent(pool, id) != nullptr;
    };
    switch (kind) {
        case StrategyKind::single_agent:
            if (!known(agent_id))
                fail("strategy.agent_id: unknown agent '" + agent_id + "'");
            break;
        case StrategyKind::top2:
            if (top2_ids.size() != 2)
                fail("strategy.top2_ids: exactly two agent ids required");
            for (const auto& id : top2_ids)
                if (!known(id))
                    fail("strategy.top2_ids: unknown agent '" + id + "'");
            break;
        case StrategyKind::tiered_cascade:
        case StrategyKind::uncertainty_aware:
            for (const auto& id : cascade_order)
                if (!known(id))
                    fail("strategy.cascade_order: unknown agent '" + id + "'");
            if (escalation_threshold < 0.0 || escalation_threshold > 1.0)
                fail("strategy.escalation_threshold: must be in [0,1]");
            break;
        default:
            break;
    }
    return ok;
}

double heuristic_score(const AgentProfile& agent, const TaskInstance& task,
                       const AgentHistory& history, double alpha,
                       double beta_sim) {
    double p_hist = 0.5;
    auto it = history.success_rate.find(agent.id);
    if (it != history.success_rate.end()) p_hist = it->second;
    std::vector<double> agent_feat{agent.expertise.perc, agent.expertise.sem,
                                   agent.expertise.inf};
    double sim = 0.0;
    if (agent_feat.size() == task.feature_vector.size())
        sim = 1.0 - task_distance(agent_feat, task.feature_vector,
                                  DistanceMetric::cosine_dissimilarity);
    return alpha * p_hist + beta_sim * sim;
}

double assignment_cost(const AgentProfile& agent, const TaskInstance& task,
                       const DimensionWeights& w) {
    return processing_cost(agent, task.initial_uncertainty.epistemic, w);
}

SuboptimalityInstance agnostic_suboptimality_instance() {
    SuboptimalityInstance inst;

    AgentProfile a;
    a.id = "agent-a";
    a.unit_cost = 5.0;
    a.expertise = {0.2, 0.2, 0.2};
    AgentProfile b;
    b.id = "agent-b";
    b.unit_cost = 1.0;
    b.expertise = {0.9, 0.9, 0.9};
    inst.pool = {a, b};

    inst.task.id = "witness-task";
    inst.task.initial_uncertainty.epistemic = {0.5, 0.5, 0.5};
    // identical similarity for both agents: the router decides on history
    // alone and picks the expensive agent
    inst.task.feature_vector = {1.0, 1.0, 1.0};
    inst.history.success_rate = {{"agent-a", 0.9}, {"agent-b", 0.6}};

    const DimensionWeights w{};
    inst.expected_gap =
        assignment_cost(a, inst.task, w) - assignment_cost(b, inst.task, w);
    return inst;
}

}  // namespace agora

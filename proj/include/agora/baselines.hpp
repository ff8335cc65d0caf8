#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "agora/agents.hpp"
#include "agora/market.hpp"

namespace agora {

enum class StrategyKind {
    single_agent,
    random_assignment,
    heuristic_router,
    top2,
    tiered_cascade,
    uncertainty_aware,
    agora,
};

const char* strategy_kind_name(StrategyKind k);
StrategyKind strategy_kind_from_name(const std::string& name);

struct StrategyConfig {
    StrategyKind kind = StrategyKind::agora;
    std::uint64_t seed = 0;

    // single_agent
    std::string agent_id;
    // heuristic_router coefficients (equal weighting by default)
    double alpha = 0.5;
    double beta_sim = 0.5;
    // top2
    std::vector<std::string> top2_ids;
    // tiered_cascade / uncertainty_aware
    std::vector<std::string> cascade_order;  // empty: pool ordered by
                                             // ascending tflops_per_token
    double escalation_threshold = 0.5;       // in [0,1]
    // calibration mode: fix how many tasks complete at each cascade tier;
    // escalated tasks jump straight to their completing tier
    std::vector<std::size_t> calibrated_counts;

    bool valid(const std::vector<AgentProfile>& pool,
               std::vector<std::string>* diagnostics = nullptr) const;
};

// Per-agent success history consumed by the heuristic router.
struct AgentHistory {
    std::map<std::string, double> success_rate;  // P_hist in [0,1]
};

// S = alpha * P_hist + beta_sim * (1 - cosine task distance). Deliberately
// blind to costs and to the structure of the uncertainty vector.
double heuristic_score(const AgentProfile& agent, const TaskInstance& task,
                       const AgentHistory& history, double alpha,
                       double beta_sim);

// Fixed two-agent instance where the heuristic router's pick is strictly
// more expensive than the cost-driven assignment.
struct SuboptimalityInstance {
    std::vector<AgentProfile> pool;
    TaskInstance task;
    AgentHistory history;
    double alpha = 0.5;
    double beta_sim = 0.5;
    double expected_gap = 0.0;  // heuristic system cost - cost-driven cost
};

SuboptimalityInstance agnostic_suboptimality_instance();

// System cost of one agent handling the task's full epistemic load.
double assignment_cost(const AgentProfile& agent, const TaskInstance& task,
                       const DimensionWeights& w);

}  // namespace agora

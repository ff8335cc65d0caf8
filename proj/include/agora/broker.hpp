#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "agora/agents.hpp"
#include "agora/market.hpp"
#include "agora/rng.hpp"
#include "agora/uncertainty.hpp"

namespace agora {

enum class DistanceMetric { normalized_euclidean, cosine_dissimilarity };

struct BrokerParams {
    double lambda_dist = 0.2;
    double gamma_decay = 0.99;   // (0,1]
    double eta_synergy = 0.8;
    double omega_strategic = 1.2;
    DistanceMetric distance_metric = DistanceMetric::normalized_euclidean;
    // true: Thompson Sampling posterior draw; false: deterministic posterior
    // mean variant
    bool sample_posterior = true;
};

struct BetaPosterior {
    double alpha = 1.0;
    double beta = 1.0;
    double mean() const { return alpha / (alpha + beta); }
};

struct BrokerState {
    std::map<std::string, BetaPosterior> posteriors;
    std::map<std::string, std::uint64_t> last_update;
    std::map<std::string, std::vector<double>> feature_vectors;
    std::uint64_t round = 0;

    static BrokerState init(const std::vector<AgentProfile>& pool);
};

// alpha+1 on success, beta+1 on failure; stamps last_update.
void record_reward(BrokerState& state, const std::string& agent_id, int reward,
                   std::uint64_t tick);

// Distance in [0,1]. For the normalized Euclidean form the caller supplies
// the per-task max distance over the pool; zero vectors under the cosine
// metric are maximally dissimilar (distance 1).
double task_distance(std::span<const double> agent_features,
                     std::span<const double> task_features,
                     DistanceMetric metric, double pool_max_distance = 1.0);

// Expected net system cost saving from the agent's admissible potential
// trades (as sender or receiver), each weighted with occurrence probability
// 1; sender-deactivating trades also credit the freed fixed cost.
double strategic_uncertainty(const std::string& agent_id,
                             const MarketState& state,
                             const std::vector<AgentProfile>& agents,
                             const MarketParams& params);

// Mean over teammates of Comp(S,j) * Pot(j): expertise cosine dissimilarity
// times the teammate's posterior mean. 0 for singleton pools.
double synergy_value(const std::string& agent_id,
                     const std::vector<AgentProfile>& pool,
                     const BrokerState& broker_state);

// Everything utility_score needs besides the agent itself.
struct BrokerContext {
    const std::vector<AgentProfile>* pool = nullptr;
    const MarketState* market_state = nullptr;
    MarketParams market_params;
    DimensionWeights weights;
};

// Market-aware utility: (theta*R_max - Cost) * exp(-lambda*Dist) *
// gamma^dt * (1+Synergy)^eta * (1+U_strategic)^omega. theta is the supplied
// posterior draw (or mean).
double utility_score(const std::string& agent_id, const TaskInstance& task,
                     const BrokerState& broker_state, const BrokerContext& ctx,
                     const BrokerParams& params, std::uint64_t tick,
                     double theta_draw);

// Argmax of utility_score over the pool; ties broken by lexicographic agent
// id. Each candidate is scored against a probe market state in which it
// holds the task's epistemic vector, so the strategic factor reflects the
// trades the assignment would open up. The generator advances exactly once
// per agent (one substream seed per candidate).
std::string select_initial_agent(const TaskInstance& task,
                                 const std::vector<AgentProfile>& pool,
                                 const BrokerState& broker_state,
                                 const BrokerContext& ctx,
                                 const BrokerParams& params,
                                 std::uint64_t tick, Rng& rng);

// Versioned JSON checkpoint (posteriors, last_update, round).
std::string broker_state_to_json(const BrokerState& state);
BrokerState broker_state_from_json(const std::string& json_text);

}  // namespace agora

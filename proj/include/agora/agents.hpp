#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "agora/uncertainty.hpp"

namespace agora {

// Static description of a heterogeneous agent: unit processing cost,
// per-dimension expertise and capacity, fixed activation cost and the
// compute model used for FLOPs accounting.
struct AgentProfile {
    std::string id;
    double unit_cost = 1.0;                    // c > 0, cost per unit uncertainty
    UncertaintyVector expertise;               // xi, components in [0,1]
    UncertaintyVector capacity{1e9, 1e9, 1e9}; // per-dimension portfolio limit
    double fixed_cost = 0.0;                   // beta, charged when active
    double tflops_per_token = 1.0;
    double transfer_efficiency = 1.0;          // kappa in [0,1]

    bool valid() const;
};

// An agent's uncertainty holdings: self-generated base plus the signed net
// of market transfers. total() stays componentwise nonnegative and within
// capacity whenever the market engine yields control.
struct AgentPortfolio {
    UncertaintyVector base;
    UncertaintyVector net_transferred;

    UncertaintyVector total() const { return base + net_transferred; }
};

struct LedgerEntry {
    std::uint64_t tick = 0;
    std::string sender;
    std::string receiver;
    Dim dimension = Dim::perc;
    double amount = 0.0;      // > 0
    double cost_delta = 0.0;  // < 0 for every executed trade
};

struct TaskInstance {
    std::string id;
    UncertaintyDecomposition initial_uncertainty;
    std::vector<double> feature_vector;
    double max_reward = 1.0;
    int ground_truth_label = 0;  // synthetic tasks only
};

struct AgentResponse {
    std::vector<double> class_probs;
    std::vector<double> outcome_probs;
    std::vector<std::pair<double, double>> semantic_ambiguities;
    int tokens_generated = 0;
};

// Componentwise base + net_transferred.
UncertaintyVector portfolio_total(const AgentPortfolio& p);

// c * (w . u) + beta while the agent holds any uncertainty; 0 when idle.
double processing_cost(const AgentProfile& profile, const UncertaintyVector& u,
                       const DimensionWeights& w);

// Transport failures the gateway may raise; retryable by policy.
struct BackendTransportError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
// Protocol violations are fatal for the task.
struct BackendProtocolError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Abstraction behind which synthetic or remote agents sit. Implementations
// must be deterministic given (backend seed, task id, agent id) and safe for
// concurrent evaluate calls on distinct tasks.
class Backend {
  public:
    virtual ~Backend() = default;
    virtual AgentResponse evaluate(const AgentProfile& agent,
                                   const TaskInstance& task) = 0;
};

// Deterministic stand-in for a real model endpoint. Probability vectors
// sharpen with the agent's expertise in the task's dominant epistemic
// dimension, so routing quality is measurable.
class SyntheticBackend : public Backend {
  public:
    explicit SyntheticBackend(std::uint64_t seed, int tokens_per_task = 20)
        : seed_(seed), tokens_per_task_(tokens_per_task) {}

    AgentResponse evaluate(const AgentProfile& agent,
                           const TaskInstance& task) override;

    std::uint64_t seed() const { return seed_; }
    int tokens_per_task() const { return tokens_per_task_; }

  private:
    std::uint64_t seed_;
    int tokens_per_task_;
};

// Pool lookup helper; profiles are kept sorted by id.
const AgentProfile* find_agent(const std::vector<AgentProfile>& pool,
                               const std::string& id);

}  // namespace agora

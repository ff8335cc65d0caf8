#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "agora/agents.hpp"
#include "agora/baselines.hpp"
#include "agora/broker.hpp"
#include "agora/market.hpp"

namespace agora {

// Per-dimension uniform magnitude range for synthetic task generation, plus
// the decomposition cues applied to every drawn vector.
struct TaskMix {
    double perc_lo = 0.2, perc_hi = 0.9;
    double sem_lo = 0.2, sem_hi = 0.9;
    double inf_lo = 0.2, inf_hi = 0.9;
    double knowledge_gap_cue = 0.0;
    double randomness_signal = 0.0;
};

struct ScenarioConfig {
    std::string name = "scenario";
    std::vector<AgentProfile> pool;
    std::size_t n_tasks = 0;
    TaskMix task_mix;
    int tokens_per_task = 20;
    DimensionWeights weights;
    MarketParams market;
    std::size_t max_trades = 256;
    BrokerParams broker;
    StrategyConfig strategy;
    std::uint64_t seed = 0;
    double epsilon_resolve = 0.25;  // constraint level on the final norm
    double cost_per_tflop = 0.0;    // converts attempt FLOPs into cost units
    double tau_sim = 0.75;          // reserved knob; no consumer yet

    // Collects every violation; returns true when the config is runnable.
    bool valid(std::vector<std::string>* diagnostics = nullptr) const;
};

struct PerTaskRow {
    std::string task_id;
    std::vector<std::string> selected_agents;  // in activation order
    std::size_t trades = 0;
    double final_epistemic_norm = 0.0;  // weighted residual
    bool correct = false;
    double cost = 0.0;    // terminal system cost + attempt compute cost
    double tflops = 0.0;  // total attempt compute
    bool constraint_violated = false;
};

struct AggregateMetrics {
    double accuracy = 0.0;
    double u_final_epis = 0.0;  // mean weighted residual
    double coi = 0.0;           // mean activations per task
    double uaps = 0.0;          // accuracy * (1 - u_final_epis)
    double relative_cost = 1.0;
    double cost_performance_ratio = 0.0;  // PFLOPs / accuracy-percent
    std::size_t total_trades = 0;
    double total_tflops = 0.0;
    double total_cost = 0.0;
    std::size_t constraint_violations = 0;
};

struct EpisodeReport {
    int schema_version = 1;
    std::string scenario;
    std::string strategy;
    std::uint64_t seed = 0;
    std::vector<PerTaskRow> per_task;
    AggregateMetrics aggregate;
};

// Deterministic synthetic task list: epistemic magnitudes drawn from the
// mix's per-dimension ranges, decomposed with the configured cues. Task
// feature vector = L1-normalized epistemic composition.
std::vector<TaskInstance> generate_tasks(const ScenarioConfig& config);

// End-to-end seeded episode under the configured strategy. When
// compute_relative_cost is set and the strategy is not agora, a reference
// agora episode on the same pool and seed normalizes relative_cost.
EpisodeReport run_episode(const ScenarioConfig& config);
EpisodeReport run_episode(const ScenarioConfig& config, Backend& backend,
                          bool compute_relative_cost = true);

// Aggregates per-task rows; throws std::invalid_argument on empty rows.
// reference_total_cost <= 0 means "self" (relative_cost = 1).
AggregateMetrics compute_metrics(const std::vector<PerTaskRow>& rows,
                                 const ScenarioConfig& config,
                                 double reference_total_cost = 0.0);

std::string episode_report_to_json(const EpisodeReport& report);
EpisodeReport episode_report_from_json(const std::string& json_text);
void write_per_task_csv(std::ostream& os, const EpisodeReport& report);
void write_aggregate_csv(std::ostream& os, const EpisodeReport& report);

// (x, y, series) rows for cost-vs-accuracy curves: x = total PFLOPs,
// y = accuracy, series = strategy name.
void write_plot_data(std::ostream& os,
                     const std::vector<EpisodeReport>& reports);

}  // namespace agora

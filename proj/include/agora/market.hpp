#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "agora/agents.hpp"
#include "agora/uncertainty.hpp"

namespace agora {

struct MarketParams {
    double trade_trigger = 0.15;    // tau_trade: minimum holding differential
    double benefit_threshold = 0.08; // tau_benefit: minimum overall benefit
    double min_improvement = 1e-9;  // delta_min: strict improvement guard
    bool use_effective_capacity = true; // (1-xi)T form vs literal T form
};

struct TradeProposal {
    std::string sender;
    std::string receiver;
    Dim dimension = Dim::perc;
    double amount = 0.0;      // > 0, <= sender's holding in the dimension
    double cost_delta = 0.0;  // admissible proposals have cost_delta < -delta_min
};

// Per-episode allocation: agent portfolios plus the transaction ledger.
struct MarketState {
    std::map<std::string, AgentPortfolio> portfolios;
    std::vector<LedgerEntry> ledger;
    std::uint64_t tick = 0;
};

struct MarketPhaseResult {
    std::size_t trade_count = 0;
    bool truncated = false;  // stopped at max_trades before equilibrium
};

// Closed-form cost change of transferring amount T in one dimension:
// T * (c_receiver * (1 - xi_receiver_dim) - c_sender).
double cost_delta(const AgentProfile& sender, const AgentProfile& receiver,
                  Dim dimension, double amount);

// Conjunction of trigger, capacity, profitability and overall-benefit
// conditions. The benefit side credits the sender's fixed cost when the
// trade would empty its entire portfolio.
bool is_admissible(const TradeProposal& proposal, const MarketState& state,
                   const std::vector<AgentProfile>& agents,
                   const MarketParams& params);

// Largest transfer in `dimension` the receiver can absorb within capacity;
// capped by the sender's holding.
double max_trade_amount(const AgentProfile& receiver,
                        const UncertaintyVector& receiver_total,
                        double sender_holding, Dim dimension,
                        const MarketParams& params);

// Scans all (sender, receiver, dimension) triples at their maximal
// admissible amount and returns the proposal with minimal cost delta; ties
// broken by lexicographic (sender, receiver, dimension). The serial variant
// is the reference; the default variant uses OpenMP and must return the
// identical proposal.
std::optional<TradeProposal> find_most_profitable_trade(
    const MarketState& state, const std::vector<AgentProfile>& agents,
    const MarketParams& params);
std::optional<TradeProposal> find_most_profitable_trade_serial(
    const MarketState& state, const std::vector<AgentProfile>& agents,
    const MarketParams& params);

// Applies an admissible proposal: sender sheds kappa*T, receiver absorbs
// (1-xi)*T, ledger appended, tick incremented. Throws std::logic_error on an
// inadmissible proposal (engine bug).
void execute_trade(MarketState& state, const std::vector<AgentProfile>& agents,
                   const TradeProposal& proposal, const MarketParams& params);

// Greedy descent: repeatedly executes the most profitable admissible trade
// until local equilibrium or max_trades.
MarketPhaseResult run_market_phase(MarketState& state,
                                   const std::vector<AgentProfile>& agents,
                                   const MarketParams& params,
                                   std::size_t max_trades);

// Sum of processing costs over all agents' portfolio totals.
double system_cost(const MarketState& state,
                   const std::vector<AgentProfile>& agents,
                   const DimensionWeights& w);

// (c_i(d1)/c_i(d2)) / (c_j(d1)/c_j(d2)) with per-dimension cost
// c / max(xi_d, 1e-3). CAI < 1 iff a_i holds the comparative advantage in d1.
double comparative_advantage_index(const AgentProfile& a_i,
                                   const AgentProfile& a_j, Dim d1, Dim d2);

// Ledger CSV contract: header tick,sender,receiver,dimension,amount,cost_delta
void write_ledger_csv(std::ostream& os, const std::vector<LedgerEntry>& ledger);

}  // namespace agora

#include "agora/market.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <tuple>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace agora {

namespace {

constexpr double kEps = 1e-12;

const AgentProfile& require_agent(const std::vector<AgentProfile>& agents,
                                  const std::string& id) {
    const AgentProfile* a = find_agent(agents, id);
    if (!a) throw std::invalid_argument("unknown agent id: " + id);
    return *a;
}

bool portfolio_empty(const UncertaintyVector& u) {
    return u.perc <= kEps && u.sem <= kEps && u.inf <= kEps;
}

// true when lhs is strictly preferred: smaller cost delta, lexicographic
// (sender, receiver, dimension) on exact ties
bool proposal_less(const TradeProposal& lhs, const TradeProposal& rhs) {
    return std::tie(lhs.cost_delta, lhs.sender, lhs.receiver, lhs.dimension) <
           std::tie(rhs.cost_delta, rhs.sender, rhs.receiver, rhs.dimension);
}

}  // namespace

double cost_delta(const AgentProfile& sender, const AgentProfile& receiver,
                  Dim dimension, double amount) {
    if (!(amount > 0.0)) throw std::invalid_argument("trade amount must be > 0");
    const double xi = receiver.expertise[dimension];
    return amount * (receiver.unit_cost * (1.0 - xi) - sender.unit_cost);
}

double max_trade_amount(const AgentProfile& receiver,
                        const UncertaintyVector& receiver_total,
                        double sender_holding, Dim dimension,
                        const MarketParams& params) {
    const double slack =
        receiver.capacity[dimension] - receiver_total[dimension];
    if (slack <= 0.0) return 0.0;
    double cap = slack;
    if (params.use_effective_capacity) {
        const double absorb = 1.0 - receiver.expertise[dimension];
        cap = absorb > kEps ? slack / absorb
                            : std::numeric_limits<double>::infinity();
    }
    return std::min(sender_holding, cap);
}

bool is_admissible(const TradeProposal& proposal, const MarketState& state,
                   const std::vector<AgentProfile>& agents,
                   const MarketParams& params) {
    if (proposal.sender == proposal.receiver) return false;
    if (!(proposal.amount > 0.0)) return false;
    const AgentProfile& snd = require_agent(agents, proposal.sender);
    const AgentProfile& rcv = require_agent(agents, proposal.receiver);
    auto snd_it = state.portfolios.find(proposal.sender);
    auto rcv_it = state.portfolios.find(proposal.receiver);
    const UncertaintyVector snd_total = snd_it == state.portfolios.end()
                                            ? UncertaintyVector{}
                                            : snd_it->second.total();
    const UncertaintyVector rcv_total = rcv_it == state.portfolios.end()
                                            ? UncertaintyVector{}
                                            : rcv_it->second.total();
    const Dim d = proposal.dimension;

    if (proposal.amount > snd_total[d] + kEps) return false;

    // (i) trigger
    if (!(snd_total[d] - rcv_total[d] > params.trade_trigger)) return false;

    // (ii) capacity
    const double increment = params.use_effective_capacity
                                 ? (1.0 - rcv.expertise[d]) * proposal.amount
                                 : proposal.amount;
    if (rcv_total[d] + increment > rcv.capacity[d] + 1e-9) return false;

    // (iii) profitability
    const double dc = cost_delta(snd, rcv, d, proposal.amount);
    if (!(dc < -params.min_improvement)) return false;

    // (iv) overall benefit; sender fixed cost counts when the trade empties
    // the sender's whole portfolio
    double benefit = -dc;
    UncertaintyVector after = snd_total;
    after[d] -= snd.transfer_efficiency * proposal.amount;
    if (!portfolio_empty(snd_total) && portfolio_empty(after))
        benefit += snd.fixed_cost;
    return benefit >= params.benefit_threshold;
}

namespace {

std::optional<TradeProposal> candidate_for(
    const MarketState& state, const std::vector<AgentProfile>& agents,
    const MarketParams& params, std::size_t si, std::size_t ri, Dim d) {
    if (si == ri) return std::nullopt;
    const AgentProfile& snd = agents[si];
    const AgentProfile& rcv = agents[ri];
    auto snd_it = state.portfolios.find(snd.id);
    if (snd_it == state.portfolios.end()) return std::nullopt;
    const double holding = snd_it->second.total()[d];
    if (holding <= kEps) return std::nullopt;
    auto rcv_it = state.portfolios.find(rcv.id);
    const UncertaintyVector rcv_total = rcv_it == state.portfolios.end()
                                            ? UncertaintyVector{}
                                            : rcv_it->second.total();
    const double amount =
        max_trade_amount(rcv, rcv_total, holding, d, params);
    if (amount <= kEps) return std::nullopt;
    TradeProposal p{snd.id, rcv.id, d, amount,
                    cost_delta(snd, rcv, d, amount)};
    if (!is_admissible(p, state, agents, params)) return std::nullopt;
    return p;
}

}  // namespace

std::optional<TradeProposal> find_most_profitable_trade_serial(
    const MarketState& state, const std::vector<AgentProfile>& agents,
    const MarketParams& params) {
    std::optional<TradeProposal> best;
    for (std::size_t si = 0; si < agents.size(); ++si)
        for (std::size_t ri = 0; ri < agents.size(); ++ri)
            for (Dim d : kAllDims) {
                auto p = candidate_for(state, agents, params, si, ri, d);
                if (p && (!best || proposal_less(*p, *best))) best = p;
            }
    return best;
}

std::optional<TradeProposal> find_most_profitable_trade(
    const MarketState& state, const std::vector<AgentProfile>& agents,
    const MarketParams& params) {
    const std::size_t n = agents.size();
    const std::size_t total = n * n * 3;
    std::optional<TradeProposal> best;
#ifdef _OPENMP
#pragma omp parallel if (total >= 3072)
    {
        std::optional<TradeProposal> local;
#pragma omp for nowait
        for (long long idx = 0; idx < static_cast<long long>(total); ++idx) {
            const std::size_t si = static_cast<std::size_t>(idx) / (n * 3);
            const std::size_t ri = (static_cast<std::size_t>(idx) / 3) % n;
            const Dim d = kAllDims[static_cast<std::size_t>(idx) % 3];
            auto p = candidate_for(state, agents, params, si, ri, d);
            if (p && (!local || proposal_less(*p, *local))) local = p;
        }
#pragma omp critical(agora_best_trade)
        {
            if (local && (!best || proposal_less(*local, *best))) best = local;
        }
    }
#else
    best = find_most_profitable_trade_serial(state, agents, params);
    (void)total;
#endif
    return best;
}

void execute_trade(MarketState& state, const std::vector<AgentProfile>& agents,
                   const TradeProposal& proposal, const MarketParams& params) {
    if (!is_admissible(proposal, state, agents, params))
        throw std::logic_error("execute_trade: inadmissible proposal");
    const AgentProfile& snd = require_agent(agents, proposal.sender);
    const AgentProfile& rcv = require_agent(agents, proposal.receiver);
    const Dim d = proposal.dimension;
    auto snd_it = state.portfolios.find(proposal.sender);

    snd_it->second.net_transferred[d] -=
        snd.transfer_efficiency * proposal.amount;
    // clamp float dust so holdings stay nonnegative
    AgentPortfolio& sp = snd_it->second;
    if (sp.total()[d] < 0.0) sp.net_transferred[d] -= sp.total()[d];

    AgentPortfolio& rp = state.portfolios[proposal.receiver];
    rp.net_transferred[d] += (1.0 - rcv.expertise[d]) * proposal.amount;

    state.ledger.push_back(LedgerEntry{state.tick, proposal.sender,
                                       proposal.receiver, d, proposal.amount,
                                       proposal.cost_delta});
    ++state.tick;
}

MarketPhaseResult run_market_phase(MarketState& state,
                                   const std::vector<AgentProfile>& agents,
                                   const MarketParams& params,
                                   std::size_t max_trades) {
    MarketPhaseResult result;
    while (result.trade_count < max_trades) {
        auto best = find_most_profitable_trade(state, agents, params);
        if (!best) return result;
        execute_trade(state, agents, *best, params);
        ++result.trade_count;
    }
    // only truncated if another admissible trade remains
    result.truncated =
        find_most_profitable_trade(state, agents, params).has_value();
    return result;
}

double system_cost(const MarketState& state,
                   const std::vector<AgentProfile>& agents,
                   const DimensionWeights& w) {
    double total = 0.0;
    for (const auto& agent : agents) {
        auto it = state.portfolios.find(agent.id);
        if (it == state.portfolios.end()) continue;
        total += processing_cost(agent, it->second.total(), w);
    }
    return total;
}

double comparative_advantage_index(const AgentProfile& a_i,
                                   const AgentProfile& a_j, Dim d1, Dim d2) {
    constexpr double kXiFloor = 1e-3;
    auto per_dim_cost = [&](const AgentProfile& a, Dim d) {
        return a.unit_cost / std::max(a.expertise[d], kXiFloor);
    };
    const double ri = per_dim_cost(a_i, d1) / per_dim_cost(a_i, d2);
    const double rj = per_dim_cost(a_j, d1) / per_dim_cost(a_j, d2);
    return ri / rj;
}

void write_ledger_csv(std::ostream& os,
                      const std::vector<LedgerEntry>& ledger) {
    os << "tick,sender,receiver,dimension,amount,cost_delta\n";
    char buf[64];
    for (const auto& e : ledger) {
        os << e.tick << ',' << e.sender << ',' << e.receiver << ','
           << dim_name(e.dimension) << ',';
        std::snprintf(buf, sizeof(buf), "%.17g", e.amount);
        os << buf << ',';
        std::snprintf(buf, sizeof(buf), "%.17g", e.cost_delta);
        os << buf << '\n';
    }
}

}  // namespace agora

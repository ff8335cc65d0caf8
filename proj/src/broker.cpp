#include "agora/broker.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace agora {

namespace {

using nlohmann::json;

constexpr int kBrokerSchemaVersion = 1;

double cosine_similarity(const UncertaintyVector& a,
                         const UncertaintyVector& b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (Dim d : kAllDims) {
        dot += a[d] * b[d];
        na += a[d] * a[d];
        nb += b[d] * b[d];
    }
    if (na == 0.0 && nb == 0.0) return 1.0;  // both zero: identical
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

const BetaPosterior& require_posterior(const BrokerState& state,
                                       const std::string& id) {
    auto it = state.posteriors.find(id);
    if (it == state.posteriors.end())
        throw std::invalid_argument("unknown agent id: " + id);
    return it->second;
}

}  // namespace

BrokerState BrokerState::init(const std::vector<AgentProfile>& pool) {
    BrokerState s;
    for (const auto& a : pool) {
        s.posteriors[a.id] = BetaPosterior{1.0, 1.0};
        s.last_update[a.id] = 0;
        s.feature_vectors[a.id] = {a.expertise.perc, a.expertise.sem,
                                   a.expertise.inf};
    }
    return s;
}

void record_reward(BrokerState& state, const std::string& agent_id, int reward,
                   std::uint64_t tick) {
    auto it = state.posteriors.find(agent_id);
    if (it == state.posteriors.end())
        throw std::invalid_argument("unknown agent id: " + agent_id);
    if (reward != 0 && reward != 1)
        throw std::invalid_argument("reward must be 0 or 1");
    if (reward == 1)
        it->second.alpha += 1.0;
    else
        it->second.beta += 1.0;
    state.last_update[agent_id] = tick;
}

double task_distance(std::span<const double> agent_features,
                     std::span<const double> task_features,
                     DistanceMetric metric, double pool_max_distance) {
    if (agent_features.size() != task_features.size())
        throw std::invalid_argument("feature vectors must have equal length");
    if (metric == DistanceMetric::normalized_euclidean) {
        double sq = 0.0;
        for (std::size_t i = 0; i < agent_features.size(); ++i) {
            const double diff = agent_features[i] - task_features[i];
            sq += diff * diff;
        }
        const double dist = std::sqrt(sq) / (pool_max_distance + 1e-9);
        return std::clamp(dist, 0.0, 1.0);
    }
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < agent_features.size(); ++i) {
        dot += agent_features[i] * task_features[i];
        na += agent_features[i] * agent_features[i];
        nb += task_features[i] * task_features[i];
    }
    if (na == 0.0 || nb == 0.0) return 1.0;  // zero vector: maximal dissimilarity
    const double sim = dot / (std::sqrt(na) * std::sqrt(nb));
    return std::clamp(1.0 - sim, 0.0, 1.0);
}

double strategic_uncertainty(const std::string& agent_id,
                             const MarketState& state,
                             const std::vector<AgentProfile>& agents,
                             const MarketParams& params) {
    double total = 0.0;
    for (const auto& snd : agents)
        for (const auto& rcv : agents) {
            if (snd.id == rcv.id) continue;
            if (snd.id != agent_id && rcv.id != agent_id) continue;
            auto snd_it = state.portfolios.find(snd.id);
            if (snd_it == state.portfolios.end()) continue;
            const UncertaintyVector snd_total = snd_it->second.total();
            auto rcv_it = state.portfolios.find(rcv.id);
            const UncertaintyVector rcv_total =
                rcv_it == state.portfolios.end() ? UncertaintyVector{}
                                                 : rcv_it->second.total();
            for (Dim d : kAllDims) {
                const double holding = snd_total[d];
                if (holding <= 0.0) continue;
                const double amount =
                    max_trade_amount(rcv, rcv_total, holding, d, params);
                if (amount <= 0.0) continue;
                TradeProposal p{snd.id, rcv.id, d, amount,
                                cost_delta(snd, rcv, d, amount)};
                if (!is_admissible(p, state, agents, params)) continue;
                double saving = -p.cost_delta;
                // fixed-cost credit when the trade would idle the sender
                UncertaintyVector after = snd_total;
                after[d] -= snd.transfer_efficiency * amount;
                const bool deactivates = after.perc <= 1e-12 &&
                                         after.sem <= 1e-12 &&
                                         after.inf <= 1e-12;
                if (deactivates) saving += snd.fixed_cost;
                total += saving;
            }
        }
    return total;
}

double synergy_value(const std::string& agent_id,
                     const std::vector<AgentProfile>& pool,
                     const BrokerState& broker_state) {
    if (pool.size() < 2) return 0.0;
    const AgentProfile* self = find_agent(pool, agent_id);
    if (!self) throw std::invalid_argument("unknown agent id: " + agent_id);
    double sum = 0.0;
    std::size_t teammates = 0;
    for (const auto& other : pool) {
        if (other.id == agent_id) continue;
        const double comp =
            1.0 - cosine_similarity(self->expertise, other.expertise);
        const double pot = require_posterior(broker_state, other.id).mean();
        sum += comp * pot;
        ++teammates;
    }
    return teammates == 0 ? 0.0 : sum / static_cast<double>(teammates);
}

namespace {

double pool_max_feature_distance(const BrokerState& broker_state,
                                 const std::vector<AgentProfile>& pool,
                                 std::span<const double> task_features) {
    double max_dist = 0.0;
    for (const auto& a : pool) {
        auto it = broker_state.feature_vectors.find(a.id);
        if (it == broker_state.feature_vectors.end()) continue;
        double sq = 0.0;
        for (std::size_t i = 0;
             i < it->second.size() && i < task_features.size(); ++i) {
            const double diff = it->second[i] - task_features[i];
            sq += diff * diff;
        }
        max_dist = std::max(max_dist, std::sqrt(sq));
    }
    return max_dist;
}

}  // namespace

double utility_score(const std::string& agent_id, const TaskInstance& task,
                     const BrokerState& broker_state, const BrokerContext& ctx,
                     const BrokerParams& params, std::uint64_t tick,
                     double theta_draw) {
    const AgentProfile* profile = find_agent(*ctx.pool, agent_id);
    if (!profile) throw std::invalid_argument("unknown agent id: " + agent_id);

    const double cost = processing_cost(
        *profile, task.initial_uncertainty.epistemic, ctx.weights);
    const double enr = theta_draw * task.max_reward - cost;

    auto feat_it = broker_state.feature_vectors.find(agent_id);
    const std::vector<double>& agent_feat =
        feat_it != broker_state.feature_vectors.end()
            ? feat_it->second
            : std::vector<double>{};
    double dist = 0.0;
    if (!agent_feat.empty() && agent_feat.size() == task.feature_vector.size()) {
        const double pool_max = pool_max_feature_distance(
            broker_state, *ctx.pool, task.feature_vector);
        dist = task_distance(agent_feat, task.feature_vector,
                             params.distance_metric, pool_max);
    }

    auto lu_it = broker_state.last_update.find(agent_id);
    const std::uint64_t last =
        lu_it != broker_state.last_update.end() ? lu_it->second : 0;
    const double dt = tick >= last ? static_cast<double>(tick - last) : 0.0;

    const double syn = synergy_value(agent_id, *ctx.pool, broker_state);
    const double ustrat = strategic_uncertainty(
        agent_id, *ctx.market_state, *ctx.pool, ctx.market_params);

    return enr * std::exp(-params.lambda_dist * dist) *
           std::pow(params.gamma_decay, dt) *
           std::pow(1.0 + syn, params.eta_synergy) *
           std::pow(1.0 + ustrat, params.omega_strategic);
}

std::string select_initial_agent(const TaskInstance& task,
                                 const std::vector<AgentProfile>& pool,
                                 const BrokerState& broker_state,
                                 const BrokerContext& ctx,
                                 const BrokerParams& params,
                                 std::uint64_t tick, Rng& rng) {
    if (pool.empty()) throw std::invalid_argument("empty agent pool");
    std::vector<const AgentProfile*> sorted;
    sorted.reserve(pool.size());
    for (const auto& a : pool) sorted.push_back(&a);
    std::sort(sorted.begin(), sorted.end(),
              [](const AgentProfile* a, const AgentProfile* b) {
                  return a->id < b->id;
              });

    std::string best_id;
    double best_score = 0.0;
    for (const AgentProfile* agent : sorted) {
        // one advance per agent: derive a substream for the posterior draw
        const std::uint64_t sub = rng();
        const BetaPosterior& post = require_posterior(broker_state, agent->id);
        double theta;
        if (params.sample_posterior) {
            Rng sub_rng = make_rng(sub);
            theta = sample_beta(sub_rng, post.alpha, post.beta);
        } else {
            theta = post.mean();
        }

        // probe allocation: the candidate holds the task's epistemic vector
        MarketState probe = *ctx.market_state;
        probe.portfolios[agent->id].base += task.initial_uncertainty.epistemic;
        BrokerContext probe_ctx = ctx;
        probe_ctx.market_state = &probe;

        const double score = utility_score(agent->id, task, broker_state,
                                           probe_ctx, params, tick, theta);
        if (best_id.empty() || score > best_score) {
            best_id = agent->id;
            best_score = score;
        }
    }
    return best_id;
}

std::string broker_state_to_json(const BrokerState& state) {
    json doc;
    doc["schema_version"] = kBrokerSchemaVersion;
    doc["round"] = state.round;
    json posteriors = json::object();
    for (const auto& [id, p] : state.posteriors)
        posteriors[id] = {{"alpha", p.alpha}, {"beta", p.beta}};
    doc["posteriors"] = posteriors;
    json last = json::object();
    for (const auto& [id, t] : state.last_update) last[id] = t;
    doc["last_update"] = last;
    return doc.dump(2);
}

BrokerState broker_state_from_json(const std::string& json_text) {
    const json doc = json::parse(json_text);
    if (doc.at("schema_version").get<int>() != kBrokerSchemaVersion)
        throw std::invalid_argument("unsupported broker checkpoint version");
    BrokerState s;
    s.round = doc.at("round").get<std::uint64_t>();
    for (const auto& [id, p] : doc.at("posteriors").items())
        s.posteriors[id] =
            BetaPosterior{p.at("alpha").get<double>(), p.at("beta").get<double>()};
    for (const auto& [id, t] : doc.at("last_update").items())
        s.last_update[id] = t.get<std::uint64_t>();
    return s;
}

}  // namespace agora

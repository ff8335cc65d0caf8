#include "agora/agents.hpp"

#include <algorithm>
#include <cmath>

#include "agora/rng.hpp"

namespace agora {

bool AgentProfile::valid() const {
    if (id.empty()) return false;
    if (!(unit_cost > 0.0)) return false;
    if (fixed_cost < 0.0) return false;
    if (!(tflops_per_token > 0.0)) return false;
    if (transfer_efficiency < 0.0 || transfer_efficiency > 1.0) return false;
    for (Dim d : kAllDims) {
        if (expertise[d] < 0.0 || expertise[d] > 1.0) return false;
        if (!(capacity[d] > 0.0)) return false;
    }
    return true;
}

UncertaintyVector portfolio_total(const AgentPortfolio& p) {
    return p.total();
}

double processing_cost(const AgentProfile& profile, const UncertaintyVector& u,
                       const DimensionWeights& w) {
    const bool active = u.perc > 0.0 || u.sem > 0.0 || u.inf > 0.0;
    if (!active) return 0.0;
    return profile.unit_cost * total_uncertainty(u, w) + profile.fixed_cost;
}

const AgentProfile* find_agent(const std::vector<AgentProfile>& pool,
                               const std::string& id) {
    for (const auto& a : pool)
        if (a.id == id) return &a;
    return nullptr;
}

namespace {

Dim dominant_dim(const UncertaintyVector& u) {
    Dim best = Dim::perc;
    for (Dim d : kAllDims)
        if (u[d] > u[best]) best = d;
    return best;
}

std::vector<double> sharp_softmax(Rng& rng, std::size_t k,
                                  std::size_t peak_index, double sharpness) {
    std::vector<double> logits(k);
    for (auto& l : logits) l = uniform01(rng);
    logits[peak_index] += 12.0 * sharpness;
    const double lmax = *std::max_element(logits.begin(), logits.end());
    double denom = 0.0;
    std::vector<double> probs(k);
    for (std::size_t i = 0; i < k; ++i) {
        probs[i] = std::exp(logits[i] - lmax);
        denom += probs[i];
    }
    for (auto& p : probs) p /= denom;
    return probs;
}

}  // namespace

AgentResponse SyntheticBackend::evaluate(const AgentProfile& agent,
                                         const TaskInstance& task) {
    const std::uint64_t stream =
        mix_seed(mix_seed(seed_, hash_str(task.id)), hash_str(agent.id));
    Rng rng = make_rng(stream);

    const UncertaintyVector& epis = task.initial_uncertainty.epistemic;
    const Dim dom = dominant_dim(epis);
    // Sharpness scales with the agent's expertise in the task's dominant
    // epistemic dimension.
    const double s = agent.expertise[dom];

    constexpr std::size_t kClasses = 4;
    const std::size_t peak = hash_str(task.id) % kClasses;

    AgentResponse resp;
    resp.class_probs = sharp_softmax(rng, kClasses, peak, s);
    resp.outcome_probs = sharp_softmax(rng, kClasses, peak, s);
    const double sem_scale = 1.0 - agent.expertise[Dim::sem];
    resp.semantic_ambiguities = {
        {0.5, sem_scale * uniform01(rng)},
        {0.5, sem_scale * uniform01(rng)},
    };
    resp.tokens_generated = tokens_per_task_;
    return resp;
}

}  // namespace agora

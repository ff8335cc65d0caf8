#include <doctest.h>

#include "agora/agents.hpp"
#include "agora/uncertainty.hpp"

using namespace agora;

namespace {

AgentProfile make_agent(const std::string& id, double cost,
                        UncertaintyVector expertise) {
    AgentProfile a;
    a.id = id;
    a.unit_cost = cost;
    a.expertise = expertise;
    return a;
}

}  // namespace

TEST_CASE("portfolio total is the componentwise sum") {
    AgentPortfolio p;
    p.base = {0.3, 0.0, 0.0};
    CHECK(portfolio_total(p) == UncertaintyVector{0.3, 0.0, 0.0});

    p.base = {0.3, 0.1, 0.0};
    p.net_transferred = {-0.3, 0.0, 0.2};
    CHECK(portfolio_total(p) == UncertaintyVector{0.0, 0.1, 0.2});

    CHECK(portfolio_total(AgentPortfolio{}) == UncertaintyVector{});
}

TEST_CASE("processing cost charges the weighted load plus activation") {
    const DimensionWeights w{};
    AgentProfile a = make_agent("a", 2.0, {});
    CHECK(processing_cost(a, {0.5, 0.5, 0.5}, w) == doctest::Approx(1.0));
    CHECK(processing_cost(a, {0, 0, 0}, w) == 0.0);

    AgentProfile b = make_agent("b", 1.0, {});
    b.fixed_cost = 0.3;
    CHECK(processing_cost(b, {1, 1, 1}, w) == doctest::Approx(1.3));
    // idle agents pay nothing, including the fixed cost
    CHECK(processing_cost(b, {0, 0, 0}, w) == 0.0);
}

TEST_CASE("processing cost is monotone in every component") {
    const DimensionWeights w{};
    AgentProfile a = make_agent("a", 1.7, {});
    a.fixed_cost = 0.2;
    UncertaintyVector u{0.2, 0.3, 0.4};
    const double base = processing_cost(a, u, w);
    for (Dim d : kAllDims) {
        UncertaintyVector bigger = u;
        bigger[d] += 0.1;
        CHECK(processing_cost(a, bigger, w) >= base);
    }
}

TEST_CASE("agent profile validation enforces the field constraints") {
    AgentProfile a = make_agent("a", 1.0, {0.5, 0.5, 0.5});
    CHECK(a.valid());
    a.unit_cost = 0.0;
    CHECK_FALSE(a.valid());
    a.unit_cost = 1.0;
    a.expertise.perc = 1.5;
    CHECK_FALSE(a.valid());
    a.expertise.perc = 0.5;
    a.transfer_efficiency = -0.1;
    CHECK_FALSE(a.valid());
    a.transfer_efficiency = 1.0;
    a.id.clear();
    CHECK_FALSE(a.valid());
}

TEST_CASE("synthetic backend sharpens with expertise and is deterministic") {
    SyntheticBackend backend(12345, 20);

    TaskInstance task;
    task.id = "probe-task";
    task.initial_uncertainty.epistemic = {0.8, 0.2, 0.1};

    AgentProfile expert = make_agent("expert", 1.0, {1.0, 1.0, 1.0});
    AgentProfile novice = make_agent("novice", 1.0, {0.0, 0.0, 0.0});

    const AgentResponse expert_resp = backend.evaluate(expert, task);
    const AgentResponse novice_resp = backend.evaluate(novice, task);
    CHECK(perceptual_uncertainty(expert_resp.class_probs) < 0.05);
    CHECK(perceptual_uncertainty(novice_resp.class_probs) > 0.9);
    CHECK(expert_resp.tokens_generated == 20);

    // determinism across calls and across backend instances with one seed
    const AgentResponse again = backend.evaluate(expert, task);
    CHECK(again.class_probs == expert_resp.class_probs);
    CHECK(again.outcome_probs == expert_resp.outcome_probs);
    CHECK(again.semantic_ambiguities == expert_resp.semantic_ambiguities);
    SyntheticBackend twin(12345, 20);
    CHECK(twin.evaluate(expert, task).class_probs == expert_resp.class_probs);
}

TEST_CASE("synthetic novices stay near-uniform across many tasks") {
    SyntheticBackend backend(999, 20);
    AgentProfile novice = make_agent("novice", 1.0, {0.0, 0.0, 0.0});
    AgentProfile expert = make_agent("expert", 1.0, {1.0, 1.0, 1.0});
    for (int i = 0; i < 50; ++i) {
        TaskInstance task;
        task.id = "task-" + std::to_string(i);
        task.initial_uncertainty.epistemic = {0.5, 0.4, 0.3};
        CHECK(perceptual_uncertainty(backend.evaluate(novice, task)
                                         .class_probs) > 0.9);
        CHECK(perceptual_uncertainty(backend.evaluate(expert, task)
                                         .class_probs) < 0.05);
    }
}

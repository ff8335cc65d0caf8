#include <cmath>
#include <sstream>

#include <doctest.h>

#include "agora/harness.hpp"
#include "agora/scenarios.hpp"

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

ScenarioConfig single_agent_scenario(AgentProfile agent, std::size_t n_tasks,
                                     std::uint64_t seed) {
    ScenarioConfig c;
    c.name = "single";
    c.strategy.kind = StrategyKind::single_agent;
    c.strategy.agent_id = agent.id;
    c.pool = {std::move(agent)};
    c.n_tasks = n_tasks;
    c.seed = seed;
    return c;
}

}  // namespace

TEST_CASE("task generation is deterministic and respects the mix") {
    ScenarioConfig c = single_agent_scenario(
        make_agent("a", 1.0, {0.5, 0.5, 0.5}), 1000, 9);
    c.task_mix.perc_lo = 0.7;
    c.task_mix.perc_hi = 0.95;
    c.task_mix.sem_lo = 0.05;
    c.task_mix.sem_hi = 0.3;
    c.task_mix.inf_lo = 0.05;
    c.task_mix.inf_hi = 0.3;

    const auto first = generate_tasks(c);
    const auto second = generate_tasks(c);
    REQUIRE(first.size() == 1000);
    for (std::size_t i = 0; i < first.size(); ++i) {
        CHECK(first[i].id == second[i].id);
        CHECK(first[i].initial_uncertainty.epistemic ==
              second[i].initial_uncertainty.epistemic);
        CHECK(first[i].feature_vector == second[i].feature_vector);
    }

    double perc = 0.0, sem = 0.0, inf = 0.0;
    for (const auto& t : first) {
        perc += t.initial_uncertainty.epistemic.perc;
        sem += t.initial_uncertainty.epistemic.sem;
        inf += t.initial_uncertainty.epistemic.inf;
    }
    CHECK(perc > sem);
    CHECK(perc > inf);

    c.n_tasks = 0;
    CHECK(generate_tasks(c).empty());
}

TEST_CASE("a perfect zero-residual expert resolves nearly everything") {
    ScenarioConfig c = single_agent_scenario(
        make_agent("oracle", 0.5, {1.0, 1.0, 1.0}), 500, 21);
    const EpisodeReport report = run_episode(c);
    CHECK(report.aggregate.u_final_epis < 0.05);
    CHECK(report.aggregate.accuracy > 0.95);
}

TEST_CASE("correctness model matches its Bernoulli definition") {
    // expertise 0.7 on unit tasks leaves a weighted residual of exactly 0.3
    ScenarioConfig c = single_agent_scenario(
        make_agent("fixed", 1.0, {0.7, 0.7, 0.7}), 10000, 33);
    c.task_mix = TaskMix{1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 0.0, 0.0};
    const EpisodeReport report = run_episode(c);
    CHECK(report.aggregate.u_final_epis == doctest::Approx(0.3).epsilon(1e-9));
    // binomial 3-sigma band around p = 0.7 at n = 10^4
    const double sigma = std::sqrt(0.7 * 0.3 / 10000.0);
    CHECK(report.aggregate.accuracy > 0.7 - 3.0 * sigma);
    CHECK(report.aggregate.accuracy < 0.7 + 3.0 * sigma);
}

TEST_CASE("episodes are a pure function of the scenario config") {
    for (const auto& name : {"default-market", "appendix-e"}) {
        const ScenarioConfig c = bundled_scenario(name);
        const std::string a = episode_report_to_json(run_episode(c));
        const std::string b = episode_report_to_json(run_episode(c));
        CHECK(a == b);
    }
}

TEST_CASE("trading lowers total cost against the no-trading twin") {
    ScenarioConfig enabled = bundled_scenario("default-market");
    enabled.broker.sample_posterior = false;  // hold selection paths fixed
    ScenarioConfig disabled = enabled;
    disabled.max_trades = 0;
    const EpisodeReport on = run_episode(enabled);
    const EpisodeReport off = run_episode(disabled);
    CHECK(on.aggregate.total_trades > 0);
    CHECK(on.aggregate.total_cost < off.aggregate.total_cost);
    CHECK(off.aggregate.total_trades == 0);
    CHECK(off.aggregate.coi == 1.0);
}

TEST_CASE("aggregate metrics follow their definitions") {
    ScenarioConfig c = single_agent_scenario(
        make_agent("solo", 1.0, {0.5, 0.5, 0.5}), 10, 2);
    const EpisodeReport report = run_episode(c);
    CHECK(report.aggregate.coi == 1.0);  // one activation per task

    // independent accounting pass over the rows
    double cost = 0.0, tflops = 0.0, norms = 0.0;
    std::size_t correct = 0;
    for (const auto& r : report.per_task) {
        cost += r.cost;
        tflops += r.tflops;
        norms += r.final_epistemic_norm;
        correct += r.correct ? 1 : 0;
    }
    CHECK(report.aggregate.total_cost == doctest::Approx(cost).epsilon(1e-12));
    CHECK(report.aggregate.total_tflops == tflops);
    CHECK(report.aggregate.accuracy ==
          doctest::Approx(static_cast<double>(correct) / 10.0));
    CHECK(report.aggregate.u_final_epis ==
          doctest::Approx(norms / 10.0).epsilon(1e-12));
    CHECK(report.aggregate.uaps ==
          doctest::Approx(report.aggregate.accuracy *
                          (1.0 - report.aggregate.u_final_epis)));
}

TEST_CASE("cost-performance ratio reproduces the reference arithmetic") {
    ScenarioConfig c = single_agent_scenario(
        make_agent("solo", 1.0, {0.5, 0.5, 0.5}), 1000, 2);
    std::vector<PerTaskRow> rows(1000);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        rows[i].task_id = "t" + std::to_string(i);
        rows[i].selected_agents = {"solo"};
        rows[i].correct = i < 887;
        rows[i].tflops = 5.54;  // 5.54 PFLOPs across 1000 tasks
    }
    const AggregateMetrics m = compute_metrics(rows, c);
    CHECK(m.accuracy == doctest::Approx(0.887));
    CHECK(m.cost_performance_ratio == doctest::Approx(0.0625).epsilon(0.01));

    for (auto& r : rows) r.correct = false;
    const AggregateMetrics zero = compute_metrics(rows, c);
    CHECK(std::isinf(zero.cost_performance_ratio));

    CHECK_THROWS_AS(compute_metrics({}, c), std::invalid_argument);
}

TEST_CASE("identical zero-expertise agents leave nothing to arbitrage") {
    ScenarioConfig c;
    c.name = "degenerate";
    c.pool = {make_agent("a", 2.0, {0.0, 0.0, 0.0}),
              make_agent("b", 2.0, {0.0, 0.0, 0.0})};
    c.n_tasks = 50;
    c.seed = 4;
    c.strategy.kind = StrategyKind::agora;
    const EpisodeReport agora_report = run_episode(c);
    CHECK(agora_report.aggregate.total_trades == 0);

    ScenarioConfig random_c = c;
    random_c.strategy.kind = StrategyKind::random_assignment;
    SyntheticBackend backend(mix_seed(c.seed, hash_str("backend")),
                             c.tokens_per_task);
    const EpisodeReport random_report =
        run_episode(random_c, backend, false);
    CHECK(agora_report.aggregate.total_cost ==
          doctest::Approx(random_report.aggregate.total_cost).epsilon(1e-12));
}

TEST_CASE("reports round-trip through JSON and serialize to CSV") {
    ScenarioConfig c = bundled_scenario("default-market");
    c.n_tasks = 20;
    const EpisodeReport report = run_episode(c);

    const std::string encoded = episode_report_to_json(report);
    const EpisodeReport decoded = episode_report_from_json(encoded);
    CHECK(episode_report_to_json(decoded) == encoded);

    std::ostringstream per_task;
    write_per_task_csv(per_task, report);
    CHECK(per_task.str().rfind("task_id,selected_agents,trades,", 0) == 0);
    std::ostringstream aggregate;
    write_aggregate_csv(aggregate, report);
    CHECK(aggregate.str().rfind("scenario,strategy,seed,accuracy,", 0) == 0);
    std::ostringstream plot;
    write_plot_data(plot, {report});
    CHECK(plot.str().rfind("x,y,series\n", 0) == 0);
}

TEST_CASE("escalation strategies charge every attempt") {
    ScenarioConfig c = bundled_scenario("appendix-e");
    c.n_tasks = 10;
    c.strategy.calibrated_counts = {6, 2, 2};
    const EpisodeReport report = run_episode(c);
    // 10 base attempts on small, 2 on medium, 2 on large
    const double expected =
        10 * 20 * 1.4 + 2 * 20 * 2.8 + 2 * 20 * 15.6;
    CHECK(report.aggregate.total_tflops == doctest::Approx(expected));
    // escalated tasks activate two agents
    CHECK(report.per_task[6].selected_agents.size() == 2);
    CHECK(report.per_task[0].selected_agents.size() == 1);
}

TEST_CASE("raising the trade trigger never increases trade counts") {
    std::size_t previous = SIZE_MAX;
    for (double tau : {0.05, 0.15, 0.25}) {
        std::size_t trades = 0;
        for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
            ScenarioConfig c = bundled_scenario("default-market");
            c.n_tasks = 30;
            c.seed = seed;
            c.market.trade_trigger = tau;
            trades += run_episode(c).aggregate.total_trades;
        }
        CHECK(trades <= previous);
        previous = trades;
    }
}

TEST_CASE("relative cost is normalized against the cost-driven reference") {
    ScenarioConfig c = bundled_scenario("default-market");
    c.n_tasks = 20;
    c.strategy.kind = StrategyKind::random_assignment;
    const EpisodeReport report = run_episode(c);
    CHECK(report.aggregate.relative_cost > 0.0);

    ScenarioConfig agora_c = bundled_scenario("default-market");
    agora_c.n_tasks = 20;
    const EpisodeReport reference = run_episode(agora_c);
    CHECK(report.aggregate.relative_cost ==
          doctest::Approx(report.aggregate.total_cost /
                          reference.aggregate.total_cost));
    CHECK(reference.aggregate.relative_cost == 1.0);
}

TEST_CASE("aleatoric mass never enters the market") {
    ScenarioConfig c = bundled_scenario("default-market");
    c.n_tasks = 25;
    c.task_mix.randomness_signal = 0.4;
    const auto before = generate_tasks(c);
    run_episode(c);
    const auto after = generate_tasks(c);
    for (std::size_t i = 0; i < before.size(); ++i)
        CHECK(before[i].initial_uncertainty.aleatoric ==
              after[i].initial_uncertainty.aleatoric);
}

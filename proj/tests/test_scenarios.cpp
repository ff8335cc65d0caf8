#include <string>

#include <doctest.h>
#include <json.hpp>

#include "agora/harness.hpp"
#include "agora/scenarios.hpp"

using namespace agora;

TEST_CASE("bundled scenarios round-trip through JSON") {
    for (const auto& name : bundled_scenario_names()) {
        const ScenarioConfig config = bundled_scenario(name);
        CHECK(config.valid());
        const std::string encoded = scenario_to_json(config);
        const ScenarioConfig decoded = scenario_from_json(encoded);
        CHECK(scenario_to_json(decoded) == encoded);
        CHECK(decoded.name == config.name);
        CHECK(decoded.pool.size() == config.pool.size());
        CHECK(decoded.n_tasks == config.n_tasks);
        CHECK(decoded.seed == config.seed);
        CHECK(decoded.strategy.kind == config.strategy.kind);
    }
    CHECK_THROWS_AS(bundled_scenario("no-such-scenario"),
                    std::invalid_argument);
}

TEST_CASE("missing required fields are reported by path") {
    nlohmann::json doc =
        nlohmann::json::parse(scenario_to_json(bundled_scenario("default-market")));

    SUBCASE("pool entry without an id") {
        doc["pool"][0].erase("id");
        try {
            scenario_from_json(doc.dump());
            FAIL("expected a parse error");
        } catch (const std::invalid_argument& e) {
            CHECK(std::string(e.what()).find("pool[0]") != std::string::npos);
        }
    }
    SUBCASE("strategy without a kind") {
        doc["strategy"].erase("kind");
        try {
            scenario_from_json(doc.dump());
            FAIL("expected a parse error");
        } catch (const std::invalid_argument& e) {
            CHECK(std::string(e.what()).find("strategy.kind") !=
                  std::string::npos);
        }
    }
    SUBCASE("top-level name missing") {
        doc.erase("name");
        CHECK_THROWS_AS(scenario_from_json(doc.dump()), std::invalid_argument);
    }
    SUBCASE("unparseable input") {
        CHECK_THROWS_AS(scenario_from_json("{{{"), std::invalid_argument);
    }
}

TEST_CASE("semantic validation flags out-of-range values with field names") {
    ScenarioConfig config = bundled_scenario("default-market");

    SUBCASE("weights off the simplex") {
        config.weights.perc = 0.8;  // sums to 1.4
        std::vector<std::string> diags;
        CHECK_FALSE(config.valid(&diags));
        bool mentioned = false;
        for (const auto& d : diags)
            if (d.find("weights") != std::string::npos) mentioned = true;
        CHECK(mentioned);
    }
    SUBCASE("negative unit cost") {
        config.pool[1].unit_cost = -2.0;
        std::vector<std::string> diags;
        CHECK_FALSE(config.valid(&diags));
        bool mentioned = false;
        for (const auto& d : diags)
            if (d.find("pool[1].unit_cost") != std::string::npos)
                mentioned = true;
        CHECK(mentioned);
    }
    SUBCASE("empty pool") {
        config.pool.clear();
        std::vector<std::string> diags;
        CHECK_FALSE(config.valid(&diags));
    }
}

TEST_CASE("defaults are filled in for omitted optional sections") {
    const std::string minimal = R"({
        "schema_version": 1,
        "name": "bare",
        "n_tasks": 5,
        "seed": 3,
        "strategy": {"kind": "random"},
        "pool": [{"id": "only", "unit_cost": 1.0,
                  "expertise": {"perc": 0.5, "sem": 0.5, "inf": 0.5}}]
    })";
    const ScenarioConfig config = scenario_from_json(minimal);
    CHECK(config.valid());
    CHECK(config.tokens_per_task == 20);
    CHECK(config.market.trade_trigger == doctest::Approx(0.15));
    CHECK(config.market.benefit_threshold == doctest::Approx(0.08));
    CHECK(config.broker.gamma_decay == doctest::Approx(0.99));
    CHECK(config.broker.lambda_dist == doctest::Approx(0.2));
    CHECK(config.broker.eta_synergy == doctest::Approx(0.8));
    CHECK(config.broker.omega_strategic == doctest::Approx(1.2));
    CHECK(config.pool[0].transfer_efficiency == 1.0);
    CHECK(config.max_trades == 256);
}

TEST_CASE("a scenario that validates also runs") {
    for (const auto& name : bundled_scenario_names()) {
        ScenarioConfig config = bundled_scenario(name);
        config.n_tasks = 5;
        REQUIRE(config.valid());
        const EpisodeReport report = run_episode(config);
        CHECK(report.per_task.size() == 5);
        CHECK(report.scenario == config.name);
    }
}

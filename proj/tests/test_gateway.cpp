#include <string>

#include <doctest.h>

#include "agora/gateway.hpp"
#include "agora/rng.hpp"

using namespace agora;

namespace {

EvalRequest minimal_request() {
    EvalRequest req;
    req.task_id = "t-1";
    req.feature_vector = {0.2, 0.3, 0.5};
    req.declared_uncertainty = {0.4, 0.1, 0.2};
    return req;
}

EvalResponse minimal_response() {
    EvalResponse resp;
    resp.task_id = "t-1";
    resp.class_probs = {0.6, 0.4};
    resp.outcome_probs = {0.9, 0.1};
    resp.semantic_ambiguities = {{0.5, 0.2}};
    resp.tokens_generated = 20;
    return resp;
}

bool responses_equal(const EvalResponse& a, const EvalResponse& b) {
    return a.task_id == b.task_id && a.class_probs == b.class_probs &&
           a.outcome_probs == b.outcome_probs &&
           a.semantic_ambiguities == b.semantic_ambiguities &&
           a.tokens_generated == b.tokens_generated &&
           a.latency_ms == b.latency_ms;
}

}  // namespace

TEST_CASE("messages round-trip through the wire encoding") {
    const EvalRequest req = minimal_request();
    const EvalRequest decoded_req = decode_request(encode_request(req));
    CHECK(decoded_req.task_id == req.task_id);
    CHECK(decoded_req.feature_vector == req.feature_vector);
    CHECK(decoded_req.declared_uncertainty == req.declared_uncertainty);
    CHECK(decoded_req.deadline_ms == req.deadline_ms);

    const EvalResponse resp = minimal_response();
    CHECK(responses_equal(decode_response(encode_response(resp)), resp));
}

TEST_CASE("wire validation names the offending field") {
    std::string body = encode_response(minimal_response());
    // break the class distribution: [0.6, 0.5]
    const auto pos = body.find("0.4");
    REQUIRE(pos != std::string::npos);
    body.replace(pos, 3, "0.5");
    try {
        decode_response(body);
        FAIL("expected a protocol error");
    } catch (const BackendProtocolError& e) {
        CHECK(std::string(e.what()).find("class_probs") !=
              std::string::npos);
    }

    CHECK_THROWS_AS(decode_response("not json"), BackendProtocolError);
    CHECK_THROWS_AS(decode_request("{\"protocol_version\": 2}"),
                    BackendProtocolError);
}

TEST_CASE("unknown fields are dropped for forward compatibility") {
    std::string body = encode_request(minimal_request());
    body.insert(1, "\"future_extension\": {\"nested\": [1,2,3]},");
    const EvalRequest decoded = decode_request(body);
    CHECK(decoded.task_id == "t-1");
    CHECK(encode_request(decoded) == encode_request(minimal_request()));
}

TEST_CASE("randomized messages survive the round-trip") {
    Rng rng = make_rng(777);
    for (int i = 0; i < 10000; ++i) {
        EvalResponse resp;
        resp.task_id = "task-" + std::to_string(rng() % 100000);
        const std::size_t k = 2 + rng() % 6;
        double sum = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            resp.class_probs.push_back(uniform01(rng) + 1e-6);
            sum += resp.class_probs.back();
        }
        for (auto& p : resp.class_probs) p /= sum;
        resp.outcome_probs = resp.class_probs;
        resp.semantic_ambiguities = {{uniform01(rng), uniform01(rng)}};
        resp.tokens_generated = static_cast<int>(rng() % 100);
        resp.latency_ms = static_cast<int>(rng() % 1000);
        CHECK(responses_equal(decode_response(encode_response(resp)), resp));
    }
}

namespace {

// scripted transport: a fixed sequence of outcomes, then success
struct ScriptedTransport {
    std::vector<HttpResult> script;
    std::string success_body;
    int calls = 0;

    HttpResult operator()(const std::string&, int) {
        const int idx = calls++;
        if (idx < static_cast<int>(script.size())) return script[idx];
        return HttpResult{false, 200, success_body};
    }
};

RetryPolicy fast_policy(int max_retries) {
    RetryPolicy p;
    p.max_retries = max_retries;
    p.sleep_between_attempts = false;
    return p;
}

}  // namespace

TEST_CASE("remote evaluation honors the retry budget") {
    const std::string ok = encode_response(minimal_response());

    SUBCASE("immediate success takes one attempt") {
        ScriptedTransport t{{}, ok};
        int attempts = 0;
        const EvalResponse resp = remote_evaluate(
            std::ref(t), minimal_request(), fast_policy(3), &attempts);
        CHECK(attempts == 1);
        CHECK(resp.task_id == "t-1");
    }
    SUBCASE("two transport failures then success") {
        ScriptedTransport t{{HttpResult{true, 0, ""},
                             HttpResult{false, 503, ""}},
                            ok};
        int attempts = 0;
        remote_evaluate(std::ref(t), minimal_request(), fast_policy(3),
                        &attempts);
        CHECK(attempts == 3);
    }
    SUBCASE("4xx is fatal on the first attempt") {
        ScriptedTransport t{{HttpResult{false, 400, "{}"}}, ok};
        int attempts = 0;
        CHECK_THROWS_AS(remote_evaluate(std::ref(t), minimal_request(),
                                        fast_policy(3), &attempts),
                        BackendProtocolError);
        CHECK(attempts == 1);
    }
    SUBCASE("the budget is never exceeded") {
        Rng rng = make_rng(4242);
        for (int trial = 0; trial < 200; ++trial) {
            const int max_retries = static_cast<int>(rng() % 4);
            const int failures = static_cast<int>(rng() % 6);
            ScriptedTransport t;
            t.success_body = ok;
            for (int i = 0; i < failures; ++i)
                t.script.push_back(rng() % 2 == 0
                                       ? HttpResult{true, 0, ""}
                                       : HttpResult{false, 500, ""});
            int attempts = 0;
            try {
                remote_evaluate(std::ref(t), minimal_request(),
                                fast_policy(max_retries), &attempts);
                CHECK(failures < 1 + max_retries);
            } catch (const BackendTransportError&) {
                CHECK(failures >= 1 + max_retries);
            }
            CHECK(attempts <= 1 + max_retries);
            CHECK(t.calls == attempts);
        }
    }
    SUBCASE("a response for the wrong task is a protocol violation") {
        EvalResponse other = minimal_response();
        other.task_id = "different";
        ScriptedTransport t{{}, encode_response(other)};
        CHECK_THROWS_AS(remote_evaluate(std::ref(t), minimal_request(),
                                        fast_policy(0)),
                        BackendProtocolError);
    }
}

TEST_CASE("the loopback server serves the synthetic model bit-exactly") {
    AgentProfile agent;
    agent.id = "served";
    agent.unit_cost = 1.0;
    agent.expertise = {0.6, 0.4, 0.8};

    const std::uint64_t seed = 31337;
    LoopbackServer server(agent, seed, 20);
    GatewayBackend remote({{agent.id, server.base_url()}},
                          fast_policy(2));
    SyntheticBackend local(seed, 20);

    for (int i = 0; i < 10; ++i) {
        TaskInstance task;
        task.id = "loop-task-" + std::to_string(i);
        task.initial_uncertainty.epistemic = {0.5, 0.2, 0.7};
        task.feature_vector = {0.3, 0.3, 0.4};
        const AgentResponse via_http = remote.evaluate(agent, task);
        const AgentResponse direct = local.evaluate(agent, task);
        CHECK(via_http.class_probs == direct.class_probs);
        CHECK(via_http.outcome_probs == direct.outcome_probs);
        CHECK(via_http.semantic_ambiguities == direct.semantic_ambiguities);
        CHECK(via_http.tokens_generated == direct.tokens_generated);
    }
}

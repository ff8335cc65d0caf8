#include "agora/gateway.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "agora/rng.hpp"

namespace agora {

namespace {

using nlohmann::json;

void check_simplex(const std::vector<double>& p, const char* field) {
    if (p.empty())
        throw BackendProtocolError(std::string(field) + ": must be nonempty");
    double sum = 0.0;
    for (double v : p) {
        if (v < 0.0)
            throw BackendProtocolError(std::string(field) +
                                       ": negative probability");
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-6)
        throw BackendProtocolError(std::string(field) +
                                   ": probabilities must sum to 1");
}

json parse_body(const std::string& body) {
    json doc = json::parse(body, nullptr, false);
    if (doc.is_discarded()) throw BackendProtocolError("malformed JSON body");
    return doc;
}

}  // namespace

void validate_request(const EvalRequest& req) {
    if (req.protocol_version != kProtocolVersion)
        throw BackendProtocolError("protocol_version: unsupported version");
    if (req.task_id.empty())
        throw BackendProtocolError("task_id: must be nonempty");
    if (req.deadline_ms <= 0)
        throw BackendProtocolError("deadline_ms: must be > 0");
    for (Dim d : kAllDims)
        if (req.declared_uncertainty[d] < 0.0)
            throw BackendProtocolError(
                "declared_uncertainty: components must be >= 0");
}

void validate_response(const EvalResponse& resp) {
    if (resp.task_id.empty())
        throw BackendProtocolError("task_id: must be nonempty");
    check_simplex(resp.class_probs, "class_probs");
    check_simplex(resp.outcome_probs, "outcome_probs");
    for (const auto& [w, a] : resp.semantic_ambiguities)
        if (w < 0.0 || a < 0.0)
            throw BackendProtocolError(
                "semantic_ambiguities: entries must be >= 0");
    if (resp.tokens_generated < 0)
        throw BackendProtocolError("tokens_generated: must be >= 0");
    if (resp.latency_ms < 0)
        throw BackendProtocolError("latency_ms: must be >= 0");
}

std::string encode_request(const EvalRequest& req) {
    validate_request(req);
    json doc = {
        {"protocol_version", req.protocol_version},
        {"task_id", req.task_id},
        {"feature_vector", req.feature_vector},
        {"declared_uncertainty",
         {{"perc", req.declared_uncertainty.perc},
          {"sem", req.declared_uncertainty.sem},
          {"inf", req.declared_uncertainty.inf}}},
        {"deadline_ms", req.deadline_ms},
    };
    if (!req.prompt_text.empty()) doc["prompt_text"] = req.prompt_text;
    return doc.dump();
}

EvalRequest decode_request(const std::string& body) {
    const json doc = parse_body(body);
    EvalRequest req;
    try {
        req.protocol_version = doc.at("protocol_version").get<int>();
        req.task_id = doc.at("task_id").get<std::string>();
        req.feature_vector =
            doc.at("feature_vector").get<std::vector<double>>();
        const json& u = doc.at("declared_uncertainty");
        req.declared_uncertainty.perc = u.at("perc").get<double>();
        req.declared_uncertainty.sem = u.at("sem").get<double>();
        req.declared_uncertainty.inf = u.at("inf").get<double>();
        req.deadline_ms = doc.at("deadline_ms").get<int>();
        if (doc.contains("prompt_text"))
            req.prompt_text = doc.at("prompt_text").get<std::string>();
    } catch (const json::exception& e) {
        throw BackendProtocolError(std::string("request decode: ") + e.what());
    }
    validate_request(req);
    return req;
}

std::string encode_response(const EvalResponse& resp) {
    validate_response(resp);
    json ambiguities = json::array();
    for (const auto& [w, a] : resp.semantic_ambiguities)
        ambiguities.push_back({w, a});
    json doc = {
        {"task_id", resp.task_id},
        {"class_probs", resp.class_probs},
        {"outcome_probs", resp.outcome_probs},
        {"semantic_ambiguities", ambiguities},
        {"tokens_generated", resp.tokens_generated},
        {"latency_ms", resp.latency_ms},
    };
    return doc.dump();
}

EvalResponse decode_response(const std::string& body) {
    const json doc = parse_body(body);
    EvalResponse resp;
    try {
        resp.task_id = doc.at("task_id").get<std::string>();
        resp.class_probs = doc.at("class_probs").get<std::vector<double>>();
        resp.outcome_probs =
            doc.at("outcome_probs").get<std::vector<double>>();
        for (const auto& pair : doc.at("semantic_ambiguities")) {
            if (!pair.is_array() || pair.size() != 2)
                throw BackendProtocolError(
                    "semantic_ambiguities: expected [weight, ambiguity]");
            resp.semantic_ambiguities.emplace_back(pair[0].get<double>(),
                                                   pair[1].get<double>());
        }
        resp.tokens_generated = doc.at("tokens_generated").get<int>();
        resp.latency_ms = doc.at("latency_ms").get<int>();
    } catch (const json::exception& e) {
        throw BackendProtocolError(std::string("response decode: ") +
                                   e.what());
    }
    validate_response(resp);
    return resp;
}

EvalResponse remote_evaluate(const Transport& transport,
                             const EvalRequest& request,
                             const RetryPolicy& policy, int* attempts_out) {
    const std::string body = encode_request(request);
    Rng jitter = make_rng(
        mix_seed(policy.jitter_seed, hash_str(request.task_id)));
    std::string last_error = "no attempts made";
    const int max_attempts = 1 + std::max(0, policy.max_retries);
    int attempts = 0;
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        if (attempt > 0 && policy.sleep_between_attempts) {
            const double backoff =
                policy.base_backoff_ms *
                std::pow(policy.backoff_multiplier, attempt - 1) *
                (0.5 + uniform01(jitter));
            std::this_thread::sleep_for(std::chrono::milliseconds(
                static_cast<long long>(backoff)));
        }
        ++attempts;
        const HttpResult result = transport(body, policy.timeout_ms);
        if (result.transport_error) {
            last_error = "transport failure";
            continue;  // retryable
        }
        if (result.status >= 500) {
            last_error = "server error " + std::to_string(result.status);
            continue;  // retryable
        }
        if (attempts_out) *attempts_out = attempts;
        if (result.status < 200 || result.status >= 300)
            throw BackendProtocolError("endpoint returned status " +
                                       std::to_string(result.status));
        EvalResponse resp = decode_response(result.body);
        if (resp.task_id != request.task_id)
            throw BackendProtocolError("task_id: response does not echo request");
        return resp;
    }
    if (attempts_out) *attempts_out = attempts;
    throw BackendTransportError("retries exhausted: " + last_error);
}

Transport make_http_transport(const std::string& base_url) {
    return [base_url](const std::string& body, int timeout_ms) -> HttpResult {
        httplib::Client client(base_url);
        client.set_connection_timeout(timeout_ms / 1000,
                                      (timeout_ms % 1000) * 1000);
        client.set_read_timeout(timeout_ms / 1000, (timeout_ms % 1000) * 1000);
        auto res = client.Post("/v1/evaluate", body, "application/json");
        if (!res) return HttpResult{true, 0, {}};
        return HttpResult{false, res->status, res->body};
    };
}

GatewayBackend::GatewayBackend(
    std::map<std::string, std::string> endpoints_by_agent, RetryPolicy policy)
    : endpoints_(std::move(endpoints_by_agent)), policy_(policy) {
    for (const auto& [id, url] : endpoints_)
        transports_[id] = make_http_transport(url);
}

AgentResponse GatewayBackend::evaluate(const AgentProfile& agent,
                                       const TaskInstance& task) {
    auto it = transports_.find(agent.id);
    if (it == transports_.end())
        throw BackendProtocolError("no endpoint configured for agent " +
                                   agent.id);
    EvalRequest req;
    req.task_id = task.id;
    req.feature_vector = task.feature_vector;
    req.declared_uncertainty = task.initial_uncertainty.epistemic;
    req.deadline_ms = policy_.timeout_ms;
    const EvalResponse resp = remote_evaluate(it->second, req, policy_);
    AgentResponse out;
    out.class_probs = resp.class_probs;
    out.outcome_probs = resp.outcome_probs;
    out.semantic_ambiguities = resp.semantic_ambiguities;
    out.tokens_generated = resp.tokens_generated;
    return out;
}

struct LoopbackServer::Impl {
    AgentProfile agent;
    SyntheticBackend backend;
    httplib::Server server;
    std::thread worker;
    int port = 0;

    Impl(AgentProfile a, std::uint64_t seed, int tokens)
        : agent(std::move(a)), backend(seed, tokens) {}
};

LoopbackServer::LoopbackServer(AgentProfile agent, std::uint64_t backend_seed,
                               int tokens_per_task)
    : impl_(std::make_unique<Impl>(std::move(agent), backend_seed,
                                   tokens_per_task)) {
    Impl* impl = impl_.get();
    impl->server.Post(
        "/v1/evaluate",
        [impl](const httplib::Request& req, httplib::Response& res) {
            try {
                const EvalRequest in = decode_request(req.body);
                TaskInstance task;
                task.id = in.task_id;
                task.initial_uncertainty.epistemic = in.declared_uncertainty;
                task.feature_vector = in.feature_vector;
                const AgentResponse out =
                    impl->backend.evaluate(impl->agent, task);
                EvalResponse resp;
                resp.task_id = in.task_id;
                resp.class_probs = out.class_probs;
                resp.outcome_probs = out.outcome_probs;
                resp.semantic_ambiguities = out.semantic_ambiguities;
                resp.tokens_generated = out.tokens_generated;
                resp.latency_ms = 0;
                res.set_content(encode_response(resp), "application/json");
            } catch (const BackendProtocolError& e) {
                res.status = 400;
                res.set_content(json{{"code", 400}, {"message", e.what()}}
                                    .dump(),
                                "application/json");
            } catch (const std::exception& e) {
                res.status = 500;
                res.set_content(json{{"code", 500}, {"message", e.what()}}
                                    .dump(),
                                "application/json");
            }
        });
    impl_->port = impl_->server.bind_to_any_port("127.0.0.1");
    if (impl_->port <= 0)
        throw BackendTransportError("loopback server failed to bind");
    impl_->worker = std::thread([impl] { impl->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
}

LoopbackServer::~LoopbackServer() {
    impl_->server.stop();
    if (impl_->worker.joinable()) impl_->worker.join();
}

int LoopbackServer::port() const { return impl_->port; }

std::string LoopbackServer::base_url() const {
    return "http://127.0.0.1:" + std::to_string(impl_->port);
}

}  // namespace agora

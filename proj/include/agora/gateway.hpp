#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "agora/agents.hpp"
#include "agora/uncertainty.hpp"

namespace agora {

inline constexpr int kProtocolVersion = 1;

struct EvalRequest {
    int protocol_version = kProtocolVersion;
    std::string task_id;
    std::vector<double> feature_vector;
    UncertaintyVector declared_uncertainty;
    std::string prompt_text;  // optional; empty means absent
    int deadline_ms = 30000;
};

struct EvalResponse {
    std::string task_id;
    std::vector<double> class_probs;
    std::vector<double> outcome_probs;
    std::vector<std::pair<double, double>> semantic_ambiguities;
    int tokens_generated = 0;
    int latency_ms = 0;
};

// UTF-8 JSON encoding, one object per body. Decoding ignores unknown fields;
// malformed JSON or invariant violations raise BackendProtocolError naming
// the offending field.
std::string encode_request(const EvalRequest& req);
EvalRequest decode_request(const std::string& body);
std::string encode_response(const EvalResponse& resp);
EvalResponse decode_response(const std::string& body);

void validate_request(const EvalRequest& req);
void validate_response(const EvalResponse& resp);

struct RetryPolicy {
    int max_retries = 2;
    int base_backoff_ms = 100;
    double backoff_multiplier = 2.0;
    std::uint64_t jitter_seed = 0;
    int timeout_ms = 30000;
    bool sleep_between_attempts = true;  // tests turn real sleeping off
};

// One HTTP exchange as the retry loop sees it.
struct HttpResult {
    bool transport_error = false;  // connect/timeout class failures
    int status = 0;
    std::string body;
};

using Transport =
    std::function<HttpResult(const std::string& body, int timeout_ms)>;

// POSTs the encoded request, retrying transport failures and 5xx with
// exponential backoff and seeded jitter. 4xx and validation failures are
// fatal. At most (1 + max_retries) attempts; attempts_out reports the count.
EvalResponse remote_evaluate(const Transport& transport,
                             const EvalRequest& request,
                             const RetryPolicy& policy,
                             int* attempts_out = nullptr);

// HTTP/1.1 transport for POST <base_url>/v1/evaluate.
Transport make_http_transport(const std::string& base_url);

// Backend that forwards evaluations to per-agent remote endpoints.
class GatewayBackend : public Backend {
  public:
    GatewayBackend(std::map<std::string, std::string> endpoints_by_agent,
                   RetryPolicy policy = {});

    AgentResponse evaluate(const AgentProfile& agent,
                           const TaskInstance& task) override;

  private:
    std::map<std::string, std::string> endpoints_;
    std::map<std::string, Transport> transports_;
    RetryPolicy policy_;
};

// In-process HTTP server exposing one synthetic agent at /v1/evaluate, used
// for loopback end-to-end runs and tests.
class LoopbackServer {
  public:
    LoopbackServer(AgentProfile agent, std::uint64_t backend_seed,
                   int tokens_per_task);
    ~LoopbackServer();

    LoopbackServer(const LoopbackServer&) = delete;
    LoopbackServer& operator=(const LoopbackServer&) = delete;

    int port() const;
    std::string base_url() const;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace agora

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

#include "chase/transcript_cache.hpp"

namespace chase {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct TransportError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Role { generator, verifier, judge, solver };
std::string role_name(Role r);

struct ModelEndpoint {
    std::string provider_id;
    std::string model_name;
    std::string base_url;
    std::string credential_env;  // name of the env var, never the key itself

    bool operator==(const ModelEndpoint&) const = default;
};

struct ChatRequest {
    std::string system_text;
    std::string user_text;
    double temperature = 0.0;
    int max_tokens = 1024;
    Role role_tag = Role::generator;
    // Distinguishes repeated samples of an otherwise identical request so
    // each draw gets its own transcript-cache slot. Never sent over the wire.
    std::string sample_tag;
};

enum class FinishReason { stop, length, error };

struct ChatResponse {
    std::string text;
    FinishReason finish_reason = FinishReason::stop;
    std::int64_t latency_ms = 0;
};

// Role -> endpoint binding; distinct roles may share an endpoint.
struct RoleBindings {
    std::map<std::string, ModelEndpoint> by_role;  // keyed by role_name
};

const ModelEndpoint& resolve_role(const RoleBindings& bindings, Role role);

// 256-bit digest over the canonical serialization: fields in fixed order,
// CRLF normalized to LF. Equal requests to the same model yield equal
// digests regardless of construction order; distinct models never share a
// slot. The endpoint's base_url and credential_env are excluded so a cache
// recorded against one deployment replays against another.
std::string cache_key(const ModelEndpoint& endpoint, const ChatRequest& request);

class Transport {
public:
    virtual ~Transport() = default;
    virtual ChatResponse send(const ModelEndpoint& endpoint, const ChatRequest& request) = 0;
};

// OpenAI-style chat-completions POST. Reads the credential from the
// environment at call time; the value is never stored.
std::unique_ptr<Transport> make_http_transport();

struct RetryPolicy {
    int max_attempts = 5;
    std::int64_t base_delay_ms = 1000;
    double factor = 2.0;
};

// Shared entry point for every model call: consults the transcript cache
// per its mode, rate-limits live calls per endpoint (token bucket, default
// 4 in flight), and retries transient transport failures with exponential
// backoff.
class ProviderClient {
public:
    ProviderClient(TranscriptCache& cache, Transport* transport,
                   RetryPolicy retry = {}, int max_in_flight = 4);

    ChatResponse complete(const ModelEndpoint& endpoint, const ChatRequest& request);

private:
    TranscriptCache& cache_;
    Transport* transport_;
    RetryPolicy retry_;
    int max_in_flight_;
    struct Impl;
    std::shared_ptr<Impl> impl_;
};

}  // namespace chase

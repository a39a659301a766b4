#include "chase/provider.hpp"

#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <mutex>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "chase/digest.hpp"

namespace chase {

std::string role_name(Role r) {
    switch (r) {
        case Role::generator: return "generator";
        case Role::verifier: return "verifier";
        case Role::judge: return "judge";
        case Role::solver: return "solver";
    }
    return "?";
}

const ModelEndpoint& resolve_role(const RoleBindings& bindings, Role role) {
    auto it = bindings.by_role.find(role_name(role));
    if (it == bindings.by_role.end())
        throw ConfigError("no model endpoint bound for role '" + role_name(role) + "'");
    return it->second;
}

namespace {

std::string normalize_newlines(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '\r' && i + 1 < s.size() && s[i + 1] == '\n') continue;
        out.push_back(s[i] == '\r' ? '\n' : s[i]);
    }
    return out;
}

}  // namespace

std::string cache_key(const ModelEndpoint& endpoint, const ChatRequest& request) {
    // Canonical serialization: fixed field order, length-prefixed strings
    // so that field boundaries cannot be confused.
    std::string sys = normalize_newlines(request.system_text);
    std::string usr = normalize_newlines(request.user_text);
    std::string canon;
    auto field = [&canon](const std::string& name, const std::string& value) {
        canon += name;
        canon += '=';
        canon += std::to_string(value.size());
        canon += ':';
        canon += value;
        canon += '\x1e';
    };
    field("provider", endpoint.provider_id);
    field("model", endpoint.model_name);
    field("system", sys);
    field("user", usr);
    char temp[64];
    std::snprintf(temp, sizeof temp, "%.6f", request.temperature);
    field("temperature", temp);
    field("max_tokens", std::to_string(request.max_tokens));
    field("role", role_name(request.role_tag));
    field("sample_tag", request.sample_tag);
    return sha256_hex(canon);
}

// --- HTTP transport -------------------------------------------------------

namespace {

class HttpTransport final : public Transport {
public:
    ChatResponse send(const ModelEndpoint& endpoint, const ChatRequest& request) override {
        const char* key = nullptr;
        if (!endpoint.credential_env.empty()) {
            key = std::getenv(endpoint.credential_env.c_str());
            if (!key)
                throw ConfigError("credential environment variable not set: " +
                                  endpoint.credential_env);
        }
        nlohmann::json body{
            {"model", endpoint.model_name},
            {"max_tokens", request.max_tokens},
            {"temperature", request.temperature},
            {"messages",
             nlohmann::json::array({{{"role", "system"}, {"content", request.system_text}},
                                    {{"role", "user"}, {"content", request.user_text}}})}};

        auto start = std::chrono::steady_clock::now();
        httplib::Client cli(endpoint.base_url);
        cli.set_read_timeout(120, 0);
        httplib::Headers headers;
        if (key) headers.emplace("Authorization", std::string("Bearer ") + key);
        auto res = cli.Post("/v1/chat/completions", headers, body.dump(), "application/json");
        auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::steady_clock::now() - start)
                      .count();
        if (!res)
            throw TransportError("no response from " + endpoint.base_url);
        if (res->status >= 500 || res->status == 429)
            throw TransportError("transient HTTP " + std::to_string(res->status));
        if (res->status != 200)
            throw ConfigError("HTTP " + std::to_string(res->status) + ": " + res->body);

        nlohmann::json j = nlohmann::json::parse(res->body);
        const auto& choice = j.at("choices").at(0);
        ChatResponse out;
        out.text = choice.at("message").at("content").get<std::string>();
        std::string fr = choice.value("finish_reason", "stop");
        out.finish_reason = fr == "length" ? FinishReason::length : FinishReason::stop;
        out.latency_ms = ms;
        return out;
    }
};

}  // namespace

std::unique_ptr<Transport> make_http_transport() {
    return std::make_unique<HttpTransport>();
}

// --- ProviderClient -------------------------------------------------------

struct ProviderClient::Impl {
    std::mutex mu;
    std::condition_variable cv;
    std::map<std::string, int> in_flight;  // per endpoint key
};

ProviderClient::ProviderClient(TranscriptCache& cache, Transport* transport, RetryPolicy retry,
                               int max_in_flight)
    : cache_(cache),
      transport_(transport),
      retry_(retry),
      max_in_flight_(max_in_flight),
      impl_(std::make_shared<Impl>()) {}

ChatResponse ProviderClient::complete(const ModelEndpoint& endpoint, const ChatRequest& request) {
    if (request.user_text.empty()) throw ConfigError("chat request with empty user_text");
    if (request.max_tokens < 1) throw ConfigError("max_tokens must be >= 1");

    const std::string digest = cache_key(endpoint, request);

    if (cache_.mode() != CacheMode::passthrough) {
        if (auto hit = cache_.lookup(digest)) {
            ChatResponse r;
            r.text = hit->text;
            r.finish_reason = static_cast<FinishReason>(hit->finish_reason);
            r.latency_ms = hit->latency_ms;
            return r;
        }
        if (cache_.mode() == CacheMode::replay) throw CacheMissError(digest);
    }
    if (transport_ == nullptr)
        throw ConfigError("live model call requested but no transport is configured");

    // Live call, rate-limited per endpoint.
    const std::string ep_key = endpoint.provider_id + "/" + endpoint.model_name;
    {
        std::unique_lock<std::mutex> lock(impl_->mu);
        impl_->cv.wait(lock, [&] { return impl_->in_flight[ep_key] < max_in_flight_; });
        ++impl_->in_flight[ep_key];
    }
    struct Release {
        Impl* impl;
        const std::string& key;
        ~Release() {
            std::lock_guard<std::mutex> lock(impl->mu);
            --impl->in_flight[key];
            impl->cv.notify_one();
        }
    } release{impl_.get(), ep_key};

    std::int64_t delay = retry_.base_delay_ms;
    for (int attempt = 1;; ++attempt) {
        try {
            ChatResponse r = transport_->send(endpoint, request);
            if (cache_.mode() == CacheMode::record) {
                cache_.store(digest, {r.text, static_cast<int>(r.finish_reason), r.latency_ms});
            }
            return r;
        } catch (const TransportError&) {
            if (attempt >= retry_.max_attempts) throw;
            std::this_thread::sleep_for(std::chrono::milliseconds(delay));
            delay = static_cast<std::int64_t>(delay * retry_.factor);
        }
    }
}

}  // namespace chase

#include "chase/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace chase {

using nlohmann::json;

std::string cache_mode_name(CacheMode m) {
    switch (m) {
        case CacheMode::record: return "record";
        case CacheMode::replay: return "replay";
        case CacheMode::passthrough: return "passthrough";
    }
    return "replay";
}

CacheMode cache_mode_from_name(const std::string& name) {
    if (name == "record") return CacheMode::record;
    if (name == "replay") return CacheMode::replay;
    if (name == "passthrough") return CacheMode::passthrough;
    throw ConfigError("unknown cache mode: " + name);
}

namespace {

ModelEndpoint endpoint_from_json(const json& j) {
    ModelEndpoint e;
    e.provider_id = j.value("provider_id", "");
    e.model_name = j.value("model_name", "");
    e.base_url = j.value("base_url", "");
    e.credential_env = j.value("credential_env", "");
    return e;
}

json endpoint_to_json(const ModelEndpoint& e) {
    return json{{"provider_id", e.provider_id},
                {"model_name", e.model_name},
                {"base_url", e.base_url},
                {"credential_env", e.credential_env}};
}

}  // namespace

RunConfig RunConfig::from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    RunConfig c;
    if (j.contains("roles")) {
        for (auto& [role, ep] : j.at("roles").items()) {
            c.roles.by_role[role] = endpoint_from_json(ep);
        }
    }
    for (const auto& ep : j.value("verifier_ensemble", json::array())) {
        c.verifier_ensemble.push_back(endpoint_from_json(ep));
    }
    if (j.contains("params")) {
        const json& p = j.at("params");
        auto& q = c.params;
        q.n_helpers_sampled = p.value("n_helpers_sampled", q.n_helpers_sampled);
        q.k_min_relevant = p.value("k_min_relevant", q.k_min_relevant);
        q.m_irrelevant_functions = p.value("m_irrelevant_functions", q.m_irrelevant_functions);
        q.repo_file_count = p.value("repo_file_count", q.repo_file_count);
        q.irrelevant_qa_count = p.value("irrelevant_qa_count", q.irrelevant_qa_count);
        q.qa_pairs_per_scenario = p.value("qa_pairs_per_scenario", q.qa_pairs_per_scenario);
        q.depth_min = p.value("depth_min", q.depth_min);
        q.depth_max = p.value("depth_max", q.depth_max);
        q.continuation_iters = p.value("continuation_iters", q.continuation_iters);
        q.passes = p.value("passes", q.passes);
        q.test_code_attempts = p.value("test_code_attempts", q.test_code_attempts);
        q.reject_trials_t = p.value("reject_trials_t", q.reject_trials_t);
        q.reject_fraction_f = p.value("reject_fraction_f", q.reject_fraction_f);
        q.stage_retry_budget = p.value("stage_retry_budget", q.stage_retry_budget);
        q.rng_seed = p.value("rng_seed", q.rng_seed);
    }
    c.cache_mode = cache_mode_from_name(j.value("cache_mode", "replay"));
    c.cache_dir = j.value("cache_dir", c.cache_dir);
    if (j.contains("sandbox")) {
        const json& s = j.at("sandbox");
        c.sandbox.interpreter = s.value("interpreter", c.sandbox.interpreter);
        c.sandbox.source_extension = s.value("source_extension", c.sandbox.source_extension);
        c.sandbox.wall_ms = s.value("wall_ms", c.sandbox.wall_ms);
        c.sandbox.keep_workspaces = s.value("keep_workspaces", c.sandbox.keep_workspaces);
    }
    c.prompt_dir = j.value("prompt_dir", c.prompt_dir);
    c.output_dir = j.value("output_dir", c.output_dir);
    c.generator_temperature = j.value("generator_temperature", c.generator_temperature);
    c.generator_max_tokens = j.value("generator_max_tokens", c.generator_max_tokens);
    c.solver_temperature = j.value("solver_temperature", c.solver_temperature);
    c.solver_max_tokens = j.value("solver_max_tokens", c.solver_max_tokens);
    return c;
}

RunConfig RunConfig::load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str());
}

std::string RunConfig::to_json_text() const {
    json roles_j = json::object();
    for (const auto& [role, ep] : roles.by_role) roles_j[role] = endpoint_to_json(ep);
    json ensemble_j = json::array();
    for (const auto& ep : verifier_ensemble) ensemble_j.push_back(endpoint_to_json(ep));
    json j{
        {"roles", roles_j},
        {"verifier_ensemble", ensemble_j},
        {"params",
         {{"n_helpers_sampled", params.n_helpers_sampled},
          {"k_min_relevant", params.k_min_relevant},
          {"m_irrelevant_functions", params.m_irrelevant_functions},
          {"repo_file_count", params.repo_file_count},
          {"irrelevant_qa_count", params.irrelevant_qa_count},
          {"qa_pairs_per_scenario", params.qa_pairs_per_scenario},
          {"depth_min", params.depth_min},
          {"depth_max", params.depth_max},
          {"continuation_iters", params.continuation_iters},
          {"passes", params.passes},
          {"test_code_attempts", params.test_code_attempts},
          {"reject_trials_t", params.reject_trials_t},
          {"reject_fraction_f", params.reject_fraction_f},
          {"stage_retry_budget", params.stage_retry_budget},
          {"rng_seed", params.rng_seed}}},
        {"cache_mode", cache_mode_name(cache_mode)},
        {"cache_dir", cache_dir},
        {"sandbox",
         {{"interpreter", sandbox.interpreter},
          {"source_extension", sandbox.source_extension},
          {"wall_ms", sandbox.wall_ms},
          {"keep_workspaces", sandbox.keep_workspaces}}},
        {"prompt_dir", prompt_dir},
        {"output_dir", output_dir},
        {"generator_temperature", generator_temperature},
        {"generator_max_tokens", generator_max_tokens},
        {"solver_temperature", solver_temperature},
        {"solver_max_tokens", solver_max_tokens},
    };
    return j.dump(2) + "\n";
}

void RunConfig::validate(bool live) const {
    try {
        params.validate();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("pipeline params: ") + e.what());
    }
    for (const auto& [role, ep] : roles.by_role) {
        if (ep.model_name.empty()) throw ConfigError("role '" + role + "' has no model_name");
        if (live) {
            if (ep.base_url.empty()) throw ConfigError("role '" + role + "' has no base_url");
            if (ep.credential_env.empty())
                throw ConfigError("role '" + role + "' has no credential_env");
            if (std::getenv(ep.credential_env.c_str()) == nullptr)
                throw ConfigError("credential environment variable not set: " + ep.credential_env);
        }
    }
    for (const auto& ep : verifier_ensemble) {
        if (ep.model_name.empty()) throw ConfigError("verifier ensemble entry has no model_name");
        if (live && std::getenv(ep.credential_env.c_str()) == nullptr)
            throw ConfigError("credential environment variable not set: " + ep.credential_env);
    }
    if (cache_dir.empty()) throw ConfigError("cache_dir is empty");
    if (prompt_dir.empty()) throw ConfigError("prompt_dir is empty");
    if (sandbox.interpreter.empty()) throw ConfigError("sandbox interpreter is empty");
    if (sandbox.wall_ms <= 0) throw ConfigError("sandbox wall_ms must be positive");
    if (generator_temperature < 0 || solver_temperature < 0)
        throw ConfigError("temperatures must be non-negative");
    if (generator_max_tokens <= 0 || solver_max_tokens <= 0)
        throw ConfigError("max_tokens must be positive");
}

std::vector<ModelEndpoint> RunConfig::math_verifiers() const {
    if (!verifier_ensemble.empty()) return verifier_ensemble;
    return {resolve_role(roles, Role::verifier)};
}

}  // namespace chase

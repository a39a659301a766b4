#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "chase/pipeline.hpp"
#include "chase/provider.hpp"
#include "chase/transcript_cache.hpp"

namespace chase {

struct SandboxConfig {
    std::string interpreter = "python3";
    std::string source_extension = ".py";
    std::int64_t wall_ms = 10000;
    bool keep_workspaces = false;
};

// Everything a run needs, loaded once and validated before any stage
// executes. Credentials are referenced by environment-variable name only;
// the serialized form never contains a key value.
struct RunConfig {
    RoleBindings roles;
    // Ensemble used by chase-math verification; falls back to the single
    // "verifier" role binding when empty.
    std::vector<ModelEndpoint> verifier_ensemble;
    PipelineParams params;
    CacheMode cache_mode = CacheMode::replay;
    std::string cache_dir = "cache";
    SandboxConfig sandbox;
    std::string prompt_dir = "prompts";
    std::string output_dir = "runs";
    double generator_temperature = 0.8;
    int generator_max_tokens = 4096;
    double solver_temperature = 0.5;
    int solver_max_tokens = 1024;

    static RunConfig from_json_text(const std::string& text);
    static RunConfig load_file(const std::string& path);
    std::string to_json_text() const;

    // Throws ConfigError on structural problems. When `live` is set, also
    // requires every bound credential_env variable to be present in the
    // environment (the value itself is never read into the config).
    void validate(bool live) const;

    std::vector<ModelEndpoint> math_verifiers() const;
};

std::string cache_mode_name(CacheMode m);
CacheMode cache_mode_from_name(const std::string& name);

}  // namespace chase

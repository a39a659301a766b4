#pragma once

// Deterministic stand-in transport for exercising the pipelines without a
// live model. Every handler parses the incoming prompt and synthesizes a
// response in the exact format the pipeline parsers expect; verifier-style
// prompts are answered by genuinely checking the property in question
// (substring presence, arithmetic folds, offset bookkeeping) rather than by
// returning canned verdicts.

#include <cstdint>
#include <map>
#include <string>

#include "chase/config.hpp"
#include "chase/promptkit.hpp"
#include "chase/provider.hpp"

namespace testsupport {

std::uint64_t fnv64(const std::string& s);
std::string hex8(std::uint64_t v);

// Self-deleting unique temp directory.
class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

// Role bindings + pipeline params sized for fast deterministic runs.
chase::RunConfig make_test_config(const std::string& cache_dir, chase::CacheMode mode);

// The prompt library shipped with the repository (compile-time path).
const std::map<std::string, chase::PromptTemplate>& test_prompts();

class ScriptedTransport final : public chase::Transport {
public:
    chase::ChatResponse send(const chase::ModelEndpoint& endpoint,
                             const chase::ChatRequest& request) override;

    int calls = 0;
};

}  // namespace testsupport

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace chase {

struct CacheMissError : std::runtime_error {
    explicit CacheMissError(const std::string& digest)
        : std::runtime_error("transcript cache miss in replay mode: " + digest),
          missing_digest(digest) {}
    std::string missing_digest;
};

enum class CacheMode { record, replay, passthrough };

struct CachedResponse {
    std::string text;
    int finish_reason = 0;  // matches FinishReason enum order
    std::int64_t latency_ms = 0;
};

// One file per digest under <dir>/<first 2 hex>/<digest>.resp. Writes are
// atomic (temp file + rename) so concurrent workers can share a cache.
class TranscriptCache {
public:
    TranscriptCache(CacheMode mode, std::string dir);

    CacheMode mode() const { return mode_; }
    const std::string& dir() const { return dir_; }

    std::optional<CachedResponse> lookup(const std::string& digest) const;
    void store(const std::string& digest, const CachedResponse& response);
    bool contains(const std::string& digest) const;

private:
    CacheMode mode_;
    std::string dir_;
    std::string path_for(const std::string& digest) const;
};

}  // namespace chase

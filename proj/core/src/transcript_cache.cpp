#include "chase/transcript_cache.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace fs = std::filesystem;

namespace chase {

TranscriptCache::TranscriptCache(CacheMode mode, std::string dir)
    : mode_(mode), dir_(std::move(dir)) {
    if (mode_ != CacheMode::passthrough) fs::create_directories(dir_);
}

std::string TranscriptCache::path_for(const std::string& digest) const {
    return dir_ + "/" + digest.substr(0, 2) + "/" + digest + ".resp";
}

std::optional<CachedResponse> TranscriptCache::lookup(const std::string& digest) const {
    std::ifstream in(path_for(digest));
    if (!in) return std::nullopt;
    nlohmann::json j = nlohmann::json::parse(in);
    CachedResponse r;
    r.text = j.at("text").get<std::string>();
    r.finish_reason = j.at("finish_reason").get<int>();
    r.latency_ms = j.at("latency_ms").get<std::int64_t>();
    return r;
}

bool TranscriptCache::contains(const std::string& digest) const {
    return fs::exists(path_for(digest));
}

void TranscriptCache::store(const std::string& digest, const CachedResponse& response) {
    fs::path target = path_for(digest);
    fs::create_directories(target.parent_path());
    nlohmann::json j{{"text", response.text},
                     {"finish_reason", response.finish_reason},
                     {"latency_ms", response.latency_ms}};
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp);
        out << j.dump(2) << "\n";
    }
    fs::rename(tmp, target);
}

}  // namespace chase

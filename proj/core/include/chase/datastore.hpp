#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "chase/code.hpp"
#include "chase/math.hpp"
#include "chase/qa.hpp"

namespace chase {
namespace datastore {

struct IntegrityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ManifestEntry {
    std::string dataset_id;
    std::string domain;
    int example_count = 0;
    std::string content_digest;  // sha256 of the dataset file bytes
    std::string created_at;      // ISO-8601 UTC
    std::string config_digest;

    std::string to_json_text() const;
    static ManifestEntry from_json_text(const std::string& text);
};

// Line-delimited JSON, one example per line, UTF-8, sorted by id. A
// manifest side file `<path>.manifest.json` records the content digest;
// load verifies it when present and throws IntegrityError on mismatch.
ManifestEntry save_qa(std::vector<qa::QAExample> examples, const std::string& path,
                      const std::string& config_digest);
ManifestEntry save_code(std::vector<code::CodeExample> examples, const std::string& path,
                        const std::string& config_digest);
ManifestEntry save_math(std::vector<math::ComposedMathProblem> examples, const std::string& path,
                        const std::string& config_digest);

std::vector<qa::QAExample> load_qa(const std::string& path);
std::vector<code::CodeExample> load_code(const std::string& path);
std::vector<math::ComposedMathProblem> load_math(const std::string& path);

// Domain tag of the first record ("qa" | "code" | "math").
std::string dataset_domain(const std::string& path);

// Domain-appropriate summary statistics as pretty JSON.
std::string dataset_stats(const std::string& path);

// Optional on-disk layout for inspection:
// <dir>/repo/<files>, <dir>/problem.txt, <dir>/solution/..., <dir>/tests/...
void export_code_example(const code::CodeExample& ex, const std::string& dir);

// Line-delimited {problem, answer} seed corpus for the math pipeline.
std::vector<std::pair<std::string, Decimal>> load_math_seeds(const std::string& path);

}  // namespace datastore
}  // namespace chase

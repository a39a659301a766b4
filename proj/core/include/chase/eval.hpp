#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "chase/code.hpp"
#include "chase/config.hpp"
#include "chase/decimal.hpp"
#include "chase/math.hpp"
#include "chase/promptkit.hpp"
#include "chase/provider.hpp"
#include "chase/qa.hpp"
#include "chase/rng.hpp"

namespace chase {
namespace eval {

enum class Metric { accuracy, k_precision, recall, pass1, exact_match };
std::string metric_name(Metric m);
Metric metric_from_name(const std::string& name);

struct Prediction {
    std::string example_id;
    std::string model_name;
    std::string raw_text;  // retained verbatim for audit
    bool extracted = false;
    std::string payload;  // bullet answer | source text | decimal rendering
    bool truncated = false;
};

struct ExampleVerdict {
    std::string example_id;
    bool correct = false;
    double value = 0.0;  // 0/1 for boolean metrics, 0-100 for k_precision
    bool judge_parse_failed = false;
    bool truncated = false;
};

struct MetricReport {
    std::string model;
    std::string domain;
    Metric kind = Metric::accuracy;
    int n = 0;
    double aggregate = 0.0;  // percentage
    std::vector<ExampleVerdict> verdicts;
    std::string token_estimator = "ceil(words*4/3)";

    std::string to_text() const;
    std::string to_json() const;
};

// Pluggable default token estimator.
std::size_t estimate_tokens(const std::string& text);
std::size_t qa_example_tokens(const qa::QAExample& ex);
std::size_t code_example_tokens(const code::CodeExample& ex);

// One decimal place, half-up, as in the reported tables.
std::string format_percent(double value);

MetricReport aggregate_report(const std::string& model, const std::string& domain, Metric kind,
                              std::vector<ExampleVerdict> verdicts);

// Context-size scaling: append donor material sampled with `rng` until the
// token estimate reaches target_tokens. Gold material is byte-preserved;
// a target at or below the current size is a no-op.
qa::QAExample scale_qa_context(const qa::QAExample& ex, std::size_t target_tokens,
                               const std::vector<qa::Document>& donor_pool, Rng& rng);
code::CodeExample scale_code_context(const code::CodeExample& ex, std::size_t target_tokens,
                                     const std::vector<std::pair<std::string, std::string>>&
                                         donor_functions,
                                     Rng& rng);

class Harness {
public:
    Harness(ProviderClient& client, const RunConfig& config,
            const std::map<std::string, PromptTemplate>& prompts);

    Prediction solve_qa(const qa::QAExample& ex, const std::string& sample_tag = "");
    Prediction solve_code(const code::CodeExample& ex, const std::string& sample_tag = "");
    Prediction solve_math(const math::ComposedMathProblem& ex, bool sentence_variant = false,
                          const std::string& sample_tag = "");

    ExampleVerdict judge_qa_accuracy(const qa::QAExample& ex, const Prediction& pred);
    ExampleVerdict judge_k_precision(const qa::QAExample& ex, const Prediction& pred);
    ExampleVerdict judge_recall(const qa::QAExample& ex, const Prediction& pred);
    ExampleVerdict score_code_pass1(const code::CodeExample& ex, const Prediction& pred);
    ExampleVerdict score_math_exact(const math::ComposedMathProblem& ex, const Prediction& pred);

    MetricReport evaluate_qa(const std::vector<qa::QAExample>& examples, Metric kind);
    MetricReport evaluate_code(const std::vector<code::CodeExample>& examples);
    MetricReport evaluate_math(const std::vector<math::ComposedMathProblem>& examples,
                               bool sentence_variant = false);

private:
    ChatResponse call(Role role, const std::string& tpl_name,
                      const std::map<std::string, std::string>& bindings,
                      const std::string& sample_tag, double temperature, int max_tokens);

    ProviderClient& client_;
    const RunConfig& config_;
    const std::map<std::string, PromptTemplate>& prompts_;
};

}  // namespace eval
}  // namespace chase

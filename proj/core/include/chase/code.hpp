#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "chase/config.hpp"
#include "chase/pipeline.hpp"
#include "chase/promptkit.hpp"
#include "chase/provider.hpp"
#include "chase/rng.hpp"
#include "chase/sandbox.hpp"

namespace chase {
namespace code {

struct HelperFunction {
    std::string name;
    std::string file_name;
    std::string parameters_text;           // "- name: type" lines
    std::vector<std::string> objectives;   // 3-4 sub-goals
    std::string source;
    bool verified_executes = false;
};

struct CodeProblem {
    std::string parameters_text;
    std::vector<std::string> objectives;  // 6-8 sub-goals
    std::string statement;                // parameters + objectives, rendered
    std::string function_name;
    std::string answer_file;              // declared file for the answer function
    std::string answer_code;
    std::vector<std::string> relevant_helper_names;  // 4-6
    std::string test_code;
};

struct RepoContext {
    std::map<std::string, std::string> files;           // file name -> source
    std::map<std::string, std::string> function_index;  // function -> file
};

struct CodeExample {
    std::string id;
    std::string domain;  // e.g. data_preprocessing | algorithms
    RepoContext repo;
    std::string statement;
    std::string function_name;
    std::string answer_file;
    std::string gold_answer;
    std::string gold_test;
    std::vector<std::string> relevant_helper_names;
};

// Parsing helpers, exposed for the golden-format tests.
std::vector<HelperFunction> parse_helper_batch(const std::string& text);
CodeProblem parse_problem_response(const std::string& text);

// Identifier-boundary occurrence scan (no substring false positives).
bool contains_token(const std::string& text, const std::string& identifier);

// Seeded layout: relevant helpers pinned to their declared files, shuffled
// irrelevant helpers filled into the least-loaded of repo_file_count files.
RepoContext assemble_repo(const std::vector<HelperFunction>& relevant,
                          const std::vector<HelperFunction>& irrelevant_pool,
                          const PipelineParams& params, const std::string& extension, Rng& rng);

class Pipeline {
public:
    Pipeline(ProviderClient& client, const RunConfig& config,
             const std::map<std::string, PromptTemplate>& prompts);

    std::vector<HelperFunction> generate_helpers(const std::string& domain,
                                                 const std::vector<HelperFunction>& seeds,
                                                 int target_count);
    bool verify_helper_executes(HelperFunction& helper);
    std::optional<CodeProblem> generate_problem(const std::string& domain,
                                                const std::vector<HelperFunction>& pool,
                                                Rng& rng, int example_index,
                                                std::vector<HelperFunction>* sampled_out);
    std::optional<std::string> generate_test_code(const CodeProblem& problem,
                                                  const std::vector<HelperFunction>& relevant,
                                                  int example_index);
    bool verify_statement_sufficiency(const std::string& domain, const CodeProblem& problem,
                                      const std::vector<HelperFunction>& relevant);

    // Full pipeline for target_count examples from a verified helper pool.
    std::vector<CodeExample> generate(const std::string& domain,
                                      const std::vector<HelperFunction>& pool, int target_count);

    // Runs `test_code` against `answer_code` inside the repo files.
    ExecResult run_test(const RepoContext& repo, const std::string& answer_file,
                        const std::string& answer_code, const std::string& test_code);

    YieldLedger& ledger() { return ledger_; }

private:
    ChatResponse call(Role role, const std::string& tpl_name,
                      const std::map<std::string, std::string>& bindings,
                      const std::string& sample_tag);
    SandboxLimits limits() const;

    ProviderClient& client_;
    const RunConfig& config_;
    const std::map<std::string, PromptTemplate>& prompts_;
    YieldLedger ledger_;
};

// Bootstrap helper functions (3 annotated examples per domain).
std::vector<HelperFunction> default_seed_helpers(const std::string& domain);

std::string format_helper(const HelperFunction& h);

}  // namespace code
}  // namespace chase

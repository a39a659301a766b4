#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "chase/config.hpp"
#include "chase/decimal.hpp"
#include "chase/pipeline.hpp"
#include "chase/promptkit.hpp"
#include "chase/provider.hpp"

namespace chase {
namespace math {

struct SeedProblem {
    std::string problem;  // original full text (context + question)
    std::string context;
    std::string question;
    std::string answer_statement;
    Decimal answer;
};

struct Continuation {
    std::string operation;
    std::string new_context;
    std::string new_question;
    std::string reasoning;
    Decimal new_answer;
};

struct ComposedMathProblem {
    std::string id;
    std::string seed_id;
    std::vector<std::string> context_chain;
    std::string question;
    Decimal answer;
    int depth = 1;  // |context_chain|
    std::string provenance;
};

// True when `context` contains a digit rendering of `answer` ("4", "4.0",
// "4.00") as a standalone number. Number words are not scanned.
bool leaks_answer(const std::string& context, const Decimal& answer);

// Appendix-style post-release filter over held-out verifier answers.
enum class FilterOutcome { kept, discarded, flagged };
FilterOutcome posthoc_classify(const std::vector<std::optional<Decimal>>& verifier_answers,
                               const Decimal& gold, int k);

std::string composed_text(const ComposedMathProblem& p);

class Pipeline {
public:
    Pipeline(ProviderClient& client, const RunConfig& config,
             const std::map<std::string, PromptTemplate>& prompts);

    std::optional<SeedProblem> breakdown_seed(const std::string& problem, const Decimal& answer,
                                              const std::string& tag);
    std::optional<Continuation> generate_continuation(const SeedProblem& current,
                                                      const std::string& tag);
    // Pure text operation; no model involved.
    static ComposedMathProblem combine(const ComposedMathProblem& current,
                                       const Continuation& cont);
    bool verify_ensemble(const std::string& context, const std::string& question,
                         const Decimal& gold);
    std::optional<ComposedMathProblem> iterate_depth(const SeedProblem& seed,
                                                     const std::string& seed_id,
                                                     const std::string& pass_tag);

    // All passes over the seed corpus; stops once target_count problems are
    // accepted (target_count <= 0 means no cap).
    std::vector<ComposedMathProblem> generate(
        const std::vector<std::pair<std::string, Decimal>>& seeds, int target_count);

    YieldLedger& ledger() { return ledger_; }

private:
    ChatResponse call(Role role, const std::string& tpl_name,
                      const std::map<std::string, std::string>& bindings,
                      const std::string& sample_tag);

    ProviderClient& client_;
    const RunConfig& config_;
    const std::map<std::string, PromptTemplate>& prompts_;
    YieldLedger ledger_;
};

}  // namespace math
}  // namespace chase

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

namespace chase {
namespace qa {

struct Scenario {
    std::string persona;
    std::string collection;
};

// Lowercased, whitespace-collapsed form used for dedup.
std::string scenario_key(const Scenario& s);

struct OutlineEntry {
    std::string title;
    std::vector<int> point_indices;  // indices into QAPair::points
};

struct QAPair {
    std::string question;
    std::vector<std::string> points;  // gold answer bullets
    std::vector<OutlineEntry> outline;
};

struct Document {
    std::string title;
    std::string body;
    bool relevant = false;
    std::size_t word_count = 0;
};

struct QAExample {
    std::string id;
    Scenario scenario;
    QAPair gold;
    std::vector<QAPair> irrelevant;
    std::vector<Document> documents;  // order shuffled with the run seed
    std::string provenance;
};

// Structural invariants checkable without a model: point/outline counts,
// outline fidelity (relevant titles == outline titles), title uniqueness,
// gold/adversarial title disjointness. Returns a reason or empty string.
std::string structural_violation(const QAExample& ex);

// Parsing helpers, exposed for the golden-format tests.
std::vector<Scenario> parse_scenario_batch(const std::string& text);
QAPair parse_qa_pair_response(const std::string& text, const std::string& group_prefix);
std::vector<Document> parse_documents_response(const std::string& text);

class Pipeline {
public:
    Pipeline(ProviderClient& client, const RunConfig& config,
             const std::map<std::string, PromptTemplate>& prompts);

    std::vector<Scenario> generate_scenarios(const std::vector<Scenario>& seeds, int target_count);
    std::optional<QAPair> generate_qa_pair(const Scenario& scenario, int pair_index);
    std::vector<QAPair> generate_irrelevant_set(const Scenario& scenario, const QAPair& gold,
                                                int count);
    bool verify_irrelevance(const std::string& question, const QAPair& adversarial);
    std::optional<std::vector<Document>> generate_documents(const Scenario& scenario,
                                                            const QAPair& pair,
                                                            const std::vector<QAPair>& other_pairs,
                                                            bool relevant_role,
                                                            const QAPair& gold,
                                                            const std::string& tag);
    bool verify_no_extra(const Document& doc, const std::string& question,
                         const std::vector<std::string>& gold_points);
    std::pair<bool, bool> verify_point_presence(const Document& doc, const std::string& question,
                                                const std::string& point);
    QAExample assemble_example(const Scenario& scenario, const QAPair& gold,
                               std::vector<QAPair> irrelevant, std::vector<Document> documents,
                               int example_index, Rng& rng);

    // Full pipeline: scenarios -> pairs -> adversarial -> documents ->
    // verification -> assembly, until target_count examples are accepted
    // or the scenario supply is exhausted.
    std::vector<QAExample> generate(const std::vector<Scenario>& seeds, int target_count);

    YieldLedger& ledger() { return ledger_; }

private:
    ChatResponse call(Role role, const std::string& tpl_name,
                      const std::map<std::string, std::string>& bindings,
                      const std::string& sample_tag);
    std::optional<QAExample> build_example(const Scenario& scenario, int pair_index,
                                           int example_index, Rng& rng);

    ProviderClient& client_;
    const RunConfig& config_;
    const std::map<std::string, PromptTemplate>& prompts_;
    YieldLedger ledger_;
};

// Default bootstrap scenarios used when the caller provides none.
std::vector<Scenario> default_seed_scenarios();

}  // namespace qa
}  // namespace chase

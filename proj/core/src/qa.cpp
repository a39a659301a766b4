#include "chase/qa.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <set>
#include <sstream>

namespace chase {
namespace qa {

namespace {

std::string normalize_ws(const std::string& s) {
    std::string out;
    bool space = false;
    for (char c : strings::lower(strings::trim(s))) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            space = true;
        } else {
            if (space && !out.empty()) out.push_back(' ');
            space = false;
            out.push_back(c);
        }
    }
    return out;
}

std::string bullets(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& it : items) out += "- " + it + "\n";
    return strings::trim(out);
}

std::string outline_text(const QAPair& pair, const std::string& prefix) {
    std::ostringstream out;
    int i = 1;
    for (const auto& entry : pair.outline) {
        out << prefix << "Document " << i << " Title: " << entry.title << "\n";
        out << prefix << "Document " << i << " Answer points assigned:\n";
        for (int p : entry.point_indices) out << "- " << pair.points[p] << "\n";
        out << "\n";
        ++i;
    }
    return strings::trim(out.str());
}

// Items listed under an outline entry: bullets when present, else lines,
// else the inline value as a single item.
std::vector<std::string> outline_items(const std::string& text) {
    auto items = strings::bullet_points(text);
    if (!items.empty()) return items;
    for (const auto& line : strings::split_lines(text)) {
        std::string t = strings::trim(line);
        if (!t.empty()) items.push_back(t);
    }
    return items;
}

}  // namespace

std::string scenario_key(const Scenario& s) {
    return normalize_ws(s.persona) + "|" + normalize_ws(s.collection);
}

std::vector<Scenario> default_seed_scenarios() {
    return {
        {"Immigrant in NYC", "Laws on renting and subletting"},
        {"New parent", "Guides on infant sleep safety and schedules"},
        {"Amateur sailor", "Coast guard regulations and harbor notices"},
        {"Restaurant owner", "City health-code inspection manuals"},
        {"Freelance photographer", "Commercial drone flight rules"},
    };
}

std::vector<Scenario> parse_scenario_batch(const std::string& text) {
    FormatSpec spec;
    spec.fields = {{"USER_PERSONA", FieldKind::line, true},
                   {"COLLECTION_OF_DOCS", FieldKind::line, true}};
    std::vector<Scenario> out;
    std::optional<std::string> persona;
    for (const auto& raw : strings::split_lines(text)) {
        ParsedRecord rec;
        try {
            rec = parse_record(spec, raw);
        } catch (const ParseError&) {
            continue;
        }
        auto p = rec.values.find("USER_PERSONA");
        auto c = rec.values.find("COLLECTION_OF_DOCS");
        if (p != rec.values.end() && !p->second.empty()) persona = p->second;
        if (c != rec.values.end() && !c->second.empty() && persona) {
            out.push_back({*persona, c->second});
            persona.reset();
        }
    }
    if (out.empty()) throw ParseError("no persona/collection pairs found in scenario batch");
    return out;
}

QAPair parse_qa_pair_response(const std::string& text, const std::string& group_prefix) {
    const std::string q_label = group_prefix.empty() ? "Question" : group_prefix + " Question";
    const std::string a_label = group_prefix.empty() ? "Answer" : group_prefix + " Answer";
    const std::string doc_prefix = group_prefix.empty() ? "Document" : group_prefix + " Document";

    FormatSpec spec;
    spec.fields = {{q_label, FieldKind::line, false}, {a_label, FieldKind::list, false}};
    spec.group = GroupSpec{doc_prefix,
                           {{"Title", FieldKind::line, false},
                            {"Answer points assigned", FieldKind::list, false}}};
    ParsedRecord rec = parse_record(spec, text);

    QAPair pair;
    pair.question = rec.values.at(q_label);
    pair.points = strings::bullet_points(rec.values.at(a_label));
    if (pair.points.empty())
        throw ParseError("answer has no bullet points");
    if (pair.points.size() < 3 || pair.points.size() > 6)
        throw ParseError("answer must have 3-6 points, got " + std::to_string(pair.points.size()));
    if (rec.groups.size() < 3)
        throw ParseError("outline must cover at least 3 documents, got " +
                         std::to_string(rec.groups.size()));

    // Map each answer point to exactly one outline entry.
    std::vector<int> owner(pair.points.size(), -1);
    for (std::size_t g = 0; g < rec.groups.size(); ++g) {
        OutlineEntry entry;
        entry.title = rec.groups[g].at("Title");
        for (const auto& item : outline_items(rec.groups[g].at("Answer points assigned"))) {
            std::string ni = normalize_ws(item);
            for (std::size_t p = 0; p < pair.points.size(); ++p) {
                std::string np = normalize_ws(pair.points[p]);
                bool hit = ni == np || ni.find(np) != std::string::npos ||
                           np.find(ni) != std::string::npos;
                if (!hit) continue;
                if (owner[p] != -1 && owner[p] != static_cast<int>(g))
                    throw ParseError("answer point assigned to more than one document: " +
                                     pair.points[p]);
                if (owner[p] == -1) {
                    owner[p] = static_cast<int>(g);
                    entry.point_indices.push_back(static_cast<int>(p));
                }
            }
        }
        pair.outline.push_back(std::move(entry));
    }
    for (std::size_t p = 0; p < owner.size(); ++p)
        if (owner[p] == -1)
            throw ParseError("answer point not assigned to any document: " + pair.points[p]);

    std::set<std::string> titles;
    for (const auto& e : pair.outline)
        if (!titles.insert(normalize_ws(e.title)).second)
            throw ParseError("duplicate outline title: " + e.title);
    return pair;
}

std::vector<Document> parse_documents_response(const std::string& text) {
    // Responses arrive as "Document N:" sections; the per-document labels do
    // not repeat the index, so split first and parse each section flat.
    std::vector<std::string> sections;
    std::string current;
    bool in_section = false;
    for (const auto& raw : strings::split_lines(text)) {
        std::string t = strings::trim(raw);
        bool header = false;
        if (t.rfind("Document ", 0) == 0 && !t.empty() && t.back() == ':') {
            std::string mid = strings::trim(t.substr(9, t.size() - 10));
            header = !mid.empty() &&
                     std::all_of(mid.begin(), mid.end(),
                                 [](unsigned char c) { return std::isdigit(c); });
        }
        if (header) {
            if (in_section) sections.push_back(current);
            current.clear();
            in_section = true;
        } else if (in_section) {
            current += raw + "\n";
        }
    }
    if (in_section) sections.push_back(current);
    if (sections.empty()) throw ParseError("no 'Document N:' sections found");

    FormatSpec spec;
    spec.fields = {
        {"Title", FieldKind::line, false},
        {"Question", FieldKind::line, true},
        {"Answer points assigned [Only these points must be covered with respect to the question]",
         FieldKind::list, true},
        {"Answer points assigned", FieldKind::list, true},
        {"Other unrelated points created", FieldKind::list, true},
        {"Text", FieldKind::block, false},
    };

    std::vector<Document> docs;
    for (const auto& sec : sections) {
        ParsedRecord rec = parse_record(spec, sec);
        Document d;
        d.title = rec.values.at("Title");
        d.body = rec.values.at("Text");
        d.word_count = strings::word_count(d.body);
        if (d.body.empty()) throw ParseError("document '" + d.title + "' has empty text");
        docs.push_back(std::move(d));
    }
    return docs;
}

std::string structural_violation(const QAExample& ex) {
    if (ex.gold.question.empty()) return "empty question";
    if (ex.gold.points.size() < 3 || ex.gold.points.size() > 6)
        return "gold point count out of range";
    if (ex.gold.outline.size() < 3) return "gold outline smaller than 3 documents";

    std::set<int> covered;
    for (const auto& e : ex.gold.outline)
        for (int p : e.point_indices)
            if (!covered.insert(p).second) return "point assigned to multiple outline entries";
    for (std::size_t p = 0; p < ex.gold.points.size(); ++p)
        if (!covered.count(static_cast<int>(p))) return "point missing from outline";

    std::set<std::string> doc_titles, relevant_titles, outline_titles;
    for (const auto& d : ex.documents) {
        if (!doc_titles.insert(normalize_ws(d.title)).second)
            return "duplicate document title: " + d.title;
        if (d.relevant) relevant_titles.insert(normalize_ws(d.title));
    }
    for (const auto& e : ex.gold.outline) outline_titles.insert(normalize_ws(e.title));
    if (relevant_titles != outline_titles) return "relevant titles differ from outline titles";

    for (const auto& adv : ex.irrelevant)
        for (const auto& e : adv.outline)
            if (outline_titles.count(normalize_ws(e.title)))
                return "adversarial outline reuses a gold document title: " + e.title;
    return {};
}

Pipeline::Pipeline(ProviderClient& client, const RunConfig& config,
                   const std::map<std::string, PromptTemplate>& prompts)
    : client_(client), config_(config), prompts_(prompts) {}

ChatResponse Pipeline::call(Role role, const std::string& tpl_name,
                            const std::map<std::string, std::string>& bindings,
                            const std::string& sample_tag) {
    auto it = prompts_.find(tpl_name);
    if (it == prompts_.end()) throw ConfigError("prompt template not loaded: " + tpl_name);
    ChatRequest req;
    req.system_text = it->second.system_text;
    req.user_text = render(it->second, bindings);
    req.role_tag = role;
    req.sample_tag = sample_tag;
    if (role == Role::generator) {
        req.temperature = config_.generator_temperature;
        req.max_tokens = config_.generator_max_tokens;
    } else {
        req.temperature = 0.0;
        req.max_tokens = 1024;
    }
    return client_.complete(resolve_role(config_.roles, role), req);
}

std::vector<Scenario> Pipeline::generate_scenarios(const std::vector<Scenario>& seeds,
                                                   int target_count) {
    if (target_count < 1) throw std::invalid_argument("target_count must be >= 1");
    std::vector<Scenario> pool = seeds.empty() ? default_seed_scenarios() : seeds;
    std::set<std::string> seen;
    for (const auto& s : pool) seen.insert(scenario_key(s));

    std::vector<Scenario> out;
    std::vector<Scenario> recent(pool.begin(), pool.end());
    int batch_no = 0;
    int stalled = 0;
    while (static_cast<int>(out.size()) < target_count) {
        std::ostringstream seed_text;
        std::size_t from = recent.size() > 5 ? recent.size() - 5 : 0;
        for (std::size_t i = from; i < recent.size(); ++i) {
            seed_text << "USER_PERSONA: " << recent[i].persona << "\n"
                      << "COLLECTION_OF_DOCS: " << recent[i].collection << "\n\n";
        }
        ledger_.record_attempt("qa.scenarios");
        std::vector<Scenario> batch;
        try {
            ChatResponse resp =
                call(Role::generator, "qa_scenarios",
                     {{"SEED_SCENARIOS", strings::trim(seed_text.str())}},
                     "batch" + std::to_string(batch_no++));
            batch = parse_scenario_batch(resp.text);
        } catch (const std::exception& e) {
            ledger_.record_discard("qa.scenarios", std::string("batch failed: ") + e.what());
            if (++stalled > config_.params.stage_retry_budget)
                throw std::runtime_error("scenario generation stalled: no new scenarios within "
                                         "the retry budget");
            continue;
        }
        int added = 0;
        for (auto& s : batch) {
            if (static_cast<int>(out.size()) >= target_count) break;
            if (!seen.insert(scenario_key(s)).second) continue;
            out.push_back(s);
            recent.push_back(s);
            ++added;
        }
        if (added == 0) {
            ledger_.record_discard("qa.scenarios", "batch contained no new scenarios");
            if (++stalled > config_.params.stage_retry_budget)
                throw std::runtime_error("scenario generation stalled: no new scenarios within "
                                         "the retry budget");
        } else {
            ledger_.record_accept("qa.scenarios");
            stalled = 0;
        }
    }
    return out;
}

std::optional<QAPair> Pipeline::generate_qa_pair(const Scenario& scenario, int pair_index) {
    for (int attempt = 0; attempt < config_.params.stage_retry_budget; ++attempt) {
        ledger_.record_attempt("qa.pair");
        try {
            ChatResponse resp = call(Role::generator, "qa_qa",
                                     {{"USER_PERSONA", scenario.persona},
                                      {"COLLECTION_OF_DOCS", scenario.collection}},
                                     "pair" + std::to_string(pair_index) + ".a" +
                                         std::to_string(attempt));
            QAPair pair = parse_qa_pair_response(resp.text, "");
            ledger_.record_accept("qa.pair");
            return pair;
        } catch (const std::exception& e) {
            ledger_.record_discard("qa.pair", e.what());
        }
    }
    return std::nullopt;
}

std::vector<QAPair> Pipeline::generate_irrelevant_set(const Scenario& scenario,
                                                      const QAPair& gold, int count) {
    std::set<std::string> gold_titles;
    for (const auto& e : gold.outline) gold_titles.insert(normalize_ws(e.title));

    std::vector<QAPair> kept;
    for (int j = 0; j < count; ++j) {
        bool accepted = false;
        for (int attempt = 0; attempt < config_.params.stage_retry_budget && !accepted;
             ++attempt) {
            ledger_.record_attempt("qa.adversarial");
            try {
                ChatResponse resp =
                    call(Role::generator, "qa_adversarial",
                         {{"USER_PERSONA", scenario.persona},
                          {"COLLECTION_OF_DOCS", scenario.collection},
                          {"QUESTION", gold.question},
                          {"ANSWER", bullets(gold.points)},
                          {"DOCS_INFORMATION", outline_text(gold, "")}},
                         "adv" + std::to_string(j) + ".a" + std::to_string(attempt));
                QAPair adv = parse_qa_pair_response(resp.text, "Adversarial");
                bool collision = false;
                for (const auto& e : adv.outline)
                    if (gold_titles.count(normalize_ws(e.title))) collision = true;
                if (collision) {
                    ledger_.record_discard("qa.adversarial",
                                           "adversarial outline reuses a gold title");
                    continue;
                }
                if (!verify_irrelevance(gold.question, adv)) {
                    ledger_.record_discard("qa.adversarial",
                                           "adversarial answer judged relevant");
                    continue;
                }
                ledger_.record_accept("qa.adversarial");
                kept.push_back(std::move(adv));
                accepted = true;
            } catch (const std::exception& e) {
                ledger_.record_discard("qa.adversarial", e.what());
            }
        }
    }
    return kept;
}

bool Pipeline::verify_irrelevance(const std::string& question, const QAPair& adversarial) {
    ChatResponse resp = call(Role::verifier, "qa_verify_adv_cross_check",
                             {{"QUESTION", question},
                              {"IRRELEVANT_ANSWERS", bullets(adversarial.points)}},
                             "");
    try {
        // Keep only when the verifier says the answer is NOT relevant.
        return !parse_verdict(resp.text, VerdictStyle::Labeled("Relevance"));
    } catch (const ParseError&) {
        return false;  // conservative: unparseable verdict drops the pair
    }
}

std::optional<std::vector<Document>> Pipeline::generate_documents(
    const Scenario& scenario, const QAPair& pair, const std::vector<QAPair>& other_pairs,
    bool relevant_role, const QAPair& gold, const std::string& tag) {
    std::ostringstream irrelevant;
    for (const auto& o : other_pairs)
        irrelevant << "Question: " << o.question << "\nAnswer:\n" << bullets(o.points) << "\n\n";

    std::set<std::string> outline_titles;
    for (const auto& e : pair.outline) outline_titles.insert(normalize_ws(e.title));

    for (int attempt = 0; attempt < config_.params.stage_retry_budget; ++attempt) {
        ledger_.record_attempt("qa.documents");
        try {
            ChatResponse resp =
                call(Role::generator, "qa_documents",
                     {{"USER_PERSONA", scenario.persona},
                      {"COLLECTION_OF_DOCS", scenario.collection},
                      {"QUESTION", pair.question},
                      {"ANSWER", bullets(pair.points)},
                      {"DOCS_INFORMATION", outline_text(pair, "")},
                      {"IRRELEVANT_QUESTIONS_ANSWERS", strings::trim(irrelevant.str())}},
                     tag + ".a" + std::to_string(attempt));
            std::vector<Document> docs = parse_documents_response(resp.text);

            std::set<std::string> got_titles;
            for (auto& d : docs) {
                d.relevant = relevant_role;
                got_titles.insert(normalize_ws(d.title));
            }
            if (got_titles != outline_titles) {
                ledger_.record_discard("qa.documents", "document titles differ from outline");
                continue;
            }
            bool short_doc = false;
            for (const auto& d : docs)
                if (relevant_role && d.word_count < 700) short_doc = true;
            if (short_doc) {
                ledger_.record_discard("qa.documents", "relevant document under 700 words");
                continue;
            }
            bool extra = false;
            for (const auto& d : docs)
                if (!verify_no_extra(d, gold.question, gold.points)) extra = true;
            if (extra) {
                ledger_.record_discard("qa.documents",
                                       "document introduces extra answer points");
                continue;
            }
            if (relevant_role) {
                bool missing = false;
                for (const auto& entry : pair.outline) {
                    const Document* doc = nullptr;
                    for (const auto& d : docs)
                        if (normalize_ws(d.title) == normalize_ws(entry.title)) doc = &d;
                    for (int p : entry.point_indices) {
                        auto [present, relevant] =
                            verify_point_presence(*doc, pair.question, pair.points[p]);
                        if (!present || !relevant) missing = true;
                    }
                }
                if (missing) {
                    ledger_.record_discard("qa.documents", "assigned point absent or irrelevant");
                    continue;
                }
            }
            ledger_.record_accept("qa.documents");
            return docs;
        } catch (const std::exception& e) {
            ledger_.record_discard("qa.documents", e.what());
        }
    }
    return std::nullopt;
}

bool Pipeline::verify_no_extra(const Document& doc, const std::string& question,
                               const std::vector<std::string>& gold_points) {
    ChatResponse resp = call(Role::verifier, "qa_verify_extra",
                             {{"DOCUMENT", "Title: " + doc.title + "\n" + doc.body},
                              {"QUESTION", question},
                              {"ANSWER", bullets(gold_points)}},
                             "");
    try {
        return !parse_verdict(resp.text, VerdictStyle::Labeled("Presence of Extra Points"));
    } catch (const ParseError&) {
        return false;  // conservative: unparseable verdict fails the document
    }
}

std::pair<bool, bool> Pipeline::verify_point_presence(const Document& doc,
                                                      const std::string& question,
                                                      const std::string& point) {
    ChatResponse resp = call(Role::verifier, "qa_verify_presence",
                             {{"DOCUMENT", "Title: " + doc.title + "\n" + doc.body},
                              {"QUESTION", question},
                              {"ANSWER_POINT", point}},
                             "");
    try {
        bool present = parse_verdict(resp.text, VerdictStyle::Labeled("Presence"));
        bool relevant = parse_verdict(resp.text, VerdictStyle::Labeled("Relevance"));
        return {present, relevant};
    } catch (const ParseError&) {
        return {false, false};
    }
}

QAExample Pipeline::assemble_example(const Scenario& scenario, const QAPair& gold,
                                     std::vector<QAPair> irrelevant,
                                     std::vector<Document> documents, int example_index,
                                     Rng& rng) {
    QAExample ex;
    char idbuf[16];
    std::snprintf(idbuf, sizeof idbuf, "qa-%05d", example_index);
    ex.id = idbuf;
    ex.scenario = scenario;
    ex.gold = gold;
    ex.irrelevant = std::move(irrelevant);
    ex.documents = std::move(documents);
    rng.shuffle(ex.documents);
    std::ostringstream prov;
    prov << "scenario=" << scenario.persona << " | " << scenario.collection
         << "; adversarial=" << ex.irrelevant.size() << "; documents=" << ex.documents.size();
    ex.provenance = prov.str();
    return ex;
}

std::optional<QAExample> Pipeline::build_example(const Scenario& scenario, int pair_index,
                                                 int example_index, Rng& rng) {
    ledger_.record_attempt("qa.example");
    auto gold = generate_qa_pair(scenario, pair_index);
    if (!gold) {
        ledger_.record_discard("qa.example", "no valid QA pair");
        return std::nullopt;
    }
    std::vector<QAPair> adversarial =
        generate_irrelevant_set(scenario, *gold, config_.params.irrelevant_qa_count);

    auto gold_docs = generate_documents(scenario, *gold, adversarial, true, *gold,
                                        "docs.gold.p" + std::to_string(pair_index));
    if (!gold_docs) {
        ledger_.record_discard("qa.example", "gold documents failed verification");
        return std::nullopt;
    }

    std::vector<Document> documents = std::move(*gold_docs);
    std::vector<QAPair> kept_adversarial;
    for (std::size_t j = 0; j < adversarial.size(); ++j) {
        auto adv_docs =
            generate_documents(scenario, adversarial[j], {*gold}, false, *gold,
                               "docs.adv" + std::to_string(j) + ".p" + std::to_string(pair_index));
        if (!adv_docs) continue;  // drop the pair, keep the example
        for (auto& d : *adv_docs) documents.push_back(std::move(d));
        kept_adversarial.push_back(adversarial[j]);
    }

    QAExample ex = assemble_example(scenario, *gold, std::move(kept_adversarial),
                                    std::move(documents), example_index, rng);
    std::string violation = structural_violation(ex);
    if (!violation.empty()) {
        ledger_.record_discard("qa.example", violation);
        return std::nullopt;
    }
    ledger_.record_accept("qa.example");
    return ex;
}

std::vector<QAExample> Pipeline::generate(const std::vector<Scenario>& seeds, int target_count) {
    config_.params.validate();
    int scenario_count =
        (target_count + config_.params.qa_pairs_per_scenario - 1) /
        config_.params.qa_pairs_per_scenario;
    std::vector<Scenario> scenarios = generate_scenarios(seeds, scenario_count);

    Rng root(config_.params.rng_seed);
    std::vector<QAExample> out;
    int attempt_counter = 0;
    for (const auto& scenario : scenarios) {
        for (int pair_index = 0; pair_index < config_.params.qa_pairs_per_scenario;
             ++pair_index) {
            if (static_cast<int>(out.size()) >= target_count) return out;
            Rng ex_rng = root.fork(static_cast<std::uint64_t>(attempt_counter++));
            auto ex = build_example(scenario, pair_index, static_cast<int>(out.size()), ex_rng);
            if (ex) out.push_back(std::move(*ex));
        }
    }
    return out;
}

}  // namespace qa
}  // namespace chase

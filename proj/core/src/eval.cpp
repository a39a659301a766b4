#include "chase/eval.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "json.hpp"

#include "chase/sandbox.hpp"

namespace chase {
namespace eval {

using nlohmann::json;

std::string metric_name(Metric m) {
    switch (m) {
        case Metric::accuracy: return "accuracy";
        case Metric::k_precision: return "k_precision";
        case Metric::recall: return "recall";
        case Metric::pass1: return "pass1";
        case Metric::exact_match: return "exact_match";
    }
    return "accuracy";
}

Metric metric_from_name(const std::string& name) {
    if (name == "accuracy") return Metric::accuracy;
    if (name == "k_precision") return Metric::k_precision;
    if (name == "recall") return Metric::recall;
    if (name == "pass1") return Metric::pass1;
    if (name == "exact_match") return Metric::exact_match;
    throw std::invalid_argument("unknown metric: " + name);
}

std::size_t estimate_tokens(const std::string& text) {
    return (strings::word_count(text) * 4 + 2) / 3;
}

std::size_t qa_example_tokens(const qa::QAExample& ex) {
    std::size_t total = estimate_tokens(ex.gold.question);
    for (const auto& d : ex.documents) total += estimate_tokens(d.title) + estimate_tokens(d.body);
    return total;
}

std::size_t code_example_tokens(const code::CodeExample& ex) {
    std::size_t total = estimate_tokens(ex.statement);
    for (const auto& [name, content] : ex.repo.files)
        total += estimate_tokens(name) + estimate_tokens(content);
    return total;
}

std::string format_percent(double value) {
    double rounded = std::floor(value * 10.0 + 0.5) / 10.0;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", rounded);
    return buf;
}

MetricReport aggregate_report(const std::string& model, const std::string& domain, Metric kind,
                              std::vector<ExampleVerdict> verdicts) {
    if (verdicts.empty()) throw std::invalid_argument("cannot aggregate zero verdicts");
    MetricReport rep;
    rep.model = model;
    rep.domain = domain;
    rep.kind = kind;
    rep.n = static_cast<int>(verdicts.size());
    double sum = 0.0;
    for (const auto& v : verdicts) sum += kind == Metric::k_precision ? v.value : (v.correct ? 100.0 : 0.0);
    rep.aggregate = sum / rep.n;
    rep.verdicts = std::move(verdicts);
    return rep;
}

std::string MetricReport::to_text() const {
    std::ostringstream out;
    out << "model\tdomain\tmetric\tN\taggregate\n";
    out << model << "\t" << domain << "\t" << metric_name(kind) << "\t" << n << "\t"
        << format_percent(aggregate) << "\n";
    return out.str();
}

std::string MetricReport::to_json() const {
    json verdicts_j = json::array();
    for (const auto& v : verdicts) {
        verdicts_j.push_back({{"example_id", v.example_id},
                              {"correct", v.correct},
                              {"value", v.value},
                              {"judge_parse_failed", v.judge_parse_failed},
                              {"truncated", v.truncated}});
    }
    json j{{"model", model},
           {"domain", domain},
           {"metric", metric_name(kind)},
           {"n", n},
           {"aggregate", aggregate},
           {"aggregate_display", format_percent(aggregate)},
           {"token_estimator", token_estimator},
           {"verdicts", verdicts_j}};
    return j.dump(2) + "\n";
}

namespace {

std::string normalize_title(const std::string& s) {
    std::string out;
    bool space = false;
    for (char c : strings::trim(s)) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            space = true;
        } else {
            if (space && !out.empty()) out.push_back(' ');
            space = false;
            out.push_back(std::tolower(static_cast<unsigned char>(c)));
        }
    }
    return out;
}

std::string render_documents(const qa::QAExample& ex) {
    std::ostringstream out;
    int i = 1;
    for (const auto& d : ex.documents) {
        out << "Document " << i++ << ": " << d.title << "\n" << d.body << "\n\n";
    }
    return strings::trim(out.str());
}

std::string render_codebase(const code::CodeExample& ex) {
    std::ostringstream out;
    for (const auto& [name, content] : ex.repo.files)
        out << "File: " << name << "\n```\n" << content << "\n```\n\n";
    return strings::trim(out.str());
}

std::string bullets(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& it : items) out += "- " + it + "\n";
    return strings::trim(out);
}

std::string irrelevant_answers_text(const qa::QAExample& ex) {
    if (ex.irrelevant.empty()) return "(none)";
    std::ostringstream out;
    for (const auto& adv : ex.irrelevant)
        out << "Question: " << adv.question << "\nAnswer:\n" << bullets(adv.points) << "\n\n";
    return strings::trim(out.str());
}

}  // namespace

qa::QAExample scale_qa_context(const qa::QAExample& ex, std::size_t target_tokens,
                               const std::vector<qa::Document>& donor_pool, Rng& rng) {
    qa::QAExample scaled = ex;
    if (qa_example_tokens(scaled) >= target_tokens) return scaled;

    std::set<std::string> titles;
    for (const auto& d : scaled.documents) titles.insert(normalize_title(d.title));
    std::vector<bool> used(donor_pool.size(), false);
    std::size_t available = donor_pool.size();

    while (qa_example_tokens(scaled) < target_tokens) {
        std::size_t i;
        do {
            if (available == 0)
                throw std::runtime_error(
                    "donor pool exhausted before reaching target; achieved " +
                    std::to_string(qa_example_tokens(scaled)) + " tokens");
            i = rng.below(donor_pool.size());
            if (!used[i]) break;
        } while (true);
        used[i] = true;
        --available;
        if (titles.count(normalize_title(donor_pool[i].title))) continue;
        titles.insert(normalize_title(donor_pool[i].title));
        qa::Document donor = donor_pool[i];
        donor.relevant = false;
        std::size_t pos = rng.below(scaled.documents.size() + 1);
        scaled.documents.insert(scaled.documents.begin() + static_cast<std::ptrdiff_t>(pos),
                                std::move(donor));
    }
    return scaled;
}

code::CodeExample scale_code_context(
    const code::CodeExample& ex, std::size_t target_tokens,
    const std::vector<std::pair<std::string, std::string>>& donor_functions, Rng& rng) {
    code::CodeExample scaled = ex;
    if (code_example_tokens(scaled) >= target_tokens) return scaled;

    std::set<std::string> names;
    for (const auto& [name, file] : scaled.repo.function_index) names.insert(name);
    std::vector<std::string> file_names;
    for (const auto& [name, content] : scaled.repo.files) file_names.push_back(name);
    if (file_names.empty()) throw std::runtime_error("repository has no files to scale");
    std::vector<bool> used(donor_functions.size(), false);
    std::size_t available = donor_functions.size();

    while (code_example_tokens(scaled) < target_tokens) {
        std::size_t i;
        do {
            if (available == 0)
                throw std::runtime_error(
                    "donor pool exhausted before reaching target; achieved " +
                    std::to_string(code_example_tokens(scaled)) + " tokens");
            i = rng.below(donor_functions.size());
            if (!used[i]) break;
        } while (true);
        used[i] = true;
        --available;
        const auto& [fname, src] = donor_functions[i];
        if (names.count(fname)) continue;
        names.insert(fname);
        const std::string& target_file = file_names[rng.below(file_names.size())];
        std::string& content = scaled.repo.files[target_file];
        if (!content.empty()) content += "\n\n";
        content += src;
        scaled.repo.function_index[fname] = target_file;
    }
    return scaled;
}

Harness::Harness(ProviderClient& client, const RunConfig& config,
                 const std::map<std::string, PromptTemplate>& prompts)
    : client_(client), config_(config), prompts_(prompts) {}

ChatResponse Harness::call(Role role, const std::string& tpl_name,
                           const std::map<std::string, std::string>& bindings,
                           const std::string& sample_tag, double temperature, int max_tokens) {
    auto it = prompts_.find(tpl_name);
    if (it == prompts_.end()) throw ConfigError("prompt template not loaded: " + tpl_name);
    ChatRequest req;
    req.system_text = it->second.system_text;
    req.user_text = render(it->second, bindings);
    req.role_tag = role;
    req.sample_tag = sample_tag;
    req.temperature = temperature;
    req.max_tokens = max_tokens;
    return client_.complete(resolve_role(config_.roles, role), req);
}

Prediction Harness::solve_qa(const qa::QAExample& ex, const std::string& sample_tag) {
    ChatResponse resp = call(Role::solver, "qa_solve",
                             {{"DOCUMENTS", render_documents(ex)},
                              {"QUESTION", ex.gold.question}},
                             sample_tag, config_.solver_temperature, config_.solver_max_tokens);
    Prediction p;
    p.example_id = ex.id;
    p.model_name = resolve_role(config_.roles, Role::solver).model_name;
    p.raw_text = resp.text;
    p.truncated = resp.finish_reason == FinishReason::length;
    p.payload = strings::trim(resp.text);
    p.extracted = !p.payload.empty();
    return p;
}

Prediction Harness::solve_code(const code::CodeExample& ex, const std::string& sample_tag) {
    ChatResponse resp = call(Role::solver, "code_solve",
                             {{"CODEBASE", render_codebase(ex)},
                              {"PROBLEM_STATEMENT", ex.statement}},
                             sample_tag, config_.solver_temperature, config_.solver_max_tokens);
    Prediction p;
    p.example_id = ex.id;
    p.model_name = resolve_role(config_.roles, Role::solver).model_name;
    p.raw_text = resp.text;
    p.truncated = resp.finish_reason == FinishReason::length;
    try {
        p.payload = extract_code_block(resp.text);
        p.extracted = true;
    } catch (const ParseError&) {
        p.extracted = false;
    }
    return p;
}

Prediction Harness::solve_math(const math::ComposedMathProblem& ex, bool sentence_variant,
                               const std::string& sample_tag) {
    ChatResponse resp = call(Role::solver,
                             sentence_variant ? "math_solve_sentence" : "math_solve",
                             {{"QUESTION", math::composed_text(ex)}}, sample_tag,
                             config_.solver_temperature, config_.solver_max_tokens);
    Prediction p;
    p.example_id = ex.id;
    p.model_name = resolve_role(config_.roles, Role::solver).model_name;
    p.raw_text = resp.text;
    p.truncated = resp.finish_reason == FinishReason::length;
    try {
        p.payload = parse_final_number(resp.text).to_string();
        p.extracted = true;
    } catch (const ParseError&) {
        p.extracted = false;
    }
    return p;
}

ExampleVerdict Harness::judge_qa_accuracy(const qa::QAExample& ex, const Prediction& pred) {
    ExampleVerdict v;
    v.example_id = ex.id;
    v.truncated = pred.truncated;
    if (!pred.extracted) return v;
    ChatResponse resp = call(Role::judge, "qa_evaluation",
                             {{"QUESTION", ex.gold.question},
                              {"IRRELEVANT_ANSWERS", irrelevant_answers_text(ex)},
                              {"GROUND_TRUTH_ANSWER", bullets(ex.gold.points)},
                              {"PREDICTION", pred.payload}},
                             "", 0.0, 1024);
    try {
        v.correct = parse_verdict(resp.text, VerdictStyle::FirstWord());
    } catch (const ParseError&) {
        v.judge_parse_failed = true;
        v.correct = false;
    }
    v.value = v.correct ? 1.0 : 0.0;
    return v;
}

ExampleVerdict Harness::judge_k_precision(const qa::QAExample& ex, const Prediction& pred) {
    ExampleVerdict v;
    v.example_id = ex.id;
    v.truncated = pred.truncated;
    if (!pred.extracted) return v;
    ChatResponse resp = call(Role::judge, "qa_precision",
                             {{"DOCUMENTS", render_documents(ex)},
                              {"QUESTION", ex.gold.question},
                              {"ANSWER_POINTS", pred.payload}},
                             "", 0.0, 1024);
    double precision = 0.0;
    bool found = false;
    for (const auto& raw : strings::split_lines(resp.text)) {
        std::string line = strings::trim(raw);
        std::size_t pos = strings::lower(line).find("precision:");
        if (pos == std::string::npos) continue;
        std::string rest = strings::trim(line.substr(pos + 10));
        std::string token;
        for (char c : rest) {
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == '-')
                token.push_back(c);
            else if (!token.empty())
                break;
        }
        while (!token.empty() && token.back() == '.') token.pop_back();
        if (auto d = Decimal::parse(token)) {
            precision = d->to_double();
            found = true;
            break;
        }
    }
    if (!found) {
        v.judge_parse_failed = true;
        precision = 0.0;
    }
    v.value = std::clamp(precision, 0.0, 100.0);
    v.correct = v.value >= 100.0;
    return v;
}

ExampleVerdict Harness::judge_recall(const qa::QAExample& ex, const Prediction& pred) {
    ExampleVerdict v;
    v.example_id = ex.id;
    v.truncated = pred.truncated;
    if (!pred.extracted) return v;
    bool all_included = true;
    for (const auto& point : ex.gold.points) {
        ChatResponse resp = call(Role::judge, "qa_recall",
                                 {{"QUESTION", ex.gold.question},
                                  {"STATEMENT", point},
                                  {"REFERENCE_POINTS", pred.payload}},
                                 "", 0.0, 1024);
        try {
            if (!parse_verdict(resp.text, VerdictStyle::FirstWord())) all_included = false;
        } catch (const ParseError&) {
            v.judge_parse_failed = true;
            all_included = false;
        }
    }
    v.correct = all_included;
    v.value = v.correct ? 1.0 : 0.0;
    return v;
}

ExampleVerdict Harness::score_code_pass1(const code::CodeExample& ex, const Prediction& pred) {
    ExampleVerdict v;
    v.example_id = ex.id;
    v.truncated = pred.truncated;
    if (!pred.extracted) return v;
    std::map<std::string, std::string> files = ex.repo.files;
    files[ex.answer_file] = pred.payload;
    files["run_test" + config_.sandbox.source_extension] = ex.gold_test;
    Workspace ws = Workspace::materialize(files);
    if (config_.sandbox.keep_workspaces) ws.keep();
    SandboxLimits limits;
    limits.wall_ms = config_.sandbox.wall_ms;
    limits.keep_workspace = config_.sandbox.keep_workspaces;
    ExecResult r = execute(ws, config_.sandbox.interpreter,
                           "run_test" + config_.sandbox.source_extension, limits);
    v.correct = r.status == ExecStatus::pass;
    v.value = v.correct ? 1.0 : 0.0;
    return v;
}

ExampleVerdict Harness::score_math_exact(const math::ComposedMathProblem& ex,
                                         const Prediction& pred) {
    ExampleVerdict v;
    v.example_id = ex.id;
    v.truncated = pred.truncated;
    if (!pred.extracted) return v;
    auto d = Decimal::parse(pred.payload);
    if (!d) return v;
    v.correct = numeric_exact_match(*d, ex.answer);
    v.value = v.correct ? 1.0 : 0.0;
    return v;
}

MetricReport Harness::evaluate_qa(const std::vector<qa::QAExample>& examples, Metric kind) {
    if (kind != Metric::accuracy && kind != Metric::k_precision && kind != Metric::recall)
        throw std::invalid_argument("metric not applicable to the QA domain: " +
                                    metric_name(kind));
    std::vector<ExampleVerdict> verdicts;
    for (const auto& ex : examples) {
        Prediction pred = solve_qa(ex);
        switch (kind) {
            case Metric::accuracy: verdicts.push_back(judge_qa_accuracy(ex, pred)); break;
            case Metric::k_precision: verdicts.push_back(judge_k_precision(ex, pred)); break;
            default: verdicts.push_back(judge_recall(ex, pred)); break;
        }
    }
    return aggregate_report(resolve_role(config_.roles, Role::solver).model_name, "qa", kind,
                            std::move(verdicts));
}

MetricReport Harness::evaluate_code(const std::vector<code::CodeExample>& examples) {
    std::vector<ExampleVerdict> verdicts;
    for (const auto& ex : examples) verdicts.push_back(score_code_pass1(ex, solve_code(ex)));
    return aggregate_report(resolve_role(config_.roles, Role::solver).model_name, "code",
                            Metric::pass1, std::move(verdicts));
}

MetricReport Harness::evaluate_math(const std::vector<math::ComposedMathProblem>& examples,
                                    bool sentence_variant) {
    std::vector<ExampleVerdict> verdicts;
    for (const auto& ex : examples)
        verdicts.push_back(score_math_exact(ex, solve_math(ex, sentence_variant)));
    return aggregate_report(resolve_role(config_.roles, Role::solver).model_name, "math",
                            Metric::exact_match, std::move(verdicts));
}

}  // namespace eval
}  // namespace chase

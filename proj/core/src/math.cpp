#include "chase/math.hpp"

#include <cctype>
#include <cstdio>
#include <sstream>

namespace chase {
namespace math {

namespace {

std::string normalize_ws_lower(const std::string& s) {
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

std::string join_chain(const std::vector<std::string>& chain) {
    std::string out;
    for (const auto& c : chain) {
        if (!out.empty()) out += " ";
        out += c;
    }
    return out;
}

std::optional<Decimal> parse_number_field(const std::string& raw) {
    std::string cleaned;
    for (char c : strings::trim(raw)) {
        if (c == '$' || c == ',' || c == '*') continue;
        cleaned.push_back(c);
    }
    cleaned = strings::trim(cleaned);
    while (!cleaned.empty() && cleaned.back() == '.') cleaned.pop_back();
    return Decimal::parse(cleaned);
}

bool standalone_number_occurs(const std::string& text, const std::string& numeral) {
    auto digit = [](char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; };
    std::size_t pos = 0;
    while ((pos = text.find(numeral, pos)) != std::string::npos) {
        bool left_ok = pos == 0 || (!digit(text[pos - 1]) && text[pos - 1] != '.');
        std::size_t after = pos + numeral.size();
        bool right_ok = after >= text.size() ||
                        (!digit(text[after]) &&
                         !(text[after] == '.' && after + 1 < text.size() && digit(text[after + 1])));
        if (left_ok && right_ok) return true;
        pos = after;
    }
    return false;
}

}  // namespace

bool leaks_answer(const std::string& context, const Decimal& answer) {
    std::vector<std::string> renderings;
    std::string canon = answer.to_string();
    renderings.push_back(canon);
    if (answer.is_integer()) {
        renderings.push_back(canon + ".0");
        renderings.push_back(canon + ".00");
    } else {
        renderings.push_back(canon + "0");
        renderings.push_back(canon + "00");
    }
    for (const auto& r : renderings)
        if (standalone_number_occurs(context, r)) return true;
    return false;
}

FilterOutcome posthoc_classify(const std::vector<std::optional<Decimal>>& verifier_answers,
                               const Decimal& gold, int k) {
    if (k <= 1) throw std::invalid_argument("posthoc filter requires k > 1");
    const int n = static_cast<int>(verifier_answers.size());
    if (n < k) throw std::invalid_argument("fewer verifiers than k");

    int gold_matches = 0;
    std::vector<std::pair<Decimal, int>> other_counts;
    for (const auto& a : verifier_answers) {
        if (!a) continue;
        if (numeric_exact_match(*a, gold)) {
            ++gold_matches;
            continue;
        }
        bool found = false;
        for (auto& [v, c] : other_counts)
            if (numeric_exact_match(*a, v)) {
                ++c;
                found = true;
            }
        if (!found) other_counts.push_back({*a, 1});
    }
    for (const auto& [v, c] : other_counts)
        if (2 * c > n) return FilterOutcome::discarded;
    if (gold_matches >= k) return FilterOutcome::kept;
    return FilterOutcome::flagged;
}

std::string composed_text(const ComposedMathProblem& p) {
    return join_chain(p.context_chain) + " " + p.question;
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

std::optional<SeedProblem> Pipeline::breakdown_seed(const std::string& problem,
                                                    const Decimal& answer,
                                                    const std::string& tag) {
    ledger_.record_attempt("math.breakdown");
    try {
        ChatResponse resp = call(Role::generator, "math_break",
                                 {{"QUESTION", problem}, {"ANSWER", answer.to_string()}}, tag);
        FormatSpec spec;
        spec.fields = {
            {"Original context [without question statement]", FieldKind::block, false},
            {"Question statement", FieldKind::line, false},
            {"Original answer", FieldKind::line, false},
            {"Original answer statement", FieldKind::line, false},
        };
        ParsedRecord rec = parse_record(spec, resp.text);
        SeedProblem seed;
        seed.problem = problem;
        seed.context = rec.values.at("Original context [without question statement]");
        seed.question = rec.values.at("Question statement");
        seed.answer_statement = rec.values.at("Original answer statement");
        auto parsed = parse_number_field(rec.values.at("Original answer"));
        if (!parsed) throw ParseError("original answer is not numeric");
        seed.answer = *parsed;

        if (seed.context.empty()) throw ParseError("empty context after breakdown");
        if (!numeric_exact_match(seed.answer, answer))
            throw ParseError("breakdown changed the answer");
        if (normalize_ws_lower(problem).find(normalize_ws_lower(seed.question)) ==
            std::string::npos)
            throw ParseError("question statement not contained in the original problem");
        ledger_.record_accept("math.breakdown");
        return seed;
    } catch (const std::exception& e) {
        ledger_.record_discard("math.breakdown", e.what());
        return std::nullopt;
    }
}

std::optional<Continuation> Pipeline::generate_continuation(const SeedProblem& current,
                                                            const std::string& tag) {
    ledger_.record_attempt("math.continuation");
    try {
        ChatResponse resp = call(Role::generator, "math_extend",
                                 {{"CONTEXT", current.context},
                                  {"QUESTION_STATEMENT", current.question},
                                  {"ANSWER", current.answer.to_string()},
                                  {"ANSWER_STATEMENT", current.answer_statement}},
                                 tag);
        FormatSpec spec;
        spec.fields = {
            {"New operation over original answer", FieldKind::line, false},
            {"New context [Do not mention original answer]", FieldKind::block, false},
            {"New question statement", FieldKind::line, false},
            {"New answer reasoning", FieldKind::block, false},
            {"New answer [Number only]", FieldKind::line, false},
        };
        ParsedRecord rec = parse_record(spec, resp.text);
        Continuation cont;
        cont.operation = rec.values.at("New operation over original answer");
        cont.new_context = rec.values.at("New context [Do not mention original answer]");
        cont.new_question = rec.values.at("New question statement");
        cont.reasoning = rec.values.at("New answer reasoning");
        auto parsed = parse_number_field(rec.values.at("New answer [Number only]"));
        if (!parsed) throw ParseError("new answer is not numeric");
        cont.new_answer = *parsed;

        if (cont.new_context.empty() || cont.new_question.empty())
            throw ParseError("empty continuation context or question");
        if (leaks_answer(cont.new_context, current.answer))
            throw ParseError("new context leaks the previous answer");
        ledger_.record_accept("math.continuation");
        return cont;
    } catch (const std::exception& e) {
        ledger_.record_discard("math.continuation", e.what());
        return std::nullopt;
    }
}

ComposedMathProblem Pipeline::combine(const ComposedMathProblem& current,
                                      const Continuation& cont) {
    ComposedMathProblem next = current;
    next.context_chain.push_back(cont.new_context);
    next.question = cont.new_question;
    next.answer = cont.new_answer;
    next.depth = static_cast<int>(next.context_chain.size());
    return next;
}

bool Pipeline::verify_ensemble(const std::string& context, const std::string& question,
                               const Decimal& gold) {
    auto it = prompts_.find("math_solve");
    if (it == prompts_.end()) throw ConfigError("prompt template not loaded: math_solve");
    for (const ModelEndpoint& verifier : config_.math_verifiers()) {
        ChatRequest req;
        req.system_text = it->second.system_text;
        req.user_text = render(it->second, {{"QUESTION", context + " " + question}});
        req.role_tag = Role::verifier;
        req.temperature = 0.0;
        req.max_tokens = 1024;
        ChatResponse resp = client_.complete(verifier, req);
        try {
            Decimal got = parse_final_number(resp.text);
            if (!numeric_exact_match(got, gold)) return false;
        } catch (const ParseError&) {
            return false;
        }
    }
    return true;
}

std::optional<ComposedMathProblem> Pipeline::iterate_depth(const SeedProblem& seed,
                                                           const std::string& seed_id,
                                                           const std::string& pass_tag) {
    const PipelineParams& p = config_.params;
    ComposedMathProblem composed;
    composed.seed_id = seed_id;
    composed.context_chain = {seed.context};
    composed.question = seed.question;
    composed.answer = seed.answer;
    composed.depth = 1;

    SeedProblem current = seed;
    for (int iter = 0; iter < p.continuation_iters && composed.depth < p.depth_max; ++iter) {
        auto cont = generate_continuation(current, pass_tag + ".i" + std::to_string(iter));
        if (!cont) continue;
        ComposedMathProblem candidate = combine(composed, *cont);
        if (!verify_ensemble(join_chain(candidate.context_chain), candidate.question,
                             candidate.answer)) {
            ledger_.record_attempt("math.verify");
            ledger_.record_discard("math.verify", "ensemble disagreed with the new answer");
            continue;  // revert: composed/current stay at the last accepted state
        }
        ledger_.record_attempt("math.verify");
        ledger_.record_accept("math.verify");
        composed = std::move(candidate);
        current.context = join_chain(composed.context_chain);
        current.question = composed.question;
        current.answer = composed.answer;
        current.answer_statement =
            "The answer to the question \"" + current.question + "\" is " +
            current.answer.to_string() + ".";
        current.problem = current.context + " " + current.question;
    }
    if (composed.depth < p.depth_min) return std::nullopt;
    return composed;
}

std::vector<ComposedMathProblem> Pipeline::generate(
    const std::vector<std::pair<std::string, Decimal>>& seeds, int target_count) {
    config_.params.validate();
    std::vector<ComposedMathProblem> out;
    for (int pass = 0; pass < config_.params.passes; ++pass) {
        for (std::size_t s = 0; s < seeds.size(); ++s) {
            if (target_count > 0 && static_cast<int>(out.size()) >= target_count) return out;
            const std::string tag = "p" + std::to_string(pass) + ".s" + std::to_string(s);
            ledger_.record_attempt("math.seed");
            auto seed = breakdown_seed(seeds[s].first, seeds[s].second, tag);
            if (!seed) {
                ledger_.record_discard("math.seed", "breakdown failed");
                continue;
            }
            auto composed = iterate_depth(*seed, "seed-" + std::to_string(s), tag);
            if (!composed) {
                ledger_.record_discard("math.seed", "no problem above minimum depth");
                continue;
            }
            char idbuf[16];
            std::snprintf(idbuf, sizeof idbuf, "math-%05d", static_cast<int>(out.size()));
            composed->id = idbuf;
            composed->provenance = "seed=" + std::to_string(s) + ";pass=" + std::to_string(pass) +
                                   ";depth=" + std::to_string(composed->depth);
            ledger_.record_accept("math.seed");
            out.push_back(std::move(*composed));
        }
    }
    return out;
}

}  // namespace math
}  // namespace chase

#include "scripted.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <optional>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "chase/decimal.hpp"
#include "chase/promptkit.hpp"

#ifndef CHASE_PROMPT_DIR
#error "CHASE_PROMPT_DIR must be defined by the build"
#endif

namespace fs = std::filesystem;

namespace testsupport {

std::uint64_t fnv64(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string hex8(std::uint64_t v) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%08llx",
                  static_cast<unsigned long long>(v & 0xffffffffULL));
    return buf;
}

TempDir::TempDir() {
    static std::atomic<std::uint64_t> counter{0};
    path_ = (fs::temp_directory_path() /
             ("chase-test-" + std::to_string(::getpid()) + "-" +
              std::to_string(counter.fetch_add(1))))
                .string();
    fs::create_directories(path_);
}

TempDir::~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
}

chase::RunConfig make_test_config(const std::string& cache_dir, chase::CacheMode mode) {
    chase::RunConfig cfg;
    auto ep = [](const std::string& model) {
        chase::ModelEndpoint e;
        e.provider_id = "scripted";
        e.model_name = model;
        e.base_url = "http://127.0.0.1:1";
        e.credential_env = "CHASE_TEST_API_KEY";
        return e;
    };
    cfg.roles.by_role["generator"] = ep("alpha-gen");
    cfg.roles.by_role["verifier"] = ep("alpha-ver");
    cfg.roles.by_role["judge"] = ep("alpha-judge");
    cfg.roles.by_role["solver"] = ep("alpha-solve");
    cfg.verifier_ensemble = {ep("alpha-ver"), ep("beta-ver")};
    cfg.params.irrelevant_qa_count = 2;
    cfg.params.m_irrelevant_functions = 12;
    cfg.params.continuation_iters = 6;
    cfg.params.depth_min = 2;
    cfg.params.depth_max = 4;
    cfg.params.passes = 1;
    cfg.params.rng_seed = 42;
    cfg.cache_mode = mode;
    cfg.cache_dir = cache_dir;
    cfg.prompt_dir = CHASE_PROMPT_DIR;
    return cfg;
}

const std::map<std::string, chase::PromptTemplate>& test_prompts() {
    static const std::map<std::string, chase::PromptTemplate> lib =
        chase::load_prompt_library(CHASE_PROMPT_DIR);
    return lib;
}

namespace {

using chase::Decimal;
using chase::strings::bullet_points;
using chase::strings::split_lines;
using chase::strings::trim;

std::string norm(const std::string& s) {
    std::string out;
    bool space = false;
    for (char c : trim(s)) {
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

std::string after(const std::string& s, const std::string& marker) {
    std::size_t pos = s.find(marker);
    if (pos == std::string::npos) return {};
    return s.substr(pos + marker.size());
}

std::string between(const std::string& s, const std::string& a, const std::string& b) {
    std::size_t pos = s.find(a);
    if (pos == std::string::npos) return {};
    pos += a.size();
    std::size_t end = s.find(b, pos);
    if (end == std::string::npos) return s.substr(pos);
    return s.substr(pos, end - pos);
}

std::string first_line(const std::string& s) {
    std::size_t nl = s.find('\n');
    return trim(nl == std::string::npos ? s : s.substr(0, nl));
}

// Word following "case " in a question, with trailing punctuation stripped.
std::string case_token(const std::string& question) {
    std::string rest = after(question, "case ");
    std::string token;
    for (char c : rest) {
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_')
            token.push_back(c);
        else
            break;
    }
    return token;
}

int helper_offset(const std::string& name) {
    return static_cast<int>(fnv64(name) % 89) + 1;
}

struct Decl {
    std::string name;
    std::string file;
};

std::vector<Decl> find_declarations(const std::string& text) {
    std::vector<Decl> out;
    for (const auto& raw : split_lines(text)) {
        std::string line = trim(raw);
        if (line.rfind("Function \"", 0) != 0) continue;
        std::size_t q2 = line.find('"', 10);
        if (q2 == std::string::npos) continue;
        std::size_t infile = line.find("in file \"", q2);
        if (infile == std::string::npos) continue;
        std::size_t fstart = infile + 9;
        std::size_t q4 = line.find('"', fstart);
        if (q4 == std::string::npos) continue;
        out.push_back({line.substr(10, q2 - 10), line.substr(fstart, q4 - fstart)});
    }
    return out;
}

std::string stem_of(const std::string& file) {
    std::size_t dot = file.rfind('.');
    return dot == std::string::npos ? file : file.substr(0, dot);
}

std::optional<Decimal> number_at(const std::string& s, std::size_t pos) {
    std::string token;
    if (pos < s.size() && s[pos] == '-') token.push_back(s[pos++]);
    while (pos < s.size() &&
           (std::isdigit(static_cast<unsigned char>(s[pos])) || s[pos] == '.'))
        token.push_back(s[pos++]);
    while (!token.empty() && token.back() == '.') token.pop_back();
    return Decimal::parse(token);
}

std::optional<Decimal> number_after(const std::string& s, const std::string& marker) {
    std::size_t pos = s.find(marker);
    if (pos == std::string::npos) return std::nullopt;
    return number_at(s, pos + marker.size());
}

// ---- QA handlers ---------------------------------------------------------

std::string handle_qa_scenarios(const std::string& u) {
    std::string h = hex8(fnv64(u));
    std::ostringstream out;
    for (int i = 1; i <= 5; ++i) {
        out << "USER_PERSONA: Persona " << h << "-" << i << "\n"
            << "COLLECTION_OF_DOCS: Collection " << h << "-" << i << " archive\n\n";
    }
    return out.str();
}

std::vector<std::string> qa_points_for(const std::string& h, int count) {
    std::vector<std::string> pts;
    for (int k = 1; k <= count; ++k)
        pts.push_back("Complete procedure step " + h + "-" + std::to_string(k) +
                      " at the designated office");
    return pts;
}

std::string handle_qa_pair(const std::string& u, const std::string& tag) {
    std::string h = hex8(fnv64(u + "|" + tag));
    auto pts = qa_points_for(h, 4);
    std::ostringstream out;
    out << "Question: What are the required steps for case " << h << "?\n"
        << "Answer:\n";
    for (const auto& p : pts) out << "- " << p << "\n";
    out << "\n"
        << "Document 1 Title: Case " << h << " Guide Part 1\n"
        << "Document 1 Answer points assigned:\n- " << pts[0] << "\n- " << pts[1] << "\n\n"
        << "Document 2 Title: Case " << h << " Guide Part 2\n"
        << "Document 2 Answer points assigned:\n- " << pts[2] << "\n\n"
        << "Document 3 Title: Case " << h << " Guide Part 3\n"
        << "Document 3 Answer points assigned:\n- " << pts[3] << "\n";
    return out.str();
}

std::string handle_qa_adversarial(const std::string& u, const std::string& tag) {
    std::string h2 = hex8(fnv64(u + "|" + tag));
    std::ostringstream out;
    out << "Adversarial Question: Which alternate filings apply to the unrelated case "
        << h2 << "?\n"
        << "Adversarial Answer:\n";
    std::vector<std::string> pts;
    for (int k = 1; k <= 3; ++k)
        pts.push_back("Submit alternate filing " + h2 + "-" + std::to_string(k) +
                      " at the records annex");
    for (const auto& p : pts) out << "- " << p << "\n";
    out << "\n";
    for (int i = 1; i <= 3; ++i) {
        out << "Adversarial Document " << i << " Title: Case " << h2 << " Annex Part " << i
            << "\n"
            << "Adversarial Document " << i << " Answer points assigned:\n- " << pts[i - 1]
            << "\n\n";
    }
    return out.str();
}

std::string handle_qa_cross_check(const std::string& u) {
    std::string question = first_line(after(u, "Question: "));
    std::string hq = case_token(question);
    bool relevant = false;
    for (const auto& b : bullet_points(after(u, "Answer:")))
        if (!hq.empty() && b.find(hq) != std::string::npos) relevant = true;
    return std::string("Relevance: ") + (relevant ? "True" : "False") + "\n";
}

std::string handle_qa_documents(const std::string& u) {
    std::string question = first_line(after(u, "The question-answer pair is:\n\nQuestion: "));
    std::string hq = case_token(question);
    std::string outline = between(u, "Given below are the assigned answer points for each document.\n\n",
                                  "\n\nYour job is to create long documents");
    chase::FormatSpec spec;
    spec.group = chase::GroupSpec{
        "Document",
        {{"Title", chase::FieldKind::line, false},
         {"Answer points assigned", chase::FieldKind::list, false}}};
    chase::ParsedRecord rec = chase::parse_record(spec, outline);

    std::ostringstream out;
    int i = 1;
    for (const auto& g : rec.groups) {
        const std::string title = g.at("Title");
        auto pts = bullet_points(g.at("Answer points assigned"));
        out << "Document " << i << ":\n"
            << "Title: " << title << "\n"
            << "Question: " << question << "\n"
            << "Answer points assigned [Only these points must be covered with respect to "
               "the question]:\n";
        for (const auto& p : pts) out << "- " << p << "\n";
        out << "Other unrelated points created:\n";
        for (int j = 1; j <= 10; ++j)
            out << "- Unrelated operational note " << j << " about facility logistics\n";
        out << "Text:\n";
        int f = 1;
        for (const auto& p : pts) {
            // A little filler between points so they are embedded, not listed.
            out << "Routine filler passage " << f++ << " for " << title
                << " covers shelving habits, signage updates, staffing rotations, lighting "
                   "checks, scheduling notes, and archival routines in broadly general "
                   "terms.\n";
            out << "One important point regarding case " << hq << ": " << p << ".\n";
        }
        for (; f <= 64; ++f) {
            out << "Routine filler passage " << f << " for " << title
                << " covers shelving habits, signage updates, staffing rotations, lighting "
                   "checks, scheduling notes, and archival routines in broadly general "
                   "terms.\n";
        }
        out << "\n";
        ++i;
    }
    return out.str();
}

std::string handle_qa_verify_extra(const std::string& u) {
    std::string doc = between(u, "Document:\n", "\n\nQuestion:");
    bool extra = doc.find("EXTRA MAJOR POINT") != std::string::npos;
    return std::string("Presence of Extra Points: ") + (extra ? "True" : "False") +
           "\nExtra Points Mentioned (if any):\nNone.\n";
}

std::string handle_qa_verify_presence(const std::string& u) {
    std::string doc = between(u, "Document:\n", "\n\nQuestion:");
    std::string question = first_line(after(u, "\nQuestion: "));
    std::string point = trim(between(u, "Answer Point:\n", "\n\nGive output"));
    std::string hq = case_token(question);
    bool present = !point.empty() && norm(doc).find(norm(point)) != std::string::npos;
    bool relevant = present && !hq.empty() &&
                    doc.find("regarding case " + hq) != std::string::npos;
    std::ostringstream out;
    out << "Presence: " << (present ? "True" : "False") << "\n"
        << "Explanation for Presence: checked by verbatim scan.\n\n"
        << "Relevance: " << (relevant ? "True" : "False") << "\n"
        << "Explanation for Relevance: checked against the question's case identifier.\n";
    return out.str();
}

std::string handle_qa_solve(const std::string& u) {
    std::string docs = between(u, "Documents:\n", "\n\nQuestion:");
    std::string question = first_line(after(u, "\n\nQuestion: "));
    std::string hq = case_token(question);
    const std::string prefix = "One important point regarding case " + hq + ": ";
    std::vector<std::string> found;
    for (const auto& raw : split_lines(docs)) {
        std::string line = trim(raw);
        if (line.rfind(prefix, 0) != 0) continue;
        std::string point = line.substr(prefix.size());
        if (!point.empty() && point.back() == '.') point.pop_back();
        found.push_back(point);
    }
    if (hq.empty() || found.empty())
        return "No relevant information found in the documents.\n";
    std::ostringstream out;
    for (const auto& p : found) out << "- " << p << "\n";
    return out.str();
}

std::string handle_qa_evaluation(const std::string& u) {
    std::string gold = between(u, "Ground-truth Answer: ", "\n\nPrediction:");
    std::string irrelevant = between(u, "Irrelevant Answers: ", "\n\nGround-truth Answer:");
    std::string pred = norm(between(u, "Prediction: ", "\n\nResult:"));
    bool ok = true;
    for (const auto& b : bullet_points(gold))
        if (pred.find(norm(b)) == std::string::npos) ok = false;
    for (const auto& b : bullet_points(irrelevant))
        if (pred.find(norm(b)) != std::string::npos) ok = false;
    if (ok) return "True\n";
    return "False. The prediction is missing ground-truth points or includes points from "
           "the irrelevant answers.\n";
}

std::string handle_qa_precision(const std::string& u) {
    std::string docs = norm(between(u, "Documents: ", "\n\nQuestion:"));
    auto pts = bullet_points(between(u, "Answer Points: ", "\n\nResult:"));
    int hits = 0;
    for (const auto& p : pts)
        if (docs.find(norm(p)) != std::string::npos) ++hits;
    double pct = pts.empty() ? 0.0 : 100.0 * hits / static_cast<double>(pts.size());
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", pct);
    return std::string("Precision: ") + buf + "\n";
}

std::string handle_qa_recall(const std::string& u) {
    std::string statement = first_line(after(u, "Statement: "));
    std::string refs = norm(between(u, "Reference Points: ", "\n\nResult:"));
    bool ok = !statement.empty() && refs.find(norm(statement)) != std::string::npos;
    if (ok) return "True\n";
    return "False. The statement does not appear among the reference points.\n";
}

// ---- Code handlers -------------------------------------------------------

std::string handle_code_helper(const std::string& u, const std::string& tag) {
    std::string h = hex8(fnv64(u + "#" + tag));
    std::ostringstream out;
    for (int i = 1; i <= 5; ++i) {
        std::string name = "helper_" + h + "_" + std::to_string(i);
        std::string file = "mod_" + h + "_" + std::to_string(i) + ".py";
        int k = helper_offset(name);
        out << "Function " << i << ":\n"
            << "Parameters:\n- values: list of int\n"
            << "Objectives:\n"
            << "- Sum every entry of the list values into a single running total\n"
            << "- Add the fixed calibration offset of " << k << " units to the running total\n"
            << "- Return the adjusted total as the single result\n\n"
            << "Function \"" << name << "\" in file \"" << file << "\":\n"
            << "def " << name << "(values):\n"
            << "    total = sum(values)\n"
            << "    return total + " << k << "\n\n";
    }
    return out.str();
}

std::string handle_code_verify_execution(const std::string& u) {
    auto decls = find_declarations(u);
    if (decls.empty()) throw std::runtime_error("scripted: no declaration in exec-check prompt");
    std::ostringstream out;
    out << "```python\n"
        << "from " << stem_of(decls[0].file) << " import " << decls[0].name << "\n\n"
        << "values = [1, 2, 3]\n"
        << "return_total = " << decls[0].name << "(values)\n"
        << "```\n";
    return out.str();
}

std::string compose_solution(const std::string& fn, const std::vector<Decl>& helpers, int c) {
    std::ostringstream out;
    for (const auto& d : helpers)
        out << "from " << stem_of(d.file) << " import " << d.name << "\n";
    out << "\n"
        << "def " << fn << "(a, b):\n"
        << "    values = [a, b]\n"
        << "    total = 0\n";
    for (const auto& d : helpers) out << "    total += " << d.name << "(values)\n";
    out << "    total += " << c << "\n"
        << "    return total\n";
    return out.str();
}

std::string handle_code_problem(const std::string& u, const std::string& tag) {
    auto decls = find_declarations(u);
    if (decls.size() < 4) throw std::runtime_error("scripted: fewer than 4 helpers in prompt");
    std::vector<Decl> relevant(decls.begin(), decls.begin() + 4);
    int c = static_cast<int>(fnv64(u) % 47) + 3;
    std::string fx = hex8(fnv64(u + "#" + tag));
    std::string fn = "compose_" + fx;
    std::ostringstream out;
    out << "Parameters:\n- a: int\n- b: int\n"
        << "Objectives:\n"
        << "- Accept the integer parameters a and b and build a list named values holding a "
           "first and b second\n"
        << "- Feed the list values to each required library routine exactly once and collect "
           "each routine's numeric output\n"
        << "- Maintain a running integer total named total that starts at zero and absorbs "
           "every collected output\n"
        << "- After absorbing the collected outputs, add the fixed constant " << c
        << " to total\n"
        << "- Never mutate the parameters a and b while computing intermediate values\n"
        << "- Return total from the function named " << fn << " as its only result\n\n"
        << "Function \"" << fn << "\" in file \"" << fn << ".py\":\n"
        << compose_solution(fn, relevant, c);
    return out.str();
}

std::string handle_code_test(const std::string& u) {
    // Only the ANSWER_FUNCTION section; the instruction boilerplate below it
    // contains look-alike "from <filename> import <function_name>" lines.
    std::string section = between(u, "test all scenarios.\n\n", "\n\nFollow these instructions");
    auto decls = find_declarations(section);
    if (decls.empty()) throw std::runtime_error("scripted: no declaration in test prompt");
    const Decl& answer = decls[0];
    // Helper routines called by the answer code, recovered from its imports.
    std::vector<std::string> helper_names;
    for (const auto& raw : split_lines(section)) {
        std::string line = trim(raw);
        if (line.rfind("from ", 0) != 0) continue;
        std::size_t imp = line.find(" import ");
        if (imp == std::string::npos) continue;
        helper_names.push_back(trim(line.substr(imp + 8)));
    }
    // The last "+= <number>" line carries the constant; scan for it.
    std::optional<Decimal> c;
    std::size_t pos = 0;
    while ((pos = section.find("    total += ", pos)) != std::string::npos) {
        if (auto d = number_at(section, pos + 13)) c = d;
        pos += 13;
    }
    if (!c) throw std::runtime_error("scripted: no constant found in answer code");
    // Independent recomputation with a = 2, b = 3: each helper contributes
    // sum([2, 3]) plus its calibration offset.
    long long expected = static_cast<long long>(c->to_double());
    for (const auto& name : helper_names) expected += 5 + helper_offset(name);
    std::ostringstream out;
    out << "```python\n"
        << "from " << stem_of(answer.file) << " import " << answer.name << "\n\n"
        << "a = 2\n"
        << "b = 3\n"
        << "return_total = " << answer.name << "(a, b)\n\n"
        << "correct_total = " << expected << "\n"
        << "assert return_total == correct_total\n"
        << "```\n";
    return out.str();
}

std::string statement_function_name(const std::string& statement) {
    std::size_t pos = statement.find("compose_");
    if (pos == std::string::npos) return "solve";
    std::string name;
    while (pos < statement.size() &&
           (std::isalnum(static_cast<unsigned char>(statement[pos])) ||
            statement[pos] == '_'))
        name.push_back(statement[pos++]);
    return name;
}

std::string handle_code_verify_problem(const std::string& u) {
    std::string codebase = between(u, "Codebase:\n\n", "\n\nProblem Statement:");
    std::string statement = between(u, "Problem Statement:\n\n", "\n\nGive output");
    auto decls = find_declarations(codebase);
    auto c = number_after(statement, "add the fixed constant ");
    if (decls.empty() || !c)
        throw std::runtime_error("scripted: sufficiency prompt missing helpers or constant");
    std::string fn = statement_function_name(statement);
    return "```python\n" + compose_solution(fn, decls, static_cast<int>(c->to_double())) +
           "```\n";
}

std::string handle_code_solve(const std::string& u) {
    std::string statement = between(u, "Problem Statement:\n\n", "\n\nGive output");
    std::string fn = statement_function_name(statement);
    // A weak but well-formed attempt: correct shape, wrong value.
    return "```python\ndef " + fn + "(a, b):\n    return 0\n```\n";
}

// ---- Math handlers -------------------------------------------------------

std::string handle_math_break(const std::string& u) {
    std::string q = between(u, "Q: ", "\nA: ");
    std::string ans = first_line(after(u, "\nA: "));
    std::size_t split = q.rfind(". ");
    std::string context = split == std::string::npos ? q : q.substr(0, split + 1);
    std::string question = split == std::string::npos ? q : q.substr(split + 2);
    std::ostringstream out;
    out << "Original context [without question statement]:\n"
        << context << "\n"
        << "Question statement: " << question << "\n"
        << "Original answer: " << ans << "\n"
        << "Original answer statement: The final tally comes to " << ans << ".\n";
    return out.str();
}

std::string handle_math_extend(const std::string& u, const std::string& tag) {
    std::string ctx = between(u, "Context: ", "\nQuestion statement:");
    std::string ans = first_line(after(u, "\nAnswer: "));
    auto a = Decimal::parse(trim(ans));
    if (!a) throw std::runtime_error("scripted: extend prompt has no numeric answer");

    int op;
    long long k;
    bool wrong = false;
    std::string question = "What is the value of the final tally now?";
    if (ctx.find(" pens") != std::string::npos) {
        op = 1;  // the pens walkthrough: multiply by three
        k = 3;
        question = "How many pens are there in total now?";
    } else {
        std::uint64_t v = fnv64(u + "#" + tag);
        op = static_cast<int>(v % 3);
        k = 2 + static_cast<long long>((v >> 2) % 7);
        wrong = v % 11 == 0;  // occasional bad arithmetic, for the ensemble to catch
    }
    Decimal kd(k);
    Decimal result;
    std::string op_text, sentence;
    if (op == 0) {
        result = *a + kd;
        op_text = "add " + std::to_string(k);
        sentence = "Later on, a careful assistant increases the running tally by adding the "
                   "number " + std::to_string(k) + " to the previous result.";
    } else if (op == 1) {
        result = *a * kd;
        op_text = "multiply by " + std::to_string(k);
        sentence = "Later on, a careful assistant scales the running tally by multiplying "
                   "the previous result by " + std::to_string(k) + ".";
    } else {
        result = *a - kd;
        op_text = "subtract " + std::to_string(k);
        sentence = "Later on, a careful assistant reduces the running tally by subtracting "
                   "the number " + std::to_string(k) + " from the previous result.";
    }
    if (wrong) result = result + Decimal(1);
    std::ostringstream out;
    out << "New operation over original answer: " << op_text << "\n"
        << "New context [Do not mention original answer]:\n"
        << sentence << "\n"
        << "New question statement: " << question << "\n"
        << "New answer reasoning:\n"
        << "Carry the prior quantity forward and apply the stated adjustment exactly once.\n"
        << "New answer [Number only]: " << result.to_string() << "\n";
    return out.str();
}

Decimal fold_problem(const std::string& problem) {
    auto start = number_after(problem, "starts with ");
    if (!start) start = number_after(problem, "has ");
    if (!start) throw std::runtime_error("scripted: no starting amount in problem");
    struct Op {
        std::size_t pos;
        int kind;
        Decimal k;
    };
    std::vector<Op> ops;
    auto scan = [&](const std::string& marker, int kind) {
        std::size_t pos = 0;
        while ((pos = problem.find(marker, pos)) != std::string::npos) {
            if (auto d = number_at(problem, pos + marker.size()))
                ops.push_back({pos, kind, *d});
            pos += marker.size();
        }
    };
    scan("adding the number ", 0);
    scan("multiplying the previous result by ", 1);
    scan("subtracting the number ", 2);
    std::sort(ops.begin(), ops.end(), [](const Op& a, const Op& b) { return a.pos < b.pos; });
    Decimal acc = *start;
    for (const auto& o : ops) {
        if (o.kind == 0) acc = acc + o.k;
        else if (o.kind == 1) acc = acc * o.k;
        else acc = acc - o.k;
    }
    return acc;
}

std::string handle_math_solve(const std::string& u) {
    std::size_t qpos = u.rfind("\nQ: ");
    if (qpos == std::string::npos) throw std::runtime_error("scripted: no final question");
    std::size_t apos = u.rfind("\nA:");
    std::string problem = u.substr(qpos + 4, apos - (qpos + 4));
    Decimal result = fold_problem(problem);
    return "Begin from the stated starting amount and apply each recorded adjustment in "
           "order. The answer is " + result.to_string() + ".\n";
}

}  // namespace

chase::ChatResponse ScriptedTransport::send(const chase::ModelEndpoint& endpoint,
                                            const chase::ChatRequest& request) {
    (void)endpoint;
    ++calls;
    const std::string& u = request.user_text;
    auto has = [&](const char* marker) { return u.find(marker) != std::string::npos; };

    chase::ChatResponse resp;
    resp.latency_ms = 1;
    if (has("Give me 5 examples of real-life scenarios"))
        resp.text = handle_qa_scenarios(u);
    else if (has("Give me an example question and corresponding answer"))
        resp.text = handle_qa_pair(u, request.sample_tag);
    else if (has("You must generate an adversarial question"))
        resp.text = handle_qa_adversarial(u, request.sample_tag);
    else if (has("Your job is to create long documents"))
        resp.text = handle_qa_documents(u);
    else if (has("whether the answer is even partially relevant"))
        resp.text = handle_qa_cross_check(u);
    else if (has("any additional major points in the document"))
        resp.text = handle_qa_verify_extra(u);
    else if (has("You must check two things"))
        resp.text = handle_qa_verify_presence(u);
    else if (has("You need to generate the answer for that question"))
        resp.text = handle_qa_solve(u);
    else if (has("evaluate whether the prediction is correct"))
        resp.text = handle_qa_evaluation(u);
    else if (has("Your goal is to calculate precision"))
        resp.text = handle_qa_precision(u);
    else if (has("whether the statement is included in the reference points"))
        resp.text = handle_qa_recall(u);
    else if (has("You need to create 5 functions in this codebase"))
        resp.text = handle_code_helper(u, request.sample_tag);
    else if (has("check whether the function correctly executes"))
        resp.text = handle_code_verify_execution(u);
    else if (has("calls at least 4 (but not more than 6)"))
        resp.text = handle_code_problem(u, request.sample_tag);
    else if (has("define an input-output test case"))
        resp.text = handle_code_test(u);
    else if (has("You may call the functions in the codebase when necessary"))
        resp.text = handle_code_verify_problem(u);
    else if (has("You are given a codebase. You need to write a single python function"))
        resp.text = handle_code_solve(u);
    else if (has("divide up the problem into"))
        resp.text = handle_math_break(u);
    else if (has("further continue the problem over the answer quantity"))
        resp.text = handle_math_extend(u, request.sample_tag);
    else if (has("Solve the final math word problem") ||
             has("break down the problem sentence by sentence"))
        resp.text = handle_math_solve(u);
    else
        throw std::runtime_error("scripted transport: unrecognized prompt");
    return resp;
}

}  // namespace testsupport

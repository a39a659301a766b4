#include "chase/code.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <set>
#include <sstream>

namespace chase {
namespace code {

namespace {

std::string join_goals(const std::vector<std::string>& goals) {
    std::string out;
    for (const auto& g : goals) out += "- " + g + "\n";
    return strings::trim(out);
}

// Matches: Function "name" in file "file.py":
bool parse_function_decl(const std::string& raw_line, std::string& name, std::string& file) {
    std::string line = strings::trim(raw_line);
    if (line.rfind("Function ", 0) != 0) return false;
    std::size_t q1 = line.find('"');
    if (q1 == std::string::npos) return false;
    std::size_t q2 = line.find('"', q1 + 1);
    if (q2 == std::string::npos) return false;
    std::size_t infile = line.find("in file", q2);
    if (infile == std::string::npos) return false;
    std::size_t q3 = line.find('"', infile);
    if (q3 == std::string::npos) return false;
    std::size_t q4 = line.find('"', q3 + 1);
    if (q4 == std::string::npos) return false;
    name = line.substr(q1 + 1, q2 - q1 - 1);
    file = line.substr(q3 + 1, q4 - q3 - 1);
    return !name.empty() && !file.empty();
}

std::string strip_fences(const std::string& text) {
    if (text.find("```") != std::string::npos) return extract_code_block(text);
    return strings::trim(text);
}

struct FunctionParts {
    std::string parameters_text;
    std::vector<std::string> objectives;
    std::string name;
    std::string file;
    std::string source;
};

FunctionParts parse_function_section(const std::string& section) {
    auto lines = strings::split_lines(section);
    std::size_t decl_line = lines.size();
    FunctionParts parts;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (parse_function_decl(lines[i], parts.name, parts.file)) {
            decl_line = i;
            break;
        }
    }
    if (decl_line == lines.size())
        throw ParseError("no 'Function \"name\" in file \"file\":' declaration found");

    std::string head, tail;
    for (std::size_t i = 0; i < decl_line; ++i) head += lines[i] + "\n";
    for (std::size_t i = decl_line + 1; i < lines.size(); ++i) tail += lines[i] + "\n";

    FormatSpec spec;
    spec.fields = {{"Parameters", FieldKind::list, false}, {"Objectives", FieldKind::list, false}};
    ParsedRecord rec = parse_record(spec, head);
    parts.parameters_text = rec.values.at("Parameters");
    parts.objectives = strings::bullet_points(rec.values.at("Objectives"));
    if (parts.objectives.empty()) throw ParseError("objectives list is empty");
    parts.source = strip_fences(tail);
    if (parts.source.empty()) throw ParseError("function source is empty");
    if (!contains_token(parts.source, parts.name))
        throw ParseError("declared function name '" + parts.name + "' not found in source");
    return parts;
}

}  // namespace

bool contains_token(const std::string& text, const std::string& identifier) {
    if (identifier.empty()) return false;
    auto is_ident = [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
    };
    std::size_t pos = 0;
    while ((pos = text.find(identifier, pos)) != std::string::npos) {
        bool left_ok = pos == 0 || !is_ident(text[pos - 1]);
        std::size_t after = pos + identifier.size();
        bool right_ok = after >= text.size() || !is_ident(text[after]);
        if (left_ok && right_ok) return true;
        pos = after;
    }
    return false;
}

std::string format_helper(const HelperFunction& h) {
    return "Function \"" + h.name + "\" in file \"" + h.file_name + "\":\n" + h.source;
}

std::vector<HelperFunction> parse_helper_batch(const std::string& text) {
    // Sections start at "Function N:" lines (bare index, no quotes).
    std::vector<std::string> sections;
    std::string current;
    bool in_section = false;
    for (const auto& raw : strings::split_lines(text)) {
        std::string t = strings::trim(raw);
        bool header = false;
        if (t.rfind("Function ", 0) == 0 && !t.empty() && t.back() == ':') {
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
    if (sections.empty()) throw ParseError("no 'Function N:' sections found");

    std::vector<HelperFunction> out;
    for (const auto& sec : sections) {
        FunctionParts p = parse_function_section(sec);
        if (p.objectives.size() < 3 || p.objectives.size() > 4)
            throw ParseError("helper must have 3-4 objectives, got " +
                             std::to_string(p.objectives.size()));
        HelperFunction h;
        h.name = p.name;
        h.file_name = p.file;
        h.parameters_text = p.parameters_text;
        h.objectives = p.objectives;
        h.source = p.source;
        out.push_back(std::move(h));
    }
    return out;
}

CodeProblem parse_problem_response(const std::string& text) {
    FunctionParts p = parse_function_section("\n" + text);
    if (p.objectives.size() < 6 || p.objectives.size() > 8)
        throw ParseError("problem must have 6-8 objectives, got " +
                         std::to_string(p.objectives.size()));
    CodeProblem prob;
    prob.parameters_text = p.parameters_text;
    prob.objectives = p.objectives;
    prob.function_name = p.name;
    prob.answer_file = p.file;
    prob.answer_code = p.source;
    prob.statement = "Parameters:\n" + p.parameters_text + "\n\nObjectives:\n" +
                     join_goals(p.objectives);
    return prob;
}

RepoContext assemble_repo(const std::vector<HelperFunction>& relevant,
                          const std::vector<HelperFunction>& irrelevant_pool,
                          const PipelineParams& params, const std::string& extension, Rng& rng) {
    const int file_count = params.repo_file_count;
    const int m = params.m_irrelevant_functions;
    if (static_cast<int>(irrelevant_pool.size()) < m)
        throw std::invalid_argument("irrelevant pool smaller than m");

    std::set<std::string> taken_names;
    for (const auto& h : relevant) taken_names.insert(h.name);

    // Sample m distinct irrelevant helpers; resample on name collision.
    std::vector<const HelperFunction*> sampled;
    std::vector<std::size_t> idx = rng.sample_indices(irrelevant_pool.size(), m);
    std::set<std::size_t> used(idx.begin(), idx.end());
    for (std::size_t i : idx) {
        const HelperFunction* h = &irrelevant_pool[i];
        while (taken_names.count(h->name)) {
            if (used.size() == irrelevant_pool.size())
                throw std::invalid_argument("cannot resample a collision-free irrelevant helper");
            std::size_t j = rng.below(irrelevant_pool.size());
            if (!used.insert(j).second) continue;
            h = &irrelevant_pool[j];
        }
        taken_names.insert(h->name);
        sampled.push_back(h);
    }
    rng.shuffle(sampled);

    // Relevant helpers are pinned to their declared file names so the gold
    // code's imports resolve.
    std::vector<std::string> file_names;
    std::map<std::string, std::vector<const HelperFunction*>> by_file;
    for (const auto& h : relevant) {
        if (!by_file.count(h.file_name)) file_names.push_back(h.file_name);
        by_file[h.file_name].push_back(&h);
    }
    if (static_cast<int>(file_names.size()) > file_count)
        throw std::invalid_argument("more distinct relevant files than repo_file_count");
    int k = 1;
    while (static_cast<int>(file_names.size()) < file_count) {
        std::string name = "module_" + std::to_string(k++) + extension;
        if (!by_file.count(name)) {
            file_names.push_back(name);
            by_file[name] = {};
        }
    }

    // Each shuffled irrelevant helper goes to the currently smallest file.
    for (const HelperFunction* h : sampled) {
        std::size_t best = 0;
        for (std::size_t f = 1; f < file_names.size(); ++f)
            if (by_file[file_names[f]].size() < by_file[file_names[best]].size()) best = f;
        by_file[file_names[best]].push_back(h);
    }

    RepoContext repo;
    for (const auto& fname : file_names) {
        std::string content;
        for (const HelperFunction* h : by_file[fname]) {
            if (!content.empty()) content += "\n\n";
            content += h->source;
            repo.function_index[h->name] = fname;
        }
        repo.files[fname] = content;
    }
    return repo;
}

std::vector<HelperFunction> default_seed_helpers(const std::string& domain) {
    auto mk = [](std::string name, std::string file, std::string params,
                 std::vector<std::string> objectives, std::string src) {
        HelperFunction h;
        h.name = std::move(name);
        h.file_name = std::move(file);
        h.parameters_text = std::move(params);
        h.objectives = std::move(objectives);
        h.source = std::move(src);
        h.verified_executes = true;
        return h;
    };
    if (domain == "data_preprocessing") {
        return {
            mk("filter_k_frequency", "frequency_utils.py",
               "- records: list of values\n- k: int",
               {"Count the frequency of every distinct value in records",
                "Keep only the values whose frequency is at least k",
                "Return the surviving values in their original order together with a "
                "dictionary of their counts"},
               "def filter_k_frequency(records, k):\n"
               "    counts = {}\n"
               "    for r in records:\n"
               "        counts[r] = counts.get(r, 0) + 1\n"
               "    kept = [r for r in records if counts[r] >= k]\n"
               "    kept_counts = {r: c for r, c in counts.items() if c >= k}\n"
               "    return kept, kept_counts\n"),
            mk("scale_min_max", "scaling_utils.py",
               "- values: list of float\n- low: float\n- high: float",
               {"Find the minimum and maximum of values",
                "Linearly rescale every value into the interval [low, high]",
                "If all values are equal, map each to low",
                "Return the rescaled list"},
               "def scale_min_max(values, low, high):\n"
               "    lo, hi = min(values), max(values)\n"
               "    if hi == lo:\n"
               "        return [low for _ in values]\n"
               "    return [low + (v - lo) * (high - low) / (hi - lo) for v in values]\n"),
            mk("fill_missing_with_median", "missing_utils.py",
               "- rows: list of list of float or None",
               {"Compute the median of the present values in every column",
                "Replace each None with its column median",
                "Return the completed rows as a new list"},
               "def fill_missing_with_median(rows):\n"
               "    cols = list(zip(*rows))\n"
               "    medians = []\n"
               "    for col in cols:\n"
               "        present = sorted(v for v in col if v is not None)\n"
               "        n = len(present)\n"
               "        medians.append(present[n // 2] if n % 2 else\n"
               "                       (present[n // 2 - 1] + present[n // 2]) / 2)\n"
               "    return [[medians[j] if v is None else v for j, v in enumerate(row)]\n"
               "            for row in rows]\n"),
        };
    }
    return {
        mk("longest_increasing_run", "sequence_utils.py",
           "- xs: list of int",
           {"Scan xs left to right tracking the current strictly increasing run",
            "Record the longest run seen and where it starts",
            "Return the run as a list together with its start index"},
           "def longest_increasing_run(xs):\n"
           "    best_len, best_start = 0, 0\n"
           "    cur_len, cur_start = 0, 0\n"
           "    for i, x in enumerate(xs):\n"
           "        if cur_len and x > xs[i - 1]:\n"
           "            cur_len += 1\n"
           "        else:\n"
           "            cur_len, cur_start = 1, i\n"
           "        if cur_len > best_len:\n"
           "            best_len, best_start = cur_len, cur_start\n"
           "    return xs[best_start:best_start + best_len], best_start\n"),
        mk("digit_sum_chain", "digit_utils.py",
           "- n: int",
           {"Repeatedly replace n by the sum of its decimal digits",
            "Record every intermediate value including the start",
            "Stop when a single digit remains and return the chain"},
           "def digit_sum_chain(n):\n"
           "    chain = [n]\n"
           "    while n >= 10:\n"
           "        n = sum(int(d) for d in str(n))\n"
           "        chain.append(n)\n"
           "    return chain\n"),
        mk("merge_sorted_unique", "merge_utils.py",
           "- a: list of int\n- b: list of int",
           {"Merge the two sorted lists into one sorted list",
            "Drop duplicate values so each value appears once",
            "Return the merged list and the count of duplicates dropped"},
           "def merge_sorted_unique(a, b):\n"
           "    merged = sorted(set(a) | set(b))\n"
           "    dropped = len(a) + len(b) - len(merged)\n"
           "    return merged, dropped\n"),
    };
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
        req.max_tokens = config_.generator_max_tokens;  // verifier emits code here
    }
    return client_.complete(resolve_role(config_.roles, role), req);
}

SandboxLimits Pipeline::limits() const {
    SandboxLimits l;
    l.wall_ms = config_.sandbox.wall_ms;
    l.keep_workspace = config_.sandbox.keep_workspaces;
    return l;
}

bool Pipeline::verify_helper_executes(HelperFunction& helper) {
    for (int attempt = 0; attempt < config_.params.stage_retry_budget; ++attempt) {
        ledger_.record_attempt("code.helper_exec");
        try {
            ChatResponse resp = call(Role::verifier, "code_verify_execution",
                                     {{"FUNCTION", format_helper(helper)}},
                                     helper.name + ".a" + std::to_string(attempt));
            std::string driver = extract_code_block(resp.text);
            Workspace ws = Workspace::materialize(
                {{helper.file_name, helper.source},
                 {"driver" + config_.sandbox.source_extension, driver}});
            if (config_.sandbox.keep_workspaces) ws.keep();
            ExecResult r = execute(ws, config_.sandbox.interpreter,
                                   "driver" + config_.sandbox.source_extension, limits());
            if (r.status == ExecStatus::pass) {
                helper.verified_executes = true;
                ledger_.record_accept("code.helper_exec");
                return true;
            }
            ledger_.record_discard("code.helper_exec",
                                   "driver run " + exec_status_name(r.status));
        } catch (const std::exception& e) {
            ledger_.record_discard("code.helper_exec", e.what());
        }
    }
    return false;
}

std::vector<HelperFunction> Pipeline::generate_helpers(const std::string& domain,
                                                       const std::vector<HelperFunction>& seeds,
                                                       int target_count) {
    if (target_count < 1) throw std::invalid_argument("target_count must be >= 1");
    std::vector<HelperFunction> seed_pool = seeds.empty() ? default_seed_helpers(domain) : seeds;

    std::set<std::string> names;
    for (const auto& h : seed_pool) names.insert(h.name);

    std::vector<HelperFunction> pool;
    std::vector<HelperFunction> recent(seed_pool.begin(), seed_pool.end());

    int batch_no = 0;
    int stalled = 0;
    while (static_cast<int>(pool.size()) < target_count) {
        std::ostringstream seed_text;
        std::size_t from = recent.size() > 3 ? recent.size() - 3 : 0;
        for (std::size_t i = from; i < recent.size(); ++i) {
            const HelperFunction& h = recent[i];
            seed_text << "Parameters:\n" << h.parameters_text << "\nObjectives:\n"
                      << join_goals(h.objectives) << "\n\n" << format_helper(h) << "\n\n";
        }
        ledger_.record_attempt("code.helpers");
        std::vector<HelperFunction> batch;
        try {
            ChatResponse resp = call(Role::generator, "code_helper",
                                     {{"DOMAIN", domain},
                                      {"SEED_FUNCTIONS", strings::trim(seed_text.str())}},
                                     "batch" + std::to_string(batch_no++));
            batch = parse_helper_batch(resp.text);
        } catch (const std::exception& e) {
            ledger_.record_discard("code.helpers", std::string("batch failed: ") + e.what());
            if (++stalled > config_.params.stage_retry_budget)
                throw std::runtime_error("helper generation stalled within the retry budget");
            continue;
        }
        int added = 0;
        for (auto& h : batch) {
            if (static_cast<int>(pool.size()) >= target_count) break;
            if (!names.insert(h.name).second) continue;
            if (!verify_helper_executes(h)) continue;
            recent.push_back(h);
            pool.push_back(std::move(h));
            ++added;
        }
        if (added == 0) {
            ledger_.record_discard("code.helpers", "batch produced no verified helpers");
            if (++stalled > config_.params.stage_retry_budget)
                throw std::runtime_error("helper generation stalled within the retry budget");
        } else {
            ledger_.record_accept("code.helpers");
            stalled = 0;
        }
    }
    return pool;
}

std::optional<CodeProblem> Pipeline::generate_problem(const std::string& domain,
                                                      const std::vector<HelperFunction>& pool,
                                                      Rng& rng, int example_index,
                                                      std::vector<HelperFunction>* sampled_out) {
    if (static_cast<int>(pool.size()) < config_.params.n_helpers_sampled)
        throw std::invalid_argument("helper pool smaller than n_helpers_sampled");
    std::vector<std::size_t> idx =
        rng.sample_indices(pool.size(), config_.params.n_helpers_sampled);
    std::vector<HelperFunction> sampled;
    std::ostringstream helpers_text;
    for (std::size_t i : idx) {
        sampled.push_back(pool[i]);
        helpers_text << format_helper(pool[i]) << "\n\n";
    }
    if (sampled_out) *sampled_out = sampled;

    for (int attempt = 0; attempt < config_.params.stage_retry_budget; ++attempt) {
        ledger_.record_attempt("code.problem");
        try {
            ChatResponse resp = call(Role::generator, "code_problem",
                                     {{"DOMAIN", domain},
                                      {"HELPER_FUNCTIONS", strings::trim(helpers_text.str())}},
                                     "ex" + std::to_string(example_index) + ".a" +
                                         std::to_string(attempt));
            CodeProblem prob = parse_problem_response(resp.text);

            for (const auto& h : sampled)
                if (contains_token(prob.statement, h.name))
                    throw ParseError("statement names helper '" + h.name + "'");
            for (const auto& h : sampled)
                if (contains_token(prob.answer_code, h.name))
                    prob.relevant_helper_names.push_back(h.name);
            int k = static_cast<int>(prob.relevant_helper_names.size());
            if (k < config_.params.k_min_relevant || k > 6)
                throw ParseError("answer code calls " + std::to_string(k) +
                                 " helpers, need 4-6");
            std::set<std::string> helper_files;
            for (const auto& h : sampled) helper_files.insert(h.file_name);
            if (helper_files.count(prob.answer_file))
                prob.answer_file = "solution" + config_.sandbox.source_extension;

            ledger_.record_accept("code.problem");
            return prob;
        } catch (const std::exception& e) {
            ledger_.record_discard("code.problem", e.what());
        }
    }
    return std::nullopt;
}

std::optional<std::string> Pipeline::generate_test_code(
    const CodeProblem& problem, const std::vector<HelperFunction>& relevant,
    int example_index) {
    std::map<std::string, std::string> base_files;
    for (const auto& h : relevant) {
        std::string& f = base_files[h.file_name];
        if (!f.empty()) f += "\n\n";
        f += h.source;
    }
    base_files[problem.answer_file] = problem.answer_code;

    const std::string answer_decl = "Function \"" + problem.function_name + "\" in file \"" +
                                    problem.answer_file + "\":\n" + problem.answer_code;
    for (int attempt = 0; attempt < config_.params.test_code_attempts; ++attempt) {
        ledger_.record_attempt("code.test");
        try {
            ChatResponse resp = call(Role::generator, "code_test",
                                     {{"ANSWER_FUNCTION", answer_decl}},
                                     "ex" + std::to_string(example_index) + ".t" +
                                         std::to_string(attempt));
            std::string test_code = extract_code_block(resp.text);
            auto files = base_files;
            files["run_test" + config_.sandbox.source_extension] = test_code;
            Workspace ws = Workspace::materialize(files);
            if (config_.sandbox.keep_workspaces) ws.keep();
            ExecResult r = execute(ws, config_.sandbox.interpreter,
                                   "run_test" + config_.sandbox.source_extension, limits());
            if (r.status == ExecStatus::pass) {
                ledger_.record_accept("code.test");
                return test_code;
            }
            ledger_.record_discard("code.test", "test run " + exec_status_name(r.status));
        } catch (const std::exception& e) {
            ledger_.record_discard("code.test", e.what());
        }
    }
    return std::nullopt;
}

bool Pipeline::verify_statement_sufficiency(const std::string& domain,
                                            const CodeProblem& problem,
                                            const std::vector<HelperFunction>& relevant) {
    ledger_.record_attempt("code.sufficiency");
    std::ostringstream helpers_text;
    for (const auto& h : relevant) helpers_text << format_helper(h) << "\n\n";
    try {
        ChatResponse resp = call(Role::verifier, "code_verify_problem",
                                 {{"DOMAIN", domain},
                                  {"RELEVANT_FUNCTIONS", strings::trim(helpers_text.str())},
                                  {"PROBLEM_STATEMENT", problem.statement}},
                                 "");
        std::string candidate = extract_code_block(resp.text);
        if (!contains_token(candidate, problem.function_name)) {
            ledger_.record_discard("code.sufficiency",
                                   "independent solution lacks the target function");
            return false;
        }
        std::map<std::string, std::string> files;
        for (const auto& h : relevant) {
            std::string& f = files[h.file_name];
            if (!f.empty()) f += "\n\n";
            f += h.source;
        }
        files[problem.answer_file] = candidate;
        files["run_test" + config_.sandbox.source_extension] = problem.test_code;
        Workspace ws = Workspace::materialize(files);
        if (config_.sandbox.keep_workspaces) ws.keep();
        ExecResult r = execute(ws, config_.sandbox.interpreter,
                               "run_test" + config_.sandbox.source_extension, limits());
        if (r.status == ExecStatus::pass) {
            ledger_.record_accept("code.sufficiency");
            return true;
        }
        ledger_.record_discard("code.sufficiency",
                               "independent solution " + exec_status_name(r.status));
        return false;
    } catch (const std::exception& e) {
        ledger_.record_discard("code.sufficiency", e.what());
        return false;
    }
}

ExecResult Pipeline::run_test(const RepoContext& repo, const std::string& answer_file,
                              const std::string& answer_code, const std::string& test_code) {
    std::map<std::string, std::string> files = repo.files;
    files[answer_file] = answer_code;
    files["run_test" + config_.sandbox.source_extension] = test_code;
    Workspace ws = Workspace::materialize(files);
    if (config_.sandbox.keep_workspaces) ws.keep();
    return execute(ws, config_.sandbox.interpreter,
                   "run_test" + config_.sandbox.source_extension, limits());
}

std::vector<CodeExample> Pipeline::generate(const std::string& domain,
                                            const std::vector<HelperFunction>& pool,
                                            int target_count) {
    config_.params.validate();
    Rng root(config_.params.rng_seed);
    std::vector<CodeExample> out;
    const int max_attempts = target_count * 5;
    for (int attempt = 0; attempt < max_attempts &&
                          static_cast<int>(out.size()) < target_count;
         ++attempt) {
        ledger_.record_attempt("code.example");
        Rng ex_rng = root.fork(static_cast<std::uint64_t>(attempt));

        std::vector<HelperFunction> sampled;
        auto prob = generate_problem(domain, pool, ex_rng, attempt, &sampled);
        if (!prob) {
            ledger_.record_discard("code.example", "no valid problem");
            continue;
        }
        std::vector<HelperFunction> relevant;
        for (const auto& h : sampled)
            if (std::find(prob->relevant_helper_names.begin(),
                          prob->relevant_helper_names.end(),
                          h.name) != prob->relevant_helper_names.end())
                relevant.push_back(h);

        auto test = generate_test_code(*prob, relevant, attempt);
        if (!test) {
            ledger_.record_discard("code.example", "no passing test code");
            continue;
        }
        prob->test_code = *test;

        if (!verify_statement_sufficiency(domain, *prob, relevant)) {
            ledger_.record_discard("code.example", "statement insufficiency");
            continue;
        }

        std::set<std::string> relevant_names(prob->relevant_helper_names.begin(),
                                             prob->relevant_helper_names.end());
        std::vector<HelperFunction> irrelevant_pool;
        for (const auto& h : pool)
            if (!relevant_names.count(h.name)) irrelevant_pool.push_back(h);

        RepoContext repo;
        try {
            repo = assemble_repo(relevant, irrelevant_pool, config_.params,
                                 config_.sandbox.source_extension, ex_rng);
        } catch (const std::exception& e) {
            ledger_.record_discard("code.example", e.what());
            continue;
        }

        ExecResult gold = run_test(repo, prob->answer_file, prob->answer_code, prob->test_code);
        if (gold.status != ExecStatus::pass) {
            ledger_.record_discard("code.example",
                                   "gold fails in assembled repo: " +
                                       exec_status_name(gold.status));
            continue;
        }

        CodeExample ex;
        char idbuf[16];
        std::snprintf(idbuf, sizeof idbuf, "code-%05d", static_cast<int>(out.size()));
        ex.id = idbuf;
        ex.domain = domain;
        ex.repo = std::move(repo);
        ex.statement = prob->statement;
        ex.function_name = prob->function_name;
        ex.answer_file = prob->answer_file;
        ex.gold_answer = prob->answer_code;
        ex.gold_test = prob->test_code;
        ex.relevant_helper_names = prob->relevant_helper_names;
        ledger_.record_accept("code.example");
        out.push_back(std::move(ex));
    }
    return out;
}

}  // namespace code
}  // namespace chase

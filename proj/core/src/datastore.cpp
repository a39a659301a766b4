#include "chase/datastore.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "chase/digest.hpp"
#include "chase/eval.hpp"

namespace chase {
namespace datastore {

using nlohmann::json;

namespace {

constexpr int kSchemaVersion = 1;

std::string now_iso8601() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void atomic_write(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    fs::path tmp = p;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write file: " + tmp.string());
        out << content;
    }
    fs::rename(tmp, p);
}

ManifestEntry write_dataset(const std::string& domain, const std::vector<std::string>& lines,
                            const std::string& path, const std::string& config_digest) {
    std::string content;
    for (const auto& l : lines) content += l + "\n";
    atomic_write(path, content);

    ManifestEntry m;
    m.dataset_id = std::filesystem::path(path).stem().string();
    m.domain = domain;
    m.example_count = static_cast<int>(lines.size());
    m.content_digest = sha256_hex(content);
    m.created_at = now_iso8601();
    m.config_digest = config_digest;
    atomic_write(path + ".manifest.json", m.to_json_text());
    return m;
}

std::vector<json> read_dataset(const std::string& path, const std::string& expected_domain) {
    std::string content = read_file(path);

    std::string manifest_path = path + ".manifest.json";
    if (std::filesystem::exists(manifest_path)) {
        ManifestEntry m = ManifestEntry::from_json_text(read_file(manifest_path));
        if (m.content_digest != sha256_hex(content))
            throw IntegrityError("dataset content digest mismatch for " + path);
    }

    std::vector<json> records;
    std::istringstream in(content);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (strings::trim(line).empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const std::exception& e) {
            throw IntegrityError("malformed record at " + path + ":" +
                                 std::to_string(line_no) + ": " + e.what());
        }
        std::string domain = j.value("domain", "");
        if (domain != expected_domain)
            throw IntegrityError("record domain '" + domain + "' does not match expected '" +
                                 expected_domain + "' at " + path + ":" +
                                 std::to_string(line_no));
        records.push_back(std::move(j));
    }
    return records;
}

json qa_pair_to_json(const qa::QAPair& p) {
    json outline = json::array();
    for (const auto& e : p.outline)
        outline.push_back({{"title", e.title}, {"point_indices", e.point_indices}});
    return json{{"question", p.question}, {"points", p.points}, {"outline", outline}};
}

qa::QAPair qa_pair_from_json(const json& j) {
    qa::QAPair p;
    p.question = j.at("question").get<std::string>();
    p.points = j.at("points").get<std::vector<std::string>>();
    for (const auto& e : j.at("outline")) {
        qa::OutlineEntry entry;
        entry.title = e.at("title").get<std::string>();
        entry.point_indices = e.at("point_indices").get<std::vector<int>>();
        p.outline.push_back(std::move(entry));
    }
    return p;
}

}  // namespace

std::string ManifestEntry::to_json_text() const {
    json j{{"dataset_id", dataset_id},     {"domain", domain},
           {"example_count", example_count}, {"content_digest", content_digest},
           {"created_at", created_at},     {"config_digest", config_digest}};
    return j.dump(2) + "\n";
}

ManifestEntry ManifestEntry::from_json_text(const std::string& text) {
    json j = json::parse(text);
    ManifestEntry m;
    m.dataset_id = j.value("dataset_id", "");
    m.domain = j.value("domain", "");
    m.example_count = j.value("example_count", 0);
    m.content_digest = j.value("content_digest", "");
    m.created_at = j.value("created_at", "");
    m.config_digest = j.value("config_digest", "");
    return m;
}

ManifestEntry save_qa(std::vector<qa::QAExample> examples, const std::string& path,
                      const std::string& config_digest) {
    std::sort(examples.begin(), examples.end(),
              [](const auto& a, const auto& b) { return a.id < b.id; });
    std::vector<std::string> lines;
    for (const auto& ex : examples) {
        json docs = json::array();
        for (const auto& d : ex.documents)
            docs.push_back({{"title", d.title},
                            {"text", d.body},
                            {"role", d.relevant ? "relevant" : "irrelevant"}});
        json irrelevant = json::array();
        for (const auto& adv : ex.irrelevant) irrelevant.push_back(qa_pair_to_json(adv));
        json j{{"schema_version", kSchemaVersion},
               {"domain", "qa"},
               {"id", ex.id},
               {"scenario",
                {{"persona", ex.scenario.persona}, {"collection", ex.scenario.collection}}},
               {"question", ex.gold.question},
               {"gold_points", ex.gold.points},
               {"outline", qa_pair_to_json(ex.gold)["outline"]},
               {"documents", docs},
               {"irrelevant_qa", irrelevant},
               {"provenance", ex.provenance}};
        lines.push_back(j.dump());
    }
    return write_dataset("qa", lines, path, config_digest);
}

std::vector<qa::QAExample> load_qa(const std::string& path) {
    std::vector<qa::QAExample> out;
    for (const auto& j : read_dataset(path, "qa")) {
        qa::QAExample ex;
        ex.id = j.at("id").get<std::string>();
        ex.scenario.persona = j.at("scenario").at("persona").get<std::string>();
        ex.scenario.collection = j.at("scenario").at("collection").get<std::string>();
        ex.gold.question = j.at("question").get<std::string>();
        ex.gold.points = j.at("gold_points").get<std::vector<std::string>>();
        for (const auto& e : j.at("outline")) {
            qa::OutlineEntry entry;
            entry.title = e.at("title").get<std::string>();
            entry.point_indices = e.at("point_indices").get<std::vector<int>>();
            ex.gold.outline.push_back(std::move(entry));
        }
        for (const auto& d : j.at("documents")) {
            qa::Document doc;
            doc.title = d.at("title").get<std::string>();
            doc.body = d.at("text").get<std::string>();
            doc.relevant = d.at("role").get<std::string>() == "relevant";
            doc.word_count = strings::word_count(doc.body);
            ex.documents.push_back(std::move(doc));
        }
        for (const auto& adv : j.at("irrelevant_qa")) ex.irrelevant.push_back(qa_pair_from_json(adv));
        ex.provenance = j.value("provenance", "");
        out.push_back(std::move(ex));
    }
    return out;
}

ManifestEntry save_code(std::vector<code::CodeExample> examples, const std::string& path,
                        const std::string& config_digest) {
    std::sort(examples.begin(), examples.end(),
              [](const auto& a, const auto& b) { return a.id < b.id; });
    std::vector<std::string> lines;
    for (const auto& ex : examples) {
        json j{{"schema_version", kSchemaVersion},
               {"domain", "code"},
               {"id", ex.id},
               {"code_domain", ex.domain},
               {"statement", ex.statement},
               {"function_name", ex.function_name},
               {"answer_file", ex.answer_file},
               {"gold_answer", ex.gold_answer},
               {"gold_test", ex.gold_test},
               {"relevant_helpers", ex.relevant_helper_names},
               {"repo",
                {{"files", ex.repo.files}, {"function_index", ex.repo.function_index}}}};
        lines.push_back(j.dump());
    }
    return write_dataset("code", lines, path, config_digest);
}

std::vector<code::CodeExample> load_code(const std::string& path) {
    std::vector<code::CodeExample> out;
    for (const auto& j : read_dataset(path, "code")) {
        code::CodeExample ex;
        ex.id = j.at("id").get<std::string>();
        ex.domain = j.at("code_domain").get<std::string>();
        ex.statement = j.at("statement").get<std::string>();
        ex.function_name = j.at("function_name").get<std::string>();
        ex.answer_file = j.at("answer_file").get<std::string>();
        ex.gold_answer = j.at("gold_answer").get<std::string>();
        ex.gold_test = j.at("gold_test").get<std::string>();
        ex.relevant_helper_names = j.at("relevant_helpers").get<std::vector<std::string>>();
        ex.repo.files = j.at("repo").at("files").get<std::map<std::string, std::string>>();
        ex.repo.function_index =
            j.at("repo").at("function_index").get<std::map<std::string, std::string>>();
        out.push_back(std::move(ex));
    }
    return out;
}

ManifestEntry save_math(std::vector<math::ComposedMathProblem> examples, const std::string& path,
                        const std::string& config_digest) {
    std::sort(examples.begin(), examples.end(),
              [](const auto& a, const auto& b) { return a.id < b.id; });
    std::vector<std::string> lines;
    for (const auto& ex : examples) {
        json j{{"schema_version", kSchemaVersion},
               {"domain", "math"},
               {"id", ex.id},
               {"seed_id", ex.seed_id},
               {"context_chain", ex.context_chain},
               {"question", ex.question},
               {"answer", ex.answer.to_string()},
               {"depth", ex.depth},
               {"provenance", ex.provenance}};
        lines.push_back(j.dump());
    }
    return write_dataset("math", lines, path, config_digest);
}

std::vector<math::ComposedMathProblem> load_math(const std::string& path) {
    std::vector<math::ComposedMathProblem> out;
    for (const auto& j : read_dataset(path, "math")) {
        math::ComposedMathProblem ex;
        ex.id = j.at("id").get<std::string>();
        ex.seed_id = j.value("seed_id", "");
        ex.context_chain = j.at("context_chain").get<std::vector<std::string>>();
        ex.question = j.at("question").get<std::string>();
        auto d = Decimal::parse(j.at("answer").get<std::string>());
        if (!d) throw IntegrityError("non-numeric answer in " + path + " record " + ex.id);
        ex.answer = *d;
        ex.depth = j.at("depth").get<int>();
        ex.provenance = j.value("provenance", "");
        if (ex.depth != static_cast<int>(ex.context_chain.size()))
            throw IntegrityError("depth does not match context chain in record " + ex.id);
        out.push_back(std::move(ex));
    }
    return out;
}

std::string dataset_domain(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::string line;
    while (std::getline(in, line)) {
        if (strings::trim(line).empty()) continue;
        json j = json::parse(line);
        std::string domain = j.value("domain", "");
        if (domain.empty()) throw IntegrityError("first record has no domain tag: " + path);
        return domain;
    }
    throw IntegrityError("dataset is empty: " + path);
}

std::string dataset_stats(const std::string& path) {
    std::string domain = dataset_domain(path);
    json stats{{"dataset", path}, {"domain", domain}};
    if (domain == "qa") {
        auto examples = load_qa(path);
        double tokens = 0, points = 0, relevant = 0, irrelevant = 0;
        for (const auto& ex : examples) {
            tokens += static_cast<double>(eval::qa_example_tokens(ex));
            points += static_cast<double>(ex.gold.points.size());
            for (const auto& d : ex.documents) (d.relevant ? relevant : irrelevant) += 1.0;
        }
        double n = static_cast<double>(examples.size());
        stats["examples"] = examples.size();
        stats["mean_token_estimate"] = n ? tokens / n : 0.0;
        stats["mean_answer_points"] = n ? points / n : 0.0;
        stats["mean_relevant_documents"] = n ? relevant / n : 0.0;
        stats["mean_irrelevant_documents"] = n ? irrelevant / n : 0.0;
    } else if (domain == "code") {
        auto examples = load_code(path);
        double tokens = 0;
        for (const auto& ex : examples)
            tokens += static_cast<double>(eval::code_example_tokens(ex));
        double n = static_cast<double>(examples.size());
        stats["examples"] = examples.size();
        stats["mean_token_estimate"] = n ? tokens / n : 0.0;
    } else if (domain == "math") {
        auto examples = load_math(path);
        double depth = 0, words = 0;
        for (const auto& ex : examples) {
            depth += ex.depth;
            words += static_cast<double>(strings::word_count(math::composed_text(ex)));
        }
        double n = static_cast<double>(examples.size());
        stats["examples"] = examples.size();
        stats["mean_depth"] = n ? depth / n : 0.0;
        stats["mean_words_per_question"] = n ? words / n : 0.0;
    } else {
        throw IntegrityError("unknown dataset domain: " + domain);
    }
    return stats.dump(2) + "\n";
}

void export_code_example(const code::CodeExample& ex, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(fs::path(dir) / "repo");
    fs::create_directories(fs::path(dir) / "solution");
    fs::create_directories(fs::path(dir) / "tests");
    for (const auto& [name, content] : ex.repo.files)
        atomic_write((fs::path(dir) / "repo" / name).string(), content);
    atomic_write((fs::path(dir) / "problem.txt").string(), ex.statement + "\n");
    atomic_write((fs::path(dir) / "solution" / ex.answer_file).string(), ex.gold_answer);
    atomic_write((fs::path(dir) / "tests" / ("test_" + ex.answer_file)).string(), ex.gold_test);
}

std::vector<std::pair<std::string, Decimal>> load_math_seeds(const std::string& path) {
    std::vector<std::pair<std::string, Decimal>> out;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open seed file: " + path);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (strings::trim(line).empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const std::exception& e) {
            throw IntegrityError("malformed seed at " + path + ":" + std::to_string(line_no) +
                                 ": " + e.what());
        }
        std::string problem = j.at("problem").get<std::string>();
        std::string answer_text = j.at("answer").is_string()
                                      ? j.at("answer").get<std::string>()
                                      : j.at("answer").dump();
        auto d = Decimal::parse(answer_text);
        if (!d)
            throw IntegrityError("non-numeric seed answer at " + path + ":" +
                                 std::to_string(line_no));
        out.push_back({problem, *d});
    }
    return out;
}

}  // namespace datastore
}  // namespace chase

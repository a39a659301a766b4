// Command-line surface for the generation pipelines, rejection sampling,
// evaluation harness, context scaling, dataset statistics, and transcript
// cache maintenance.
//
// Exit codes: 0 success, 1 usage error, 2 configuration error, 3 runtime
// failure.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "chase/code.hpp"
#include "chase/config.hpp"
#include "chase/datastore.hpp"
#include "chase/digest.hpp"
#include "chase/eval.hpp"
#include "chase/math.hpp"
#include "chase/pipeline.hpp"
#include "chase/promptkit.hpp"
#include "chase/provider.hpp"
#include "chase/qa.hpp"
#include "chase/rng.hpp"
#include "chase/transcript_cache.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonOptions {
    std::string config_path;
    std::string workdir;
    std::string run_dir;
    std::string cache_mode_override;
    long long seed_override = -1;
};

std::string timestamp_slug() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%S", &tm);
    return buf;
}

std::string resolve(const CommonOptions& opts, const std::string& path) {
    if (path.empty() || fs::path(path).is_absolute() || opts.workdir.empty()) return path;
    return (fs::path(opts.workdir) / path).string();
}

struct RunContext {
    chase::RunConfig config;
    std::string run_dir;
    std::string config_digest;
    std::unique_ptr<chase::TranscriptCache> cache;
    std::unique_ptr<chase::Transport> transport;
    std::unique_ptr<chase::ProviderClient> client;
    std::map<std::string, chase::PromptTemplate> prompts;
};

RunContext make_context(const CommonOptions& opts, const std::string& command_slug) {
    if (opts.config_path.empty()) throw chase::ConfigError("--config is required");
    RunContext ctx;
    ctx.config = chase::RunConfig::load_file(resolve(opts, opts.config_path));
    if (!opts.cache_mode_override.empty())
        ctx.config.cache_mode = chase::cache_mode_from_name(opts.cache_mode_override);
    if (opts.seed_override >= 0)
        ctx.config.params.rng_seed = static_cast<std::uint64_t>(opts.seed_override);

    const bool live = ctx.config.cache_mode != chase::CacheMode::replay;
    ctx.config.validate(live);

    ctx.run_dir = opts.run_dir.empty()
                      ? (fs::path(resolve(opts, ctx.config.output_dir)) /
                         (timestamp_slug() + "-" + command_slug))
                            .string()
                      : resolve(opts, opts.run_dir);
    fs::create_directories(ctx.run_dir);
    const std::string config_text = ctx.config.to_json_text();
    ctx.config_digest = chase::sha256_hex(config_text);
    std::ofstream(fs::path(ctx.run_dir) / "config.json") << config_text;

    ctx.cache = std::make_unique<chase::TranscriptCache>(ctx.config.cache_mode,
                                                         resolve(opts, ctx.config.cache_dir));
    if (live) ctx.transport = chase::make_http_transport();
    ctx.client = std::make_unique<chase::ProviderClient>(*ctx.cache, ctx.transport.get());
    ctx.prompts = chase::load_prompt_library(resolve(opts, ctx.config.prompt_dir));
    return ctx;
}

void write_ledger(const RunContext& ctx, const chase::YieldLedger& ledger) {
    std::ofstream(fs::path(ctx.run_dir) / "ledger.json") << ledger.to_json();
    std::cout << ledger.to_text();
    if (!ledger.conserved())
        throw std::runtime_error("yield ledger is not conserved (attempted != accepted + "
                                 "discarded at some stage)");
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

int run_generate_qa(const CommonOptions& opts, int target, const std::string& out,
                    const std::string& seed_file) {
    RunContext ctx = make_context(opts, "generate-qa");
    std::vector<chase::qa::Scenario> seeds;
    if (!seed_file.empty()) {
        std::ifstream in(resolve(opts, seed_file));
        if (!in) throw std::runtime_error("cannot open scenario seed file: " + seed_file);
        std::string line;
        while (std::getline(in, line)) {
            if (chase::strings::trim(line).empty()) continue;
            json j = json::parse(line);
            seeds.push_back({j.at("persona").get<std::string>(),
                             j.at("collection").get<std::string>()});
        }
    }
    chase::qa::Pipeline pipeline(*ctx.client, ctx.config, ctx.prompts);
    auto examples = pipeline.generate(seeds, target);
    const std::string out_path =
        out.empty() ? (fs::path(ctx.run_dir) / "dataset.jsonl").string() : resolve(opts, out);
    auto manifest = chase::datastore::save_qa(examples, out_path, ctx.config_digest);
    write_ledger(ctx, pipeline.ledger());
    std::cout << "wrote " << manifest.example_count << " qa examples to " << out_path << "\n";
    if (static_cast<int>(examples.size()) < target) {
        std::cerr << "warning: only " << examples.size() << " of " << target
                  << " examples were accepted\n";
    }
    return 0;
}

int run_generate_code(const CommonOptions& opts, const std::string& domain, int target,
                      int helper_pool, const std::string& out) {
    RunContext ctx = make_context(opts, "generate-code");
    chase::code::Pipeline pipeline(*ctx.client, ctx.config, ctx.prompts);
    int pool_target = helper_pool > 0
                          ? helper_pool
                          : ctx.config.params.m_irrelevant_functions +
                                ctx.config.params.n_helpers_sampled;
    auto pool = pipeline.generate_helpers(domain, {}, pool_target);
    auto examples = pipeline.generate(domain, pool, target);
    const std::string out_path =
        out.empty() ? (fs::path(ctx.run_dir) / "dataset.jsonl").string() : resolve(opts, out);
    auto manifest = chase::datastore::save_code(examples, out_path, ctx.config_digest);
    write_ledger(ctx, pipeline.ledger());
    std::cout << "wrote " << manifest.example_count << " code examples to " << out_path << "\n";
    return 0;
}

int run_generate_math(const CommonOptions& opts, const std::string& seed_file, int target,
                      const std::string& out) {
    RunContext ctx = make_context(opts, "generate-math");
    auto seeds = chase::datastore::load_math_seeds(resolve(opts, seed_file));
    chase::math::Pipeline pipeline(*ctx.client, ctx.config, ctx.prompts);
    auto examples = pipeline.generate(seeds, target);
    const std::string out_path =
        out.empty() ? (fs::path(ctx.run_dir) / "dataset.jsonl").string() : resolve(opts, out);
    auto manifest = chase::datastore::save_math(examples, out_path, ctx.config_digest);
    write_ledger(ctx, pipeline.ledger());
    std::cout << "wrote " << manifest.example_count << " math examples to " << out_path << "\n";
    return 0;
}

int run_reject_sample(const CommonOptions& opts, const std::string& in, const std::string& out,
                      int trials, double fraction) {
    RunContext ctx = make_context(opts, "reject-sample");
    const std::string in_path = resolve(opts, in);
    const int t = trials > 0 ? trials : ctx.config.params.reject_trials_t;
    const double f = fraction >= 0 ? fraction : ctx.config.params.reject_fraction_f;
    chase::Rng rng(ctx.config.params.rng_seed);
    chase::eval::Harness harness(*ctx.client, ctx.config, ctx.prompts);

    const std::string domain = chase::datastore::dataset_domain(in_path);
    const std::string out_path =
        out.empty() ? (fs::path(ctx.run_dir) / "dataset.jsonl").string() : resolve(opts, out);
    std::size_t before = 0, after = 0;
    if (domain == "qa") {
        auto examples = chase::datastore::load_qa(in_path);
        before = examples.size();
        std::function<bool(const chase::qa::QAExample&, int)> solved =
            [&](const chase::qa::QAExample& ex, int trial) {
                auto pred = harness.solve_qa(ex, "rs.t" + std::to_string(trial));
                return harness.judge_qa_accuracy(ex, pred).correct;
            };
        auto kept = chase::rejection_sample(examples, solved, t, f, rng);
        after = kept.size();
        chase::datastore::save_qa(kept, out_path, ctx.config_digest);
    } else if (domain == "code") {
        auto examples = chase::datastore::load_code(in_path);
        before = examples.size();
        std::function<bool(const chase::code::CodeExample&, int)> solved =
            [&](const chase::code::CodeExample& ex, int trial) {
                auto pred = harness.solve_code(ex, "rs.t" + std::to_string(trial));
                return harness.score_code_pass1(ex, pred).correct;
            };
        auto kept = chase::rejection_sample(examples, solved, t, f, rng);
        after = kept.size();
        chase::datastore::save_code(kept, out_path, ctx.config_digest);
    } else if (domain == "math") {
        auto examples = chase::datastore::load_math(in_path);
        before = examples.size();
        std::function<bool(const chase::math::ComposedMathProblem&, int)> solved =
            [&](const chase::math::ComposedMathProblem& ex, int trial) {
                auto pred = harness.solve_math(ex, false, "rs.t" + std::to_string(trial));
                return harness.score_math_exact(ex, pred).correct;
            };
        auto kept = chase::rejection_sample(examples, solved, t, f, rng);
        after = kept.size();
        chase::datastore::save_math(kept, out_path, ctx.config_digest);
    } else {
        throw std::runtime_error("unknown dataset domain: " + domain);
    }
    std::cout << "kept " << after << " of " << before << " examples (t=" << t << ", f=" << f
              << ") -> " << out_path << "\n";
    return 0;
}

int run_evaluate(const CommonOptions& opts, const std::string& in, const std::string& metric,
                 bool sentence_variant) {
    RunContext ctx = make_context(opts, "evaluate");
    const std::string in_path = resolve(opts, in);
    chase::eval::Harness harness(*ctx.client, ctx.config, ctx.prompts);
    const std::string domain = chase::datastore::dataset_domain(in_path);

    chase::eval::MetricReport report;
    if (domain == "qa") {
        auto kind = metric.empty() ? chase::eval::Metric::accuracy
                                   : chase::eval::metric_from_name(metric);
        report = harness.evaluate_qa(chase::datastore::load_qa(in_path), kind);
    } else if (domain == "code") {
        if (!metric.empty() && metric != "pass1")
            throw std::runtime_error("metric not applicable to the code domain: " + metric);
        report = harness.evaluate_code(chase::datastore::load_code(in_path));
    } else if (domain == "math") {
        if (!metric.empty() && metric != "exact_match")
            throw std::runtime_error("metric not applicable to the math domain: " + metric);
        report = harness.evaluate_math(chase::datastore::load_math(in_path), sentence_variant);
    } else {
        throw std::runtime_error("unknown dataset domain: " + domain);
    }
    std::ofstream(fs::path(ctx.run_dir) / "report.json") << report.to_json();
    std::ofstream(fs::path(ctx.run_dir) / "report.txt") << report.to_text();
    std::cout << report.to_text();
    return 0;
}

int run_scale_context(const CommonOptions& opts, const std::string& in,
                      const std::string& targets_csv, const std::string& out_dir) {
    RunContext ctx = make_context(opts, "scale-context");
    const std::string in_path = resolve(opts, in);
    std::vector<std::size_t> targets;
    std::stringstream ss(targets_csv);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!chase::strings::trim(item).empty())
            targets.push_back(static_cast<std::size_t>(std::stoull(chase::strings::trim(item))));
    if (targets.empty()) throw std::runtime_error("no scaling targets given");
    const std::string dir = out_dir.empty() ? ctx.run_dir : resolve(opts, out_dir);
    fs::create_directories(dir);

    const std::string domain = chase::datastore::dataset_domain(in_path);
    if (domain == "qa") {
        auto examples = chase::datastore::load_qa(in_path);
        for (std::size_t target : targets) {
            std::vector<chase::qa::QAExample> scaled;
            for (const auto& ex : examples) {
                std::vector<chase::qa::Document> donors;
                for (const auto& other : examples) {
                    if (other.id == ex.id) continue;
                    for (const auto& d : other.documents)
                        if (!d.relevant) donors.push_back(d);
                }
                chase::Rng rng(ctx.config.params.rng_seed ^ fnv1a(ex.id));
                scaled.push_back(chase::eval::scale_qa_context(ex, target, donors, rng));
            }
            const std::string out_path =
                (fs::path(dir) / ("scaled_" + std::to_string(target) + ".jsonl")).string();
            chase::datastore::save_qa(scaled, out_path, ctx.config_digest);
            std::cout << "wrote " << out_path << "\n";
        }
    } else if (domain == "code") {
        auto examples = chase::datastore::load_code(in_path);
        for (std::size_t target : targets) {
            std::vector<chase::code::CodeExample> scaled;
            for (const auto& ex : examples) {
                std::vector<std::pair<std::string, std::string>> donors;
                for (const auto& other : examples) {
                    if (other.id == ex.id) continue;
                    for (const auto& [fn, file] : other.repo.function_index) {
                        std::size_t pos = other.repo.files.at(file).find("def " + fn);
                        if (pos == std::string::npos) continue;
                        std::size_t end = other.repo.files.at(file).find("\n\ndef ", pos);
                        donors.push_back({fn, other.repo.files.at(file).substr(
                                                  pos, end == std::string::npos
                                                           ? std::string::npos
                                                           : end - pos)});
                    }
                }
                chase::Rng rng(ctx.config.params.rng_seed ^ fnv1a(ex.id));
                scaled.push_back(chase::eval::scale_code_context(ex, target, donors, rng));
            }
            const std::string out_path =
                (fs::path(dir) / ("scaled_" + std::to_string(target) + ".jsonl")).string();
            chase::datastore::save_code(scaled, out_path, ctx.config_digest);
            std::cout << "wrote " << out_path << "\n";
        }
    } else {
        throw std::runtime_error("context scaling applies to qa and code datasets only");
    }
    return 0;
}

int run_stats(const CommonOptions& opts, const std::string& in) {
    std::cout << chase::datastore::dataset_stats(resolve(opts, in));
    return 0;
}

int run_cache_record(const CommonOptions& opts, const std::string& transcripts,
                     const std::string& cache_dir) {
    chase::TranscriptCache cache(chase::CacheMode::record, resolve(opts, cache_dir));
    std::ifstream in(resolve(opts, transcripts));
    if (!in) throw std::runtime_error("cannot open transcript file: " + transcripts);
    std::string line;
    int stored = 0, line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (chase::strings::trim(line).empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const std::exception& e) {
            throw std::runtime_error("malformed transcript at line " + std::to_string(line_no) +
                                     ": " + e.what());
        }
        chase::ModelEndpoint ep;
        ep.provider_id = j.value("provider_id", "");
        ep.model_name = j.value("model_name", "");
        chase::ChatRequest req;
        req.system_text = j.value("system", "");
        req.user_text = j.at("user").get<std::string>();
        req.temperature = j.value("temperature", 0.0);
        req.max_tokens = j.value("max_tokens", 1024);
        req.sample_tag = j.value("sample_tag", "");
        std::string role = j.value("role", "generator");
        for (chase::Role r : {chase::Role::generator, chase::Role::verifier, chase::Role::judge,
                              chase::Role::solver})
            if (chase::role_name(r) == role) req.role_tag = r;
        chase::CachedResponse resp;
        resp.text = j.at("response_text").get<std::string>();
        resp.finish_reason = j.value("finish_reason", 0);
        resp.latency_ms = j.value("latency_ms", 0);
        cache.store(chase::cache_key(ep, req), resp);
        ++stored;
    }
    std::cout << "stored " << stored << " transcripts in " << cache.dir() << "\n";
    return 0;
}

int run_cache_replay_check(const CommonOptions& opts, const std::string& cache_dir) {
    const std::string dir = resolve(opts, cache_dir);
    if (!fs::exists(dir)) throw std::runtime_error("cache directory does not exist: " + dir);
    int checked = 0;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".resp") continue;
        const std::string digest = entry.path().stem().string();
        const std::string shard = entry.path().parent_path().filename().string();
        if (digest.size() != 64 || digest.substr(0, 2) != shard)
            throw std::runtime_error("cache entry in the wrong shard: " + entry.path().string());
        std::ifstream in(entry.path(), std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        try {
            json j = json::parse(ss.str());
            (void)j.at("text");
            (void)j.at("finish_reason");
        } catch (const std::exception& e) {
            throw std::runtime_error("unreadable cache entry " + entry.path().string() + ": " +
                                     e.what());
        }
        ++checked;
    }
    std::cout << "verified " << checked << " cache entries in " << dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Deterministic benchmark generation and evaluation engine"};
    app.require_subcommand(1);

    CommonOptions opts;
    app.add_option("--config", opts.config_path, "Run configuration JSON file");
    app.add_option("--workdir", opts.workdir, "Root for relative paths");
    app.add_option("--run-dir", opts.run_dir, "Directory for config copy, ledger, and outputs");
    app.add_option("--cache-mode", opts.cache_mode_override,
                   "Override cache mode: record|replay|passthrough");
    app.add_option("--seed", opts.seed_override, "Override the run rng seed");

    // generate
    auto* generate = app.add_subcommand("generate", "Run a generation pipeline");
    generate->require_subcommand(1);
    int gen_target = 3;
    std::string gen_out, qa_seed_file, code_domain = "data_preprocessing", math_seed_file;
    int helper_pool = 0;
    auto* gen_qa = generate->add_subcommand("qa", "Long-context document QA pipeline");
    gen_qa->add_option("--target", gen_target, "Examples to generate");
    gen_qa->add_option("--out", gen_out, "Dataset output path");
    gen_qa->add_option("--seed-scenarios", qa_seed_file, "JSONL of {persona, collection} seeds");
    auto* gen_code = generate->add_subcommand("code", "Repository code-completion pipeline");
    gen_code->add_option("--target", gen_target, "Examples to generate");
    gen_code->add_option("--domain", code_domain, "Helper domain");
    gen_code->add_option("--helper-pool", helper_pool, "Verified helper pool size");
    gen_code->add_option("--out", gen_out, "Dataset output path");
    auto* gen_math = generate->add_subcommand("math", "Composed math word-problem pipeline");
    gen_math->add_option("--seed-file", math_seed_file, "JSONL of {problem, answer} seeds")
        ->required();
    gen_math->add_option("--target", gen_target, "Examples to generate");
    gen_math->add_option("--out", gen_out, "Dataset output path");

    // reject-sample
    auto* reject = app.add_subcommand("reject-sample", "Drop a fraction of solver-solved examples");
    std::string rs_in, rs_out;
    int rs_trials = 0;
    double rs_fraction = -1.0;
    reject->add_option("--in", rs_in, "Input dataset")->required();
    reject->add_option("--out", rs_out, "Output dataset");
    reject->add_option("--trials", rs_trials, "Solver trials per example");
    reject->add_option("--fraction", rs_fraction, "Discard probability for solved examples");

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "Solve and score a dataset");
    std::string ev_in, ev_metric;
    bool ev_sentence = false;
    evaluate->add_option("--in", ev_in, "Input dataset")->required();
    evaluate->add_option("--metric", ev_metric,
                         "accuracy|k_precision|recall|pass1|exact_match");
    evaluate->add_flag("--sentence-variant", ev_sentence,
                       "Sentence-by-sentence solving prompt (math)");

    // scale-context
    auto* scale = app.add_subcommand("scale-context", "Grow contexts with donor material");
    std::string sc_in, sc_targets = "10000,25000,50000", sc_out;
    scale->add_option("--in", sc_in, "Input dataset")->required();
    scale->add_option("--targets", sc_targets, "Comma-separated token targets");
    scale->add_option("--out", sc_out, "Output directory");

    // stats
    auto* stats = app.add_subcommand("stats", "Dataset summary statistics");
    std::string st_in;
    stats->add_option("--in", st_in, "Input dataset")->required();

    // cache
    auto* cache_cmd = app.add_subcommand("cache", "Transcript cache maintenance");
    cache_cmd->require_subcommand(1);
    std::string cr_transcripts, cr_dir;
    auto* cache_record = cache_cmd->add_subcommand("record", "Store transcripts into a cache");
    cache_record->add_option("--transcripts", cr_transcripts, "JSONL transcript file")
        ->required();
    cache_record->add_option("--cache-dir", cr_dir, "Cache directory")->required();
    std::string cc_dir;
    auto* cache_check =
        cache_cmd->add_subcommand("replay-check", "Verify cache layout and readability");
    cache_check->add_option("--cache-dir", cc_dir, "Cache directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (gen_qa->parsed()) return run_generate_qa(opts, gen_target, gen_out, qa_seed_file);
        if (gen_code->parsed())
            return run_generate_code(opts, code_domain, gen_target, helper_pool, gen_out);
        if (gen_math->parsed()) return run_generate_math(opts, math_seed_file, gen_target, gen_out);
        if (reject->parsed()) return run_reject_sample(opts, rs_in, rs_out, rs_trials, rs_fraction);
        if (evaluate->parsed()) return run_evaluate(opts, ev_in, ev_metric, ev_sentence);
        if (scale->parsed()) return run_scale_context(opts, sc_in, sc_targets, sc_out);
        if (stats->parsed()) return run_stats(opts, st_in);
        if (cache_record->parsed()) return run_cache_record(opts, cr_transcripts, cr_dir);
        if (cache_check->parsed()) return run_cache_replay_check(opts, cc_dir);
        std::cerr << "no subcommand selected\n";
        return 1;
    } catch (const chase::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}

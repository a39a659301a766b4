#include <doctest.h>

#include <set>
#include <string>
#include <vector>

#include "chase/code.hpp"
#include "scripted.hpp"

using namespace chase;
using namespace chase::code;

namespace {

struct Rig {
    testsupport::TempDir tmp;
    RunConfig cfg;
    TranscriptCache cache;
    testsupport::ScriptedTransport transport;
    ProviderClient client;
    Rig()
        : cfg(testsupport::make_test_config(tmp.path(), CacheMode::passthrough)),
          cache(CacheMode::passthrough, tmp.path()),
          client(cache, &transport) {}
    Pipeline pipeline() { return Pipeline(client, cfg, testsupport::test_prompts()); }
};

}  // namespace

TEST_CASE("contains_token respects identifier boundaries") {
    CHECK(contains_token("x = helper_a(v)", "helper_a"));
    CHECK_FALSE(contains_token("x = helper_ab(v)", "helper_a"));
    CHECK_FALSE(contains_token("x = my_helper_a(v)", "helper_a"));
    CHECK(contains_token("helper_a", "helper_a"));
    CHECK(contains_token("from m import helper_a\n", "helper_a"));
    CHECK_FALSE(contains_token("", "helper_a"));
}

TEST_CASE("helper generation produces verified, unique helpers") {
    Rig rig;
    Pipeline p = rig.pipeline();
    auto pool = p.generate_helpers("data_preprocessing", {}, 8);
    REQUIRE(pool.size() == 8);
    std::set<std::string> names;
    for (const auto& h : pool) {
        CHECK(names.insert(h.name).second);
        CHECK(h.verified_executes);
        CHECK(h.objectives.size() >= 3);
        CHECK(h.objectives.size() <= 4);
        CHECK(h.source.find("def " + h.name) != std::string::npos);
        CHECK_FALSE(h.file_name.empty());
    }
    CHECK(p.ledger().conserved());
}

TEST_CASE("parse_problem_response enforces objective counts") {
    std::string few =
        "Parameters:\n- a: int\n"
        "Objectives:\n- one\n- two\n\n"
        "Function \"f\" in file \"f.py\":\ndef f(a):\n    return a\n";
    CHECK_THROWS_AS(parse_problem_response(few), ParseError);
}

TEST_CASE("assemble_repo pins relevant files and enforces the pool minimum") {
    Rig rig;
    Pipeline p = rig.pipeline();
    auto pool = p.generate_helpers("algorithms", {}, 16);
    REQUIRE(pool.size() == 16);

    std::vector<HelperFunction> relevant(pool.begin(), pool.begin() + 4);
    std::vector<HelperFunction> rest(pool.begin() + 4, pool.end());

    Rng rng(5);
    RepoContext repo = assemble_repo(relevant, rest, rig.cfg.params, ".py", rng);
    CHECK(repo.files.size() == static_cast<std::size_t>(rig.cfg.params.repo_file_count));
    for (const auto& h : relevant) {
        REQUIRE(repo.function_index.count(h.name));
        CHECK(repo.function_index.at(h.name) == h.file_name);
        CHECK(repo.files.at(h.file_name).find("def " + h.name) != std::string::npos);
    }
    // 4 relevant + m irrelevant functions in total.
    CHECK(repo.function_index.size() ==
          static_cast<std::size_t>(4 + rig.cfg.params.m_irrelevant_functions));

    std::vector<HelperFunction> tiny(rest.begin(), rest.begin() + 3);
    Rng rng2(5);
    CHECK_THROWS_AS(assemble_repo(relevant, tiny, rig.cfg.params, ".py", rng2),
                    std::exception);
}

TEST_CASE("full code generation yields runnable gold solutions") {
    Rig rig;
    Pipeline p = rig.pipeline();
    auto pool = p.generate_helpers("data_preprocessing", {}, 18);
    auto examples = p.generate("data_preprocessing", pool, 2);
    REQUIRE(examples.size() == 2);
    CHECK(p.ledger().conserved());

    std::set<std::string> ids;
    for (const auto& ex : examples) {
        CHECK(ids.insert(ex.id).second);
        CHECK(ex.relevant_helper_names.size() >= 4);
        CHECK(ex.relevant_helper_names.size() <= 6);
        // The statement never names the helpers.
        for (const auto& name : ex.relevant_helper_names) {
            CHECK_FALSE(contains_token(ex.statement, name));
            CHECK(contains_token(ex.gold_answer, name));
        }
        CHECK(contains_token(ex.gold_answer, ex.function_name));
        CHECK(ex.repo.files.size() ==
              static_cast<std::size_t>(rig.cfg.params.repo_file_count));
        CHECK_FALSE(ex.repo.files.count(ex.answer_file));

        ExecResult gold = p.run_test(ex.repo, ex.answer_file, ex.gold_answer, ex.gold_test);
        CHECK(gold.status == ExecStatus::pass);

        // The test actually discriminates: an empty solution must fail.
        std::string stub = "def " + ex.function_name + "(a, b):\n    return None\n";
        ExecResult bad = p.run_test(ex.repo, ex.answer_file, stub, ex.gold_test);
        CHECK(bad.status != ExecStatus::pass);
    }
}

TEST_CASE("code generation is deterministic for a fixed seed") {
    auto run = [] {
        Rig rig;
        Pipeline p = rig.pipeline();
        auto pool = p.generate_helpers("algorithms", {}, 18);
        return p.generate("algorithms", pool, 2);
    };
    auto a = run();
    auto b = run();
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].id == b[i].id);
        CHECK(a[i].function_name == b[i].function_name);
        CHECK(a[i].gold_answer == b[i].gold_answer);
        CHECK(a[i].gold_test == b[i].gold_test);
        CHECK(a[i].repo.files == b[i].repo.files);
    }
}

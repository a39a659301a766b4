#include <doctest.h>

#include <optional>
#include <string>
#include <vector>

#include "chase/math.hpp"
#include "scripted.hpp"

using namespace chase;
using namespace chase::math;

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

std::string vault_seed(int i, int n) {
    return "Case " + std::to_string(i) + " vault starts with " + std::to_string(n) +
           " tokens in storage. How many tokens are in the final tally?";
}

}  // namespace

TEST_CASE("leaks_answer detects standalone digit renderings") {
    CHECK(leaks_answer("there are 4 pens", Decimal(4)));
    CHECK(leaks_answer("exactly 4.0 items", Decimal(4)));
    CHECK_FALSE(leaks_answer("there are 40 pens", Decimal(4)));
    CHECK_FALSE(leaks_answer("item 14 on the list", Decimal(4)));
    CHECK_FALSE(leaks_answer("four pens", Decimal(4)));
    CHECK(leaks_answer("total: 12.5 units", *Decimal::parse("12.5")));
    CHECK_FALSE(leaks_answer("total: 112.5 units", *Decimal::parse("12.5")));
}

TEST_CASE("posthoc_classify splits kept, discarded, and flagged") {
    Decimal gold(10);
    std::vector<std::optional<Decimal>> all_right{Decimal(10), Decimal(10), Decimal(10)};
    CHECK(posthoc_classify(all_right, gold, 3) == FilterOutcome::kept);

    // Majority agree on the same wrong answer: discard.
    std::vector<std::optional<Decimal>> agree_wrong{Decimal(7), Decimal(7), Decimal(10)};
    CHECK(posthoc_classify(agree_wrong, gold, 3) == FilterOutcome::discarded);

    // Verifiers scatter: flagged for manual review.
    std::vector<std::optional<Decimal>> scattered{Decimal(7), Decimal(9), std::nullopt};
    CHECK(posthoc_classify(scattered, gold, 3) == FilterOutcome::flagged);

    CHECK_THROWS_AS(posthoc_classify(all_right, gold, 1), std::invalid_argument);
    CHECK_THROWS_AS(posthoc_classify(scattered, gold, 5), std::invalid_argument);
}

TEST_CASE("breakdown splits a seed into context and question") {
    Rig rig;
    Pipeline p = rig.pipeline();
    auto seed = p.breakdown_seed(vault_seed(1, 7), Decimal(7), "seed1");
    REQUIRE(seed);
    CHECK(seed->context == "Case 1 vault starts with 7 tokens in storage.");
    CHECK(seed->question == "How many tokens are in the final tally?");
    CHECK(seed->answer == Decimal(7));
    CHECK_FALSE(seed->answer_statement.empty());
}

TEST_CASE("continuation extends the problem without leaking the answer") {
    Rig rig;
    Pipeline p = rig.pipeline();
    auto seed = p.breakdown_seed(vault_seed(2, 9), Decimal(9), "seed2");
    REQUIRE(seed);
    auto cont = p.generate_continuation(*seed, "p0.s0.i0");
    REQUIRE(cont);
    CHECK_FALSE(cont->new_context.empty());
    CHECK_FALSE(cont->new_question.empty());
    CHECK_FALSE(leaks_answer(cont->new_context, seed->answer));
}

TEST_CASE("combine appends context and tracks depth") {
    ComposedMathProblem base;
    base.id = "m";
    base.context_chain = {"ctx one."};
    base.question = "Old question?";
    base.answer = Decimal(5);
    base.depth = 1;
    Continuation cont;
    cont.new_context = "ctx two.";
    cont.new_question = "New question?";
    cont.new_answer = Decimal(8);
    ComposedMathProblem next = Pipeline::combine(base, cont);
    CHECK(next.depth == 2);
    REQUIRE(next.context_chain.size() == 2);
    CHECK(next.context_chain[1] == "ctx two.");
    CHECK(next.question == "New question?");
    CHECK(next.answer == Decimal(8));
    std::string text = composed_text(next);
    CHECK(text.find("ctx one.") != std::string::npos);
    CHECK(text.find("ctx two.") != std::string::npos);
    CHECK(text.find("New question?") != std::string::npos);
}

TEST_CASE("verify_ensemble accepts the true answer and rejects a wrong one") {
    Rig rig;
    Pipeline p = rig.pipeline();
    std::string context =
        "Case 3 vault starts with 6 tokens in storage. Later on, a careful assistant "
        "increases the running tally by adding the number 4 to the previous result.";
    std::string question = "What is the value of the final tally now?";
    CHECK(p.verify_ensemble(context, question, Decimal(10)));
    CHECK_FALSE(p.verify_ensemble(context, question, Decimal(11)));
}

TEST_CASE("iterate_depth composes within the configured depth band") {
    Rig rig;
    Pipeline p = rig.pipeline();
    auto seed = p.breakdown_seed(vault_seed(4, 11), Decimal(11), "seed4");
    REQUIRE(seed);
    auto composed = p.iterate_depth(*seed, "seed4", "p0");
    REQUIRE(composed);
    CHECK(composed->depth >= rig.cfg.params.depth_min);
    CHECK(composed->depth <= rig.cfg.params.depth_max);
    CHECK(composed->depth == static_cast<int>(composed->context_chain.size()));
    CHECK(composed->seed_id == "seed4");
}

TEST_CASE("the pens walkthrough composes 4 -> x3 -> 12") {
    Rig rig;
    rig.cfg.params.depth_min = 2;
    rig.cfg.params.depth_max = 2;
    Pipeline p = rig.pipeline();
    auto seed = p.breakdown_seed(
        "Jack has 4 pens in his drawer. How many pens does Jack have in total?", Decimal(4),
        "pens");
    REQUIRE(seed);
    auto composed = p.iterate_depth(*seed, "pens", "p0");
    REQUIRE(composed);
    CHECK(composed->depth == 2);
    CHECK(composed->answer == Decimal(12));
    CHECK(composed->question == "How many pens are there in total now?");
    // The continuation context may not state the intermediate answer 4.
    CHECK_FALSE(leaks_answer(composed->context_chain[1], Decimal(4)));
}

TEST_CASE("full math generation is deterministic and conserved") {
    std::vector<std::pair<std::string, Decimal>> seeds;
    for (int i = 0; i < 4; ++i) seeds.push_back({vault_seed(i, 5 + i), Decimal(5 + i)});

    auto run = [&] {
        Rig rig;
        Pipeline p = rig.pipeline();
        auto out = p.generate(seeds, 3);
        CHECK(p.ledger().conserved());
        return out;
    };
    auto a = run();
    auto b = run();
    REQUIRE(a.size() == 3);
    REQUIRE(b.size() == 3);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].id == b[i].id);
        CHECK(a[i].id.rfind("math-", 0) == 0);
        CHECK(composed_text(a[i]) == composed_text(b[i]));
        CHECK(a[i].answer == b[i].answer);
        CHECK_FALSE(a[i].provenance.empty());
    }
}

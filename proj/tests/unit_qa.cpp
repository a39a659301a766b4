#include <doctest.h>

#include <set>
#include <string>
#include <vector>

#include "chase/qa.hpp"
#include "scripted.hpp"

using namespace chase;
using namespace chase::qa;

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

TEST_CASE("scenario generation dedupes and hits the target") {
    Rig rig;
    Pipeline p = rig.pipeline();
    auto scenarios = p.generate_scenarios(default_seed_scenarios(), 7);
    CHECK(scenarios.size() == 7);
    std::set<std::string> keys;
    for (const auto& s : scenarios) {
        CHECK_FALSE(s.persona.empty());
        CHECK_FALSE(s.collection.empty());
        CHECK(keys.insert(scenario_key(s)).second);
    }
}

TEST_CASE("scenario_key normalizes case and spacing") {
    Scenario a{"A  Persona", "Some Docs"};
    Scenario b{"a persona", "some  docs"};
    CHECK(scenario_key(a) == scenario_key(b));
}

TEST_CASE("qa pair parsing maps points onto the outline") {
    Rig rig;
    Pipeline p = rig.pipeline();
    auto scenarios = p.generate_scenarios(default_seed_scenarios(), 1);
    REQUIRE(scenarios.size() == 1);
    auto pair = p.generate_qa_pair(scenarios[0], 0);
    REQUIRE(pair);
    CHECK(pair->points.size() == 4);
    REQUIRE(pair->outline.size() == 3);
    // The outline partitions the point indices.
    std::set<int> seen;
    for (const auto& e : pair->outline)
        for (int i : e.point_indices) {
            CHECK(i >= 0);
            CHECK(i < static_cast<int>(pair->points.size()));
            CHECK(seen.insert(i).second);
        }
    CHECK(seen.size() == pair->points.size());
}

TEST_CASE("parse_qa_pair_response rejects structural defects") {
    std::string good =
        "Question: Q?\n"
        "Answer:\n- alpha point\n- beta point\n- gamma point\n\n"
        "Document 1 Title: One\n"
        "Document 1 Answer points assigned:\n- alpha point\n- beta point\n\n"
        "Document 2 Title: Two\n"
        "Document 2 Answer points assigned:\n- gamma point\n\n"
        "Document 3 Title: Three\n"
        "Document 3 Answer points assigned:\n- gamma point\n";
    // gamma is assigned to two documents
    CHECK_THROWS_AS(parse_qa_pair_response(good, ""), ParseError);

    std::string unassigned =
        "Question: Q?\n"
        "Answer:\n- alpha point\n- beta point\n- gamma point\n\n"
        "Document 1 Title: One\n"
        "Document 1 Answer points assigned:\n- alpha point\n\n"
        "Document 2 Title: Two\n"
        "Document 2 Answer points assigned:\n- beta point\n";
    CHECK_THROWS_AS(parse_qa_pair_response(unassigned, ""), ParseError);
}

TEST_CASE("adversarial pairs verify as irrelevant to the gold question") {
    Rig rig;
    Pipeline p = rig.pipeline();
    auto scenarios = p.generate_scenarios(default_seed_scenarios(), 1);
    auto gold = p.generate_qa_pair(scenarios[0], 0);
    REQUIRE(gold);
    auto adversarial = p.generate_irrelevant_set(scenarios[0], *gold, 2);
    REQUIRE(adversarial.size() == 2);
    for (const auto& adv : adversarial) {
        CHECK(adv.question != gold->question);
        CHECK(p.verify_irrelevance(gold->question, adv));
        // Adversarial sets must not reuse gold points.
        for (const auto& pt : adv.points)
            for (const auto& gp : gold->points) CHECK(pt != gp);
    }
}

TEST_CASE("full qa generation yields structurally sound examples") {
    Rig rig;
    Pipeline p = rig.pipeline();
    auto examples = p.generate(default_seed_scenarios(), 2);
    REQUIRE(examples.size() == 2);
    CHECK(p.ledger().conserved());

    std::set<std::string> ids;
    for (const auto& ex : examples) {
        CHECK(ids.insert(ex.id).second);
        CHECK(structural_violation(ex).empty());
        CHECK_FALSE(ex.provenance.empty());
        CHECK(ex.irrelevant.size() == 2);

        int relevant = 0;
        std::set<std::string> titles;
        for (const auto& d : ex.documents) {
            CHECK(titles.insert(d.title).second);
            if (d.relevant) {
                ++relevant;
                CHECK(d.word_count >= 700);
                // Every relevant document embeds at least one gold point.
                bool has_point = false;
                for (const auto& pt : ex.gold.points)
                    if (d.body.find(pt) != std::string::npos) has_point = true;
                CHECK(has_point);
            }
        }
        CHECK(relevant == static_cast<int>(ex.gold.outline.size()));
        // 2 adversarial pairs with 3 documents each.
        CHECK(ex.documents.size() == ex.gold.outline.size() + 6);

        // Adversarial points never leak into relevant documents.
        for (const auto& d : ex.documents) {
            if (!d.relevant) continue;
            for (const auto& adv : ex.irrelevant)
                for (const auto& pt : adv.points)
                    CHECK(d.body.find(pt) == std::string::npos);
        }
    }
}

TEST_CASE("qa generation is deterministic for a fixed seed") {
    auto run = [] {
        Rig rig;
        Pipeline p = rig.pipeline();
        return p.generate(default_seed_scenarios(), 2);
    };
    auto a = run();
    auto b = run();
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].id == b[i].id);
        CHECK(a[i].gold.question == b[i].gold.question);
        CHECK(a[i].gold.points == b[i].gold.points);
        REQUIRE(a[i].documents.size() == b[i].documents.size());
        for (std::size_t d = 0; d < a[i].documents.size(); ++d) {
            CHECK(a[i].documents[d].title == b[i].documents[d].title);
            CHECK(a[i].documents[d].body == b[i].documents[d].body);
        }
    }
}

TEST_CASE("structural_violation flags tampering") {
    Rig rig;
    Pipeline p = rig.pipeline();
    auto examples = p.generate(default_seed_scenarios(), 1);
    REQUIRE(examples.size() == 1);
    QAExample ex = examples[0];
    REQUIRE(ex.documents.size() >= 2);
    ex.documents[1].title = ex.documents[0].title;  // duplicate title
    CHECK_FALSE(structural_violation(ex).empty());
}

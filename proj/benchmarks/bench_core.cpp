// Microbenchmarks for the hot paths: cache-key digesting, template
// rendering, structured-response parsing, and numeric extraction.

#include <benchmark/benchmark.h>

#include <map>
#include <string>

#include "chase/decimal.hpp"
#include "chase/digest.hpp"
#include "chase/promptkit.hpp"
#include "chase/provider.hpp"

namespace {

std::string repeated_paragraph(std::size_t words) {
    std::string out;
    for (std::size_t i = 0; i < words; ++i) out += "word" + std::to_string(i % 17) + " ";
    return out;
}

void BM_Sha256(benchmark::State& state) {
    std::string payload = repeated_paragraph(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(chase::sha256_hex(payload));
    state.SetBytesProcessed(static_cast<int64_t>(state.iterations()) *
                            static_cast<int64_t>(payload.size()));
}
BENCHMARK(BM_Sha256)->Arg(64)->Arg(1024)->Arg(16384);

void BM_CacheKey(benchmark::State& state) {
    chase::ModelEndpoint ep;
    ep.provider_id = "openai_compat";
    ep.model_name = "example-model";
    chase::ChatRequest req;
    req.system_text = "You answer using only the provided documents.";
    req.user_text = repeated_paragraph(static_cast<std::size_t>(state.range(0)));
    req.sample_tag = "bench.t0";
    for (auto _ : state) benchmark::DoNotOptimize(chase::cache_key(ep, req));
}
BENCHMARK(BM_CacheKey)->Arg(256)->Arg(4096);

void BM_RenderTemplate(benchmark::State& state) {
    chase::PromptTemplate tpl;
    tpl.name = "bench";
    tpl.body = "Persona: {{persona}}\n\nDocuments:\n{{documents}}\n\nQuestion: {{question}}\n";
    tpl.placeholders = {"persona", "documents", "question"};
    std::map<std::string, std::string> bindings{
        {"persona", "records clerk"},
        {"documents", repeated_paragraph(2000)},
        {"question", "What are the required steps?"}};
    for (auto _ : state) benchmark::DoNotOptimize(chase::render(tpl, bindings));
}
BENCHMARK(BM_RenderTemplate);

void BM_ParseRecord(benchmark::State& state) {
    chase::FormatSpec spec;
    spec.fields = {{"Question", chase::FieldKind::line},
                   {"Answer", chase::FieldKind::list}};
    chase::GroupSpec docs;
    docs.prefix = "Document";
    docs.fields = {{"Title", chase::FieldKind::line},
                   {"Answer points assigned", chase::FieldKind::list}};
    spec.group = docs;

    std::string text =
        "Question: What are the required steps?\n"
        "Answer:\n- first point\n- second point\n- third point\n\n"
        "Document 1 Title: Guide Part 1\n"
        "Document 1 Answer points assigned:\n- first point\n- second point\n\n"
        "Document 2 Title: Guide Part 2\n"
        "Document 2 Answer points assigned:\n- third point\n";
    for (auto _ : state) benchmark::DoNotOptimize(chase::parse_record(spec, text));
}
BENCHMARK(BM_ParseRecord);

void BM_ParseFinalNumber(benchmark::State& state) {
    std::string text = repeated_paragraph(200) + "\nSo the final answer is ####2,147.5.";
    for (auto _ : state) benchmark::DoNotOptimize(chase::parse_final_number(text));
}
BENCHMARK(BM_ParseFinalNumber);

void BM_DecimalFold(benchmark::State& state) {
    chase::Decimal start = chase::Decimal::parse("100.25").value();
    chase::Decimal step = chase::Decimal::parse("3.5").value();
    for (auto _ : state) {
        chase::Decimal acc = start;
        for (int i = 0; i < 64; ++i) acc = acc + step;
        benchmark::DoNotOptimize(acc);
    }
}
BENCHMARK(BM_DecimalFold);

}  // namespace

BENCHMARK_MAIN();

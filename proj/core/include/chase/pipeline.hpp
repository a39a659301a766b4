#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "chase/rng.hpp"

namespace chase {

// Generation-scale knobs shared by the three domain pipelines.
struct PipelineParams {
    int n_helpers_sampled = 10;
    int k_min_relevant = 4;
    int m_irrelevant_functions = 100;
    int repo_file_count = 10;
    int irrelevant_qa_count = 4;
    int qa_pairs_per_scenario = 2;
    int depth_min = 2;
    int depth_max = 8;
    int continuation_iters = 15;
    int passes = 3;
    int test_code_attempts = 10;
    int reject_trials_t = 1;
    double reject_fraction_f = 0.5;
    int stage_retry_budget = 3;
    std::uint64_t rng_seed = 0;

    void validate() const;  // throws std::invalid_argument
};

struct StageCounters {
    std::int64_t attempted = 0;
    std::int64_t accepted = 0;
    std::int64_t discarded = 0;
    std::map<std::string, std::int64_t> discard_reasons;
};

class YieldLedger {
public:
    void record_attempt(const std::string& stage) { stages_[stage].attempted++; }
    void record_accept(const std::string& stage) { stages_[stage].accepted++; }
    void record_discard(const std::string& stage, const std::string& reason) {
        auto& c = stages_[stage];
        c.discarded++;
        c.discard_reasons[reason]++;
    }

    void merge(const YieldLedger& other);
    bool conserved() const;  // attempted == accepted + discarded everywhere

    const std::map<std::string, StageCounters>& stages() const { return stages_; }
    std::string to_text() const;
    std::string to_json() const;

private:
    std::map<std::string, StageCounters> stages_;
};

template <typename T>
struct StageOutcome {
    bool accepted = false;
    T payload{};
    std::string reason;  // nonempty iff discarded

    static StageOutcome accept(T value) { return {true, std::move(value), {}}; }
    static StageOutcome discard(std::string why) { return {false, {}, std::move(why)}; }
};

// Each input item is tried up to `budget` times; every attempt is logged.
// Transport errors inside `fn` count as a failed attempt, not a crash.
template <typename In, typename Out>
std::vector<Out> run_stage(const std::string& name, const std::vector<In>& inputs, int budget,
                           const std::function<StageOutcome<Out>(const In&)>& fn,
                           YieldLedger& ledger) {
    std::vector<Out> outputs;
    for (const auto& item : inputs) {
        std::string last_reason = "budget exhausted";
        bool done = false;
        for (int attempt = 0; attempt < budget && !done; ++attempt) {
            ledger.record_attempt(name);
            StageOutcome<Out> result;
            try {
                result = fn(item);
            } catch (const std::exception& e) {
                result = StageOutcome<Out>::discard(std::string("error: ") + e.what());
            }
            if (result.accepted) {
                ledger.record_accept(name);
                outputs.push_back(std::move(result.payload));
                done = true;
            } else {
                ledger.record_discard(name, result.reason);
                last_reason = result.reason;
            }
        }
    }
    return outputs;
}

// Solver correctness per trial; an example counts as solved iff correct in
// all `t` trials. Solved examples are then discarded with probability `f`,
// drawing the rng once per solved example in input order so the kept set
// is reproducible. Unsolved examples are always kept; order preserved.
template <typename T>
std::vector<T> rejection_sample(const std::vector<T>& examples,
                                const std::function<bool(const T&, int trial)>& solver_correct,
                                int t, double f, Rng& rng) {
    std::vector<T> kept;
    for (const auto& ex : examples) {
        bool solved = true;
        for (int trial = 0; trial < t && solved; ++trial) {
            try {
                solved = solver_correct(ex, trial);
            } catch (const std::exception&) {
                solved = false;  // solver failure counts as incorrect
            }
        }
        if (solved) {
            if (rng.unit() < f) continue;  // discard
        }
        kept.push_back(ex);
    }
    return kept;
}

}  // namespace chase

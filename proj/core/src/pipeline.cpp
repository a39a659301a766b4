#include "chase/pipeline.hpp"

#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace chase {

void PipelineParams::validate() const {
    if (depth_min < 1) throw std::invalid_argument("depth_min must be >= 1");
    if (depth_min > depth_max) throw std::invalid_argument("depth_min > depth_max");
    if (reject_fraction_f < 0.0 || reject_fraction_f > 1.0)
        throw std::invalid_argument("reject_fraction_f must be in [0,1]");
    if (k_min_relevant > n_helpers_sampled)
        throw std::invalid_argument("k_min_relevant > n_helpers_sampled");
    if (reject_trials_t < 1) throw std::invalid_argument("reject_trials_t must be >= 1");
    if (stage_retry_budget < 1) throw std::invalid_argument("stage_retry_budget must be >= 1");
}

void YieldLedger::merge(const YieldLedger& other) {
    for (const auto& [stage, c] : other.stages_) {
        auto& mine = stages_[stage];
        mine.attempted += c.attempted;
        mine.accepted += c.accepted;
        mine.discarded += c.discarded;
        for (const auto& [reason, n] : c.discard_reasons) mine.discard_reasons[reason] += n;
    }
}

bool YieldLedger::conserved() const {
    for (const auto& [_, c] : stages_) {
        if (c.attempted != c.accepted + c.discarded) return false;
        std::int64_t reasons = 0;
        for (const auto& [__, n] : c.discard_reasons) reasons += n;
        if (reasons != c.discarded) return false;
    }
    return true;
}

std::string YieldLedger::to_text() const {
    std::ostringstream out;
    out << "stage\tattempted\taccepted\tdiscarded\n";
    for (const auto& [stage, c] : stages_) {
        out << stage << "\t" << c.attempted << "\t" << c.accepted << "\t" << c.discarded << "\n";
        for (const auto& [reason, n] : c.discard_reasons)
            out << "  - " << reason << ": " << n << "\n";
    }
    return out.str();
}

std::string YieldLedger::to_json() const {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [stage, c] : stages_) {
        nlohmann::json reasons = nlohmann::json::object();
        for (const auto& [reason, n] : c.discard_reasons) reasons[reason] = n;
        j[stage] = {{"attempted", c.attempted},
                    {"accepted", c.accepted},
                    {"discarded", c.discarded},
                    {"discard_reasons", reasons}};
    }
    return j.dump(2);
}

}  // namespace chase

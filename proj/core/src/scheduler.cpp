#include "selftrain/scheduler.hpp"

#include <algorithm>
#include <unordered_set>

#include "selftrain/errors.hpp"

namespace selftrain {

void validate(const BudgetConfig& budget) {
    if (budget.n_p == 0) throw ValidationError("pre-sampling count n_p must be >= 1");
    if (!(budget.n_p < budget.n_t)) {
        throw ValidationError("budget requires n_p < n_t (got n_p=" + std::to_string(budget.n_p) +
                              ", n_t=" + std::to_string(budget.n_t) + ")");
    }
}

BudgetPlan plan_resampling(const std::vector<std::string>& all_ids,
                           const std::vector<std::string>& target_ids,
                           const BudgetConfig& budget) {
    validate(budget);
    if (all_ids.empty()) throw ValidationError("cannot plan over an empty problem set");

    std::unordered_set<std::string> universe;
    universe.reserve(all_ids.size());
    for (const auto& id : all_ids) {
        if (!universe.insert(id).second) {
            throw ValidationError("duplicate problem id in plan input: " + id);
        }
    }
    for (const auto& id : target_ids) {
        if (!universe.count(id)) {
            throw ValidationError("re-sampling target \"" + id +
                                  "\" is not part of the problem set");
        }
    }

    BudgetPlan plan;
    plan.budget = budget;
    for (const auto& id : all_ids) plan.pre_counts[id] = budget.n_p;

    // Leftover budget after pre-sampling; the floor share plus a one-unit
    // remainder spread keeps the grand total exact.
    const std::uint64_t remaining =
        static_cast<std::uint64_t>(budget.n_t - budget.n_p) * all_ids.size();
    std::vector<std::string> targets =
        target_ids.empty() ? all_ids : target_ids;  // uniform fallback
    std::sort(targets.begin(), targets.end());

    const std::uint64_t base = remaining / targets.size();
    const std::uint64_t extra = remaining % targets.size();
    for (std::size_t i = 0; i < targets.size(); ++i) {
        plan.re_counts[targets[i]] = static_cast<std::uint32_t>(base + (i < extra ? 1 : 0));
    }

    plan.total = static_cast<std::uint64_t>(budget.n_p) * all_ids.size() + remaining;
    return plan;
}

BudgetPlan plan_strategy(const std::vector<DifficultyVerdict>& verdicts,
                         const StrategySet& strategy, const BudgetConfig& budget) {
    std::vector<std::string> all_ids;
    std::vector<std::string> targets;
    all_ids.reserve(verdicts.size());
    for (const auto& v : verdicts) {
        all_ids.push_back(v.problem_id);
        if (strategy.count(v.cls)) targets.push_back(v.problem_id);
    }
    return plan_resampling(all_ids, targets, budget);
}

StrategySet strategy_from_string(std::string_view token) {
    if (token == "uniform" || token == "none" || token.empty()) return {};
    if (token == "all") {
        return {DifficultyClass::Inlier, DifficultyClass::Boundary, DifficultyClass::Outlier};
    }
    StrategySet strategy;
    std::size_t pos = 0;
    while (pos <= token.size()) {
        const std::size_t next = token.find('+', pos);
        const std::string_view part =
            next == std::string_view::npos ? token.substr(pos) : token.substr(pos, next - pos);
        if (part == "inlier") {
            strategy.insert(DifficultyClass::Inlier);
        } else if (part == "boundary") {
            strategy.insert(DifficultyClass::Boundary);
        } else if (part == "outlier") {
            strategy.insert(DifficultyClass::Outlier);
        } else {
            throw UsageError("unknown strategy token: \"" + std::string(part) + "\"");
        }
        if (next == std::string_view::npos) break;
        pos = next + 1;
    }
    return strategy;
}

std::string to_string(const StrategySet& strategy) {
    if (strategy.empty()) return "uniform";
    std::string out;
    for (DifficultyClass cls : strategy) {
        if (!out.empty()) out += '+';
        switch (cls) {
            case DifficultyClass::Inlier: out += "inlier"; break;
            case DifficultyClass::Boundary: out += "boundary"; break;
            case DifficultyClass::Outlier: out += "outlier"; break;
        }
    }
    return out;
}

}  // namespace selftrain

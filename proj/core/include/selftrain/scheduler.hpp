#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "selftrain/estimator.hpp"

namespace selftrain {

struct BudgetConfig {
    std::uint32_t n_t = 8;  // average samples per problem (total budget / |D|)
    std::uint32_t n_p = 3;  // pre-sampling count
};

void validate(const BudgetConfig& budget);  // requires 1 <= n_p < n_t

/**
 * Per-problem sample counts for both phases. Invariant: total equals
 * n_t * |all problems| exactly; re_counts holds entries for target problems
 * only and is balanced to within one sample.
 */
struct BudgetPlan {
    BudgetConfig budget;
    std::map<std::string, std::uint32_t> pre_counts;
    std::map<std::string, std::uint32_t> re_counts;
    std::uint64_t total = 0;
};

// Spreads the leftover budget (n_t - n_p) * |all| over the target set:
// floor share each, remainder to the first targets in ascending id order.
// An empty target set falls back to uniform spreading over all problems.
BudgetPlan plan_resampling(const std::vector<std::string>& all_ids,
                           const std::vector<std::string>& target_ids,
                           const BudgetConfig& budget);

// Empty set selects no class and means "no reallocation": the leftover budget
// is spread uniformly, which reduces to plain uniform sampling.
using StrategySet = std::set<DifficultyClass>;

BudgetPlan plan_strategy(const std::vector<DifficultyVerdict>& verdicts,
                         const StrategySet& strategy, const BudgetConfig& budget);

// "boundary", "inlier+outlier", "all", "uniform"/"none" (empty set).
StrategySet strategy_from_string(std::string_view token);
std::string to_string(const StrategySet& strategy);

}  // namespace selftrain

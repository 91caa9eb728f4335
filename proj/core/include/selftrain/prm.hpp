#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "selftrain/dataset.hpp"

namespace selftrain {

enum class Phase { Pre, Re };

/**
 * One sampled solution. `sample_index` is global per problem: re-sampling
 * continues the index range started by pre-sampling, which keeps the per-sample
 * random streams stable across differently shaped budget plans.
 *
 * step_rewards stays empty until a scorer fills it; correct stays unset until
 * a verdict is attached (the endpoint path leaves it for the verifier).
 */
struct ResponseRecord {
    std::string problem_id;
    std::uint32_t sample_index = 0;
    Phase phase = Phase::Pre;
    std::string text;
    std::vector<std::string> steps;
    std::vector<double> step_rewards;
    double reward = 0.0;
    std::optional<bool> correct;

    bool scored() const { return !step_rewards.empty(); }
    bool has_verdict() const { return correct.has_value(); }
    bool is_correct() const;  // throws ValidationError when no verdict is set
};

enum class RewardAggregation { Min, Mean, Last };

// Splits solution text on blank-line step delimiters, trimming each step and
// dropping empty segments; whole text becomes a single step when no delimiter
// is present. Throws ValidationError on empty/whitespace-only text.
std::vector<std::string> segment_steps(std::string_view text);

// Response-level score from per-step scores. Min is the default; Mean and
// Last exist only for ablation. Values must lie in [0, 1].
double aggregate_reward(const std::vector<double>& step_rewards,
                        RewardAggregation aggregation = RewardAggregation::Min);

struct PrmParams {
    double mu_correct = 0.85;
    double mu_incorrect = 0.25;
    double sigma = 0.15;
    RewardAggregation aggregation = RewardAggregation::Min;
};

// Scales the mean separation around 0.5: coupling 1 keeps the configured
// means, 0 collapses both to an uninformative 0.5.
PrmParams scale_reward_separation(PrmParams params, double coupling);

class Scorer {
public:
    virtual ~Scorer() = default;

    // Fills step_rewards and reward; never touches text, steps or correct.
    virtual ResponseRecord score(const Problem& problem, ResponseRecord record) const = 0;
};

/**
 * Correctness-correlated noisy scorer: each step score is drawn from a
 * truncated-to-[0,1] gaussian with mean mu_correct or mu_incorrect, keyed by
 * (seed, problem_id, sample_index, step index) so scoring order is irrelevant.
 */
class SimulatedScorer final : public Scorer {
public:
    SimulatedScorer(PrmParams params, std::uint64_t seed);

    ResponseRecord score(const Problem& problem, ResponseRecord record) const override;

    const PrmParams& params() const { return params_; }

private:
    PrmParams params_;
    std::uint64_t seed_;
};

const char* to_string(Phase phase);
Phase phase_from_string(std::string_view s);
const char* to_string(RewardAggregation aggregation);
RewardAggregation aggregation_from_string(std::string_view s);

}  // namespace selftrain

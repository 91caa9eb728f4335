#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "selftrain/prm.hpp"

namespace selftrain {

/// A (chosen, rejected) response pair; rank is the 1-based position in the
/// top-k pairing.
struct PreferencePair {
    std::string problem_id;
    ResponseRecord chosen;    // correct
    ResponseRecord rejected;  // incorrect
    std::uint32_t rank = 1;
};

struct LossInputs {
    double beta = 0.1;
    double logp_policy_chosen = 0.0;
    double logp_ref_chosen = 0.0;
    double logp_policy_rejected = 0.0;
    double logp_ref_rejected = 0.0;
};

// Partitions scored+verified records into correct/incorrect, sorts each by
// reward descending (ties by ascending phase then sample_index), and pairs
// rank i with rank i for i = 1..min(|correct|, |incorrect|).
std::vector<PreferencePair> build_pairs(const std::string& problem_id,
                                        const std::vector<ResponseRecord>& records);

// -log sigmoid(beta * ((lp_w - lr_w) - (lp_l - lr_l))), evaluated stably.
double dpo_loss(const LossInputs& inputs);

// Negative log-likelihood of a correct response; logp must be <= 0.
double rft_loss(double logp_policy_response);

using PromptLookup = std::function<std::string(const std::string& problem_id)>;

// Writes one JSON object per pair:
//   {prompt, chosen, rejected, chosen_reward, rejected_reward, problem_id, rank}
// Returns the number of lines written. Deterministic for identical input.
std::size_t export_pairs(const std::vector<PreferencePair>& pairs,
                         const PromptLookup& prompt_for, const std::string& path);

// SFT-style export of correct responses only: {prompt, response, reward, problem_id}.
std::size_t export_correct_only(const std::vector<ResponseRecord>& records,
                                const PromptLookup& prompt_for, const std::string& path);

}  // namespace selftrain

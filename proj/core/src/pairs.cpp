#include "selftrain/pairs.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <tuple>

#include <nlohmann/json.hpp>

#include "selftrain/errors.hpp"

namespace selftrain {

namespace {

// Reward descending; ties broken by ascending (phase, sample_index) so the
// pairing is reproducible across runs.
bool reward_order(const ResponseRecord& a, const ResponseRecord& b) {
    if (a.reward != b.reward) return a.reward > b.reward;
    return std::tuple(a.phase, a.sample_index) < std::tuple(b.phase, b.sample_index);
}

}  // namespace

std::vector<PreferencePair> build_pairs(const std::string& problem_id,
                                        const std::vector<ResponseRecord>& records) {
    std::vector<ResponseRecord> correct;
    std::vector<ResponseRecord> incorrect;
    for (const auto& r : records) {
        if (r.problem_id != problem_id) {
            throw ValidationError("build_pairs for " + problem_id +
                                  " received a record for " + r.problem_id);
        }
        if (!r.scored()) {
            throw ValidationError("build_pairs requires scored records (" + r.problem_id + "#" +
                                  std::to_string(r.sample_index) + " unscored)");
        }
        (r.is_correct() ? correct : incorrect).push_back(r);
    }

    std::sort(correct.begin(), correct.end(), reward_order);
    std::sort(incorrect.begin(), incorrect.end(), reward_order);

    const std::size_t k = std::min(correct.size(), incorrect.size());
    std::vector<PreferencePair> pairs;
    pairs.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        PreferencePair pair;
        pair.problem_id = problem_id;
        pair.chosen = correct[i];
        pair.rejected = incorrect[i];
        pair.rank = static_cast<std::uint32_t>(i + 1);
        pairs.push_back(std::move(pair));
    }
    return pairs;
}

double dpo_loss(const LossInputs& inputs) {
    if (!(inputs.beta > 0.0)) throw ValidationError("dpo beta must be positive");
    for (double v : {inputs.logp_policy_chosen, inputs.logp_ref_chosen,
                     inputs.logp_policy_rejected, inputs.logp_ref_rejected}) {
        if (!std::isfinite(v)) throw ValidationError("dpo loss inputs must be finite");
    }
    const double margin = (inputs.logp_policy_chosen - inputs.logp_ref_chosen) -
                          (inputs.logp_policy_rejected - inputs.logp_ref_rejected);
    const double z = inputs.beta * margin;
    // -log(sigmoid(z)) = softplus(-z), split to avoid overflow on either side.
    if (z > 0.0) return std::log1p(std::exp(-z));
    return -z + std::log1p(std::exp(z));
}

double rft_loss(double logp_policy_response) {
    if (!(logp_policy_response <= 0.0)) {
        throw ValidationError("rft loss expects a log-probability (<= 0)");
    }
    return -logp_policy_response;
}

std::size_t export_pairs(const std::vector<PreferencePair>& pairs,
                         const PromptLookup& prompt_for, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open pair file for writing: " + path);

    for (const auto& pair : pairs) {
        nlohmann::json j{
            {"prompt", prompt_for(pair.problem_id)},
            {"chosen", pair.chosen.text},
            {"rejected", pair.rejected.text},
            {"chosen_reward", pair.chosen.reward},
            {"rejected_reward", pair.rejected.reward},
            {"problem_id", pair.problem_id},
            {"rank", pair.rank},
        };
        out << j.dump() << '\n';
    }
    out.flush();
    if (!out) throw IoError("failed writing pair file: " + path);
    return pairs.size();
}

std::size_t export_correct_only(const std::vector<ResponseRecord>& records,
                                const PromptLookup& prompt_for, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open export file for writing: " + path);

    std::size_t written = 0;
    for (const auto& r : records) {
        if (!r.has_verdict() || !r.is_correct()) continue;
        nlohmann::json j{
            {"prompt", prompt_for(r.problem_id)},
            {"response", r.text},
            {"reward", r.scored() ? r.reward : 0.0},
            {"problem_id", r.problem_id},
        };
        out << j.dump() << '\n';
        ++written;
    }
    out.flush();
    if (!out) throw IoError("failed writing export file: " + path);
    return written;
}

}  // namespace selftrain

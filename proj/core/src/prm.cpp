#include "selftrain/prm.hpp"

#include <algorithm>

#include "selftrain/errors.hpp"
#include "selftrain/rng.hpp"

namespace selftrain {

bool ResponseRecord::is_correct() const {
    if (!correct.has_value()) {
        throw ValidationError("record " + problem_id + "#" + std::to_string(sample_index) +
                              " has no correctness verdict");
    }
    return *correct;
}

std::vector<std::string> segment_steps(std::string_view text) {
    auto trim = [](std::string_view s) {
        const auto b = s.find_first_not_of(" \t\r\n");
        if (b == std::string_view::npos) return std::string_view{};
        const auto e = s.find_last_not_of(" \t\r\n");
        return s.substr(b, e - b + 1);
    };

    std::vector<std::string> steps;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t next = text.find("\n\n", pos);
        const std::string_view piece =
            next == std::string_view::npos ? text.substr(pos) : text.substr(pos, next - pos);
        const std::string_view trimmed = trim(piece);
        if (!trimmed.empty()) steps.emplace_back(trimmed);
        if (next == std::string_view::npos) break;
        pos = next + 2;
    }

    if (steps.empty()) throw ValidationError("cannot segment empty solution text");
    return steps;
}

double aggregate_reward(const std::vector<double>& step_rewards, RewardAggregation aggregation) {
    if (step_rewards.empty()) throw ValidationError("cannot aggregate an empty reward list");
    for (double v : step_rewards) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw ValidationError("step reward " + std::to_string(v) + " outside [0, 1]");
        }
    }
    switch (aggregation) {
        case RewardAggregation::Min:
            return *std::min_element(step_rewards.begin(), step_rewards.end());
        case RewardAggregation::Mean: {
            double sum = 0.0;
            for (double v : step_rewards) sum += v;
            return sum / static_cast<double>(step_rewards.size());
        }
        case RewardAggregation::Last:
            return step_rewards.back();
    }
    throw ValidationError("unknown reward aggregation");
}

PrmParams scale_reward_separation(PrmParams params, double coupling) {
    if (coupling < 0.0) throw ValidationError("quality coupling must be non-negative");
    params.mu_correct = std::clamp(0.5 + coupling * (params.mu_correct - 0.5), 0.0, 1.0);
    params.mu_incorrect = std::clamp(0.5 + coupling * (params.mu_incorrect - 0.5), 0.0, 1.0);
    return params;
}

SimulatedScorer::SimulatedScorer(PrmParams params, std::uint64_t seed)
    : params_(params), seed_(seed) {
    if (params_.sigma < 0.0) throw ValidationError("prm sigma must be non-negative");
}

ResponseRecord SimulatedScorer::score(const Problem& problem, ResponseRecord record) const {
    if (record.steps.empty()) {
        throw ValidationError("record " + record.problem_id + "#" +
                              std::to_string(record.sample_index) + " has no steps to score");
    }
    const double mu = record.is_correct() ? params_.mu_correct : params_.mu_incorrect;

    record.step_rewards.clear();
    record.step_rewards.reserve(record.steps.size());
    for (std::size_t step = 0; step < record.steps.size(); ++step) {
        auto stream = rng::derive(seed_, {rng::key("prm"), rng::hash_bytes(problem.id),
                                          record.sample_index, step});
        record.step_rewards.push_back(stream.next_truncated_gaussian(mu, params_.sigma, 0.0, 1.0));
    }
    record.reward = aggregate_reward(record.step_rewards, params_.aggregation);
    return record;
}

const char* to_string(Phase phase) { return phase == Phase::Pre ? "pre" : "re"; }

Phase phase_from_string(std::string_view s) {
    if (s == "pre") return Phase::Pre;
    if (s == "re") return Phase::Re;
    throw ValidationError("unknown phase: " + std::string(s));
}

const char* to_string(RewardAggregation aggregation) {
    switch (aggregation) {
        case RewardAggregation::Min: return "min";
        case RewardAggregation::Mean: return "mean";
        case RewardAggregation::Last: return "last";
    }
    return "min";
}

RewardAggregation aggregation_from_string(std::string_view s) {
    if (s == "min") return RewardAggregation::Min;
    if (s == "mean") return RewardAggregation::Mean;
    if (s == "last") return RewardAggregation::Last;
    throw ValidationError("unknown reward aggregation: " + std::string(s));
}

}  // namespace selftrain

#include "selftrain/generator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <utility>

#include "selftrain/errors.hpp"
#include "selftrain/rng.hpp"
#include "selftrain/verifier.hpp"

namespace selftrain {

void validate(const GenerationRequest& request) {
    if (request.problem_id.empty()) throw ValidationError("generation request without problem_id");
    if (request.num_samples == 0) throw ValidationError("num_samples must be >= 1");
    if (!(request.temperature > 0.0 && request.temperature <= 2.0)) {
        throw ValidationError("temperature must lie in (0, 2]");
    }
    if (request.max_tokens == 0) throw ValidationError("max_tokens must be >= 1");
}

double mean_ability(const SimulatedModel& model) {
    if (model.abilities.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& [id, p] : model.abilities) sum += p;
    return sum / static_cast<double>(model.abilities.size());
}

double updated_ability_value(double p, double effective_pair_count, double learning_rate) {
    return std::clamp(p + learning_rate * effective_pair_count * (1.0 - p), 0.0, 1.0);
}

SimulatedModel update_ability(const SimulatedModel& model, const std::string& problem_id,
                              std::uint32_t pair_count, double learning_rate) {
    if (learning_rate < 0.0) throw ValidationError("learning rate must be non-negative");
    auto it = model.abilities.find(problem_id);
    if (it == model.abilities.end()) {
        throw ValidationError("unknown problem id in ability update: " + problem_id);
    }
    SimulatedModel next = model;
    next.abilities[problem_id] =
        updated_ability_value(it->second, static_cast<double>(pair_count), learning_rate);
    return next;
}

namespace {

constexpr std::array<const char*, 5> kWorkPhrases = {
    "Restate the problem and set up the computation.",
    "Carry out the intermediate calculation.",
    "Substitute the known values.",
    "Simplify and collect terms.",
    "Check the partial result for consistency.",
};

std::string format_number(double v) {
    if (std::fabs(v - std::llround(v)) < 1e-9 && std::fabs(v) < 1e15) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%lld", std::llround(v));
        return buf;
    }
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

// A wrong final answer that still fails a tolerance-based comparison.
std::string wrong_answer(const std::string& reference, rng::Stream& stream) {
    if (auto v = parse_numeric(canonicalize_answer(reference))) {
        const double offset = 1.0 + static_cast<double>(stream.next_below(9));
        return format_number(*v + offset);
    }
    if (reference.empty()) return "unknown";
    return reference + "-alt";
}

}  // namespace

SimulatedGenerator::SimulatedGenerator(SimulatedModel model) : model_(std::move(model)) {}

SimulatedGenerator::SimulatedGenerator(SimulatedModel model,
                                       std::map<std::string, std::string> answers)
    : model_(std::move(model)), answers_(std::move(answers)) {}

std::vector<ResponseRecord> SimulatedGenerator::generate(const GenerationRequest& request) {
    validate(request);
    const auto ability = model_.abilities.find(request.problem_id);
    if (ability == model_.abilities.end()) {
        throw ValidationError("unknown problem id in generation request: " + request.problem_id);
    }
    const double p = ability->second;

    const auto answer = answers_.find(request.problem_id);

    std::vector<ResponseRecord> records;
    records.reserve(request.num_samples);
    for (std::uint32_t i = 0; i < request.num_samples; ++i) {
        const std::uint32_t index = request.first_sample_index + i;
        auto stream = rng::derive(model_.seed, {rng::key("gen"),
                                                rng::hash_bytes(request.problem_id), index});

        ResponseRecord record;
        record.problem_id = request.problem_id;
        record.sample_index = index;
        record.correct = stream.next_bernoulli(p);

        const std::size_t work_steps = 1 + stream.next_below(3);
        for (std::size_t s = 0; s < work_steps; ++s) {
            record.steps.emplace_back(kWorkPhrases[stream.next_below(kWorkPhrases.size())]);
        }
        std::string final_answer;
        if (answer != answers_.end()) {
            final_answer = *record.correct ? answer->second : wrong_answer(answer->second, stream);
        } else {
            final_answer = format_number(static_cast<double>(stream.next_below(1000)));
        }
        record.steps.push_back("Therefore the final answer is \\boxed{" + final_answer + "}.");

        for (std::size_t s = 0; s < record.steps.size(); ++s) {
            if (s) record.text += "\n\n";
            record.text += record.steps[s];
        }
        records.push_back(std::move(record));
    }
    return records;
}

}  // namespace selftrain

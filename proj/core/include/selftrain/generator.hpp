#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "selftrain/prm.hpp"

namespace selftrain {

struct GenerationRequest {
    std::string problem_id;
    std::string prompt;
    std::uint32_t num_samples = 1;
    double temperature = 0.7;
    std::uint32_t max_tokens = 1024;
    // Continues a problem's sample stream across phases: pre-sampling starts
    // at 0, re-sampling at n_p.
    std::uint32_t first_sample_index = 0;
};

void validate(const GenerationRequest& request);

class Generator {
public:
    virtual ~Generator() = default;

    // Returns exactly num_samples records in sample-index order.
    // Implementations must be safe for concurrent calls.
    virtual std::vector<ResponseRecord> generate(const GenerationRequest& request) = 0;
};

/// Stand-in for a policy model: a latent per-problem solve probability.
struct SimulatedModel {
    std::map<std::string, double> abilities;  // problem_id -> p in [0, 1]
    double quality_coupling = 1.0;            // reward/correctness correlation strength
    std::uint64_t seed = 0;
};

double mean_ability(const SimulatedModel& model);

// Stand-in for the model update step: p' = clamp(p + lr * pairs * (1 - p)).
// Returns a new model; the input is unchanged.
SimulatedModel update_ability(const SimulatedModel& model, const std::string& problem_id,
                              std::uint32_t pair_count, double learning_rate);

// Real-valued variant used by the simulator's spillover option.
double updated_ability_value(double p, double effective_pair_count, double learning_rate);

/**
 * Seeded stochastic generator. Each sample's outcome is a pure function of
 * (model.seed, problem_id, sample_index); request order and batch shape do
 * not affect any individual draw. When the reference answers are supplied the
 * emitted text carries a \boxed{...} final step consistent with the drawn
 * correctness, so the rule-based verifier agrees with the record flag.
 */
class SimulatedGenerator final : public Generator {
public:
    explicit SimulatedGenerator(SimulatedModel model);
    SimulatedGenerator(SimulatedModel model, std::map<std::string, std::string> answers);

    std::vector<ResponseRecord> generate(const GenerationRequest& request) override;

    const SimulatedModel& model() const { return model_; }
    void set_model(SimulatedModel model) { model_ = std::move(model); }

private:
    SimulatedModel model_;
    std::map<std::string, std::string> answers_;
};

}  // namespace selftrain

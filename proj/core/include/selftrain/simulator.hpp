#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "selftrain/dataset.hpp"
#include "selftrain/estimator.hpp"
#include "selftrain/generator.hpp"
#include "selftrain/pairs.hpp"
#include "selftrain/prm.hpp"
#include "selftrain/scheduler.hpp"

namespace selftrain {

/// How per-problem latent abilities are initialized.
struct AbilityInit {
    enum class Mode { Meta, Uniform, Constant };
    Mode mode = Mode::Meta;
    std::string meta_key = "ability";  // Meta: numeric tag on Problem.meta
    double low = 0.0;                  // Uniform bounds
    double high = 1.0;
    double value = 0.5;  // Constant
    std::uint64_t seed = 0;  // Uniform; 0 = derive from the run seed
};

struct RunConfig {
    std::string run_id;            // empty = derived from seed + config hash
    std::uint32_t iterations = 3;
    std::uint32_t per_iteration = 0;  // 0 = |corpus| / iterations
    BudgetConfig budget;
    Thresholds thresholds;
    EstimationSource estimation_source = EstimationSource::Rde;
    StrategySet strategy = {DifficultyClass::Boundary};
    std::uint64_t seed = 1;
    double learning_rate = 0.05;
    double spillover = 0.0;  // fraction of the mean pair count applied to every problem
    bool with_replacement = false;
    std::uint32_t sde_samples = 32;  // oracle draw count; 100 matches the full-scale setting
    bool track_sde_agreement = false;
    PrmParams prm;
    double quality_coupling = 1.0;
    AbilityInit ability_init;
    double temperature = 0.7;
    std::uint32_t max_tokens = 1024;
};

nlohmann::json to_json(const RunConfig& config);
RunConfig run_config_from_json(const nlohmann::json& j);  // strict: unknown keys error

struct IterationMetrics {
    std::uint32_t iteration = 0;
    std::map<DifficultyClass, std::size_t> class_counts;
    std::uint64_t pairs_built = 0;
    std::uint64_t samples_spent = 0;  // always n_t * |D_t|
    double mean_ability_before = 0.0;
    double mean_ability_after = 0.0;
    std::optional<double> agreement_vs_sde;
};

nlohmann::json to_json(const IterationMetrics& metrics);

struct RunResult {
    std::vector<IterationMetrics> metrics;
    SimulatedModel final_model;
    bool truncated = false;  // corpus could not fill every iteration
};

// Full iterative loop against the simulated generator/PRM: pre-sample, score,
// estimate, plan, re-sample, pair, update abilities. Deterministic given the
// config. When out_dir is given, writes the run directory layout:
//   config.json, manifest.json, abilities-<t>.json,
//   iteration-<t>/{verdicts.jsonl, budget.json, pairs.jsonl, metrics.json},
//   report.csv
RunResult run(const RunConfig& config, const std::vector<Problem>& corpus);
RunResult run(const RunConfig& config, const std::vector<Problem>& corpus,
              const std::filesystem::path& out_dir);

struct SweepConfig {
    RunConfig base;
    std::vector<StrategySet> strategies;
    std::vector<std::uint64_t> seeds;
};

nlohmann::json to_json(const SweepConfig& config);
SweepConfig sweep_config_from_json(const nlohmann::json& j);

/// Raw per-strategy outcomes, indexed [iteration][seed].
struct StrategyOutcome {
    std::string strategy_label;
    std::vector<std::vector<double>> mean_ability_after;
    std::vector<std::vector<std::uint64_t>> pairs_built;
    std::uint64_t samples_per_iteration = 0;
    std::vector<double> final_ability;  // per seed, after the last iteration
};

struct SweepRow {
    std::string strategy;
    std::uint32_t iteration = 0;
    double mean_ability = 0.0;
    double sd_ability = 0.0;
    double mean_pairs = 0.0;
    double sd_pairs = 0.0;
    std::uint64_t samples = 0;
};

struct SweepReport {
    std::vector<SweepRow> rows;  // iterations x strategies
    std::vector<StrategyOutcome> outcomes;
};

// Runs every strategy on identical seeds and corpus subsets so the
// comparison is paired seed by seed.
SweepReport compare_strategies(const SweepConfig& config, const std::vector<Problem>& corpus);

void write_report_csv(const std::string& path, const std::vector<SweepRow>& rows);

}  // namespace selftrain

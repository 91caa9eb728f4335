// selftrain: sampling-budget orchestration for iterative self-training.
//
// Subcommands: estimate, plan, sample, pairs, simulate, sweep, report.
// Exit codes: 0 ok, 1 unexpected, 2 usage, 3 validation, 4 io, 5 endpoint.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "selftrain/dataset.hpp"
#include "selftrain/endpoint.hpp"
#include "selftrain/errors.hpp"
#include "selftrain/estimator.hpp"
#include "selftrain/generator.hpp"
#include "selftrain/io.hpp"
#include "selftrain/manifest.hpp"
#include "selftrain/pairs.hpp"
#include "selftrain/prm.hpp"
#include "selftrain/scheduler.hpp"
#include "selftrain/simulator.hpp"
#include "selftrain/verifier.hpp"
#include "selftrain/version.hpp"

namespace fs = std::filesystem;
using namespace selftrain;

namespace {

struct CommonOpts {
    bool json = false;
    bool force = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_flag("--json", opts.json, "Emit a machine-readable JSON summary");
    cmd->add_flag("--force", opts.force, "Overwrite existing outputs");
}

void ensure_writable(const std::string& path, bool force) {
    if (!force && fs::exists(path)) {
        throw IoError("output already exists: " + path + " (use --force to overwrite)");
    }
}

void ensure_dir_writable(const std::string& path, bool force) {
    if (fs::exists(path) && !fs::is_empty(path) && !force) {
        throw IoError("output directory is not empty: " + path + " (use --force to overwrite)");
    }
}

struct CorpusOpts {
    std::string path;
    std::size_t min_answer_len = 0;
    bool numeric_only = false;
};

void add_corpus(CLI::App* cmd, CorpusOpts& opts, bool required = true) {
    auto* o = cmd->add_option("--corpus", opts.path, "Problems JSONL (id/question/answer)");
    if (required) o->required();
    cmd->add_option("--min-answer-len", opts.min_answer_len,
                    "Drop problems with answers shorter than this");
    cmd->add_flag("--numeric-answers-only", opts.numeric_only,
                  "Drop problems whose answer is not numeric");
}

std::vector<Problem> load_filtered(const CorpusOpts& opts) {
    auto corpus = load_corpus(opts.path);
    if (opts.min_answer_len || opts.numeric_only) {
        corpus = filter_corpus(std::move(corpus), opts.min_answer_len, opts.numeric_only);
        if (corpus.empty()) throw ValidationError("corpus filters removed every problem");
    }
    return corpus;
}

// Groups records by problem id, preserving first-appearance order.
std::vector<std::pair<std::string, std::vector<ResponseRecord>>> group_records(
    const std::vector<ResponseRecord>& records) {
    std::vector<std::pair<std::string, std::vector<ResponseRecord>>> groups;
    std::unordered_map<std::string, std::size_t> index;
    for (const auto& r : records) {
        auto [it, fresh] = index.emplace(r.problem_id, groups.size());
        if (fresh) groups.push_back({r.problem_id, {}});
        groups[it->second].second.push_back(r);
    }
    return groups;
}

void throw_schema_issues(const std::string& path, const std::vector<io::SchemaIssue>& issues) {
    if (issues.empty()) return;
    std::string msg = path + ": " + std::to_string(issues.size()) + " schema issue(s):";
    const std::size_t shown = std::min<std::size_t>(issues.size(), 5);
    for (std::size_t i = 0; i < shown; ++i) {
        msg += "\n  line " + std::to_string(issues[i].line) + ": " + issues[i].message;
    }
    if (issues.size() > shown) msg += "\n  ...";
    throw ValidationError(msg);
}

void emit(const CommonOpts& opts, const nlohmann::json& summary, const std::string& text) {
    if (opts.json) {
        std::cout << summary.dump(2) << '\n';
    } else {
        std::cout << text;
    }
}

std::vector<std::uint64_t> parse_seed_list(const std::string& spec) {
    std::vector<std::uint64_t> seeds;
    std::size_t pos = 0;
    while (pos <= spec.size()) {
        const std::size_t comma = spec.find(',', pos);
        const std::string token =
            comma == std::string::npos ? spec.substr(pos) : spec.substr(pos, comma - pos);
        if (!token.empty()) {
            const std::size_t dots = token.find("..");
            try {
                if (dots == std::string::npos) {
                    seeds.push_back(std::stoull(token));
                } else {
                    const std::uint64_t lo = std::stoull(token.substr(0, dots));
                    const std::uint64_t hi = std::stoull(token.substr(dots + 2));
                    if (hi < lo) throw UsageError("bad seed range: " + token);
                    for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
                }
            } catch (const std::invalid_argument&) {
                throw UsageError("bad seed token: \"" + token + "\"");
            } catch (const std::out_of_range&) {
                throw UsageError("seed out of range: \"" + token + "\"");
            }
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (seeds.empty()) throw UsageError("empty seed list");
    return seeds;
}

// ---------------------------------------------------------------------------
// estimate
// ---------------------------------------------------------------------------

struct EstimateOpts {
    CommonOpts common;
    CorpusOpts corpus;  // optional; validates record ids when given
    std::string responses;
    std::string output;
    std::string source = "rde";
    std::optional<double> tau_l;
    std::optional<double> tau_h;
    std::string profile;
    std::size_t sde_min_samples = 100;
};

void cmd_estimate(const EstimateOpts& opts) {
    ensure_writable(opts.output, opts.common.force);

    const EstimationSource source = estimation_source_from_string(opts.source);
    const bool need_rewards =
        source == EstimationSource::Rde || source == EstimationSource::RdeReward;
    throw_schema_issues(opts.responses,
                        io::validate_records_file(opts.responses, need_rewards, true));

    Thresholds thresholds;
    if (opts.profile == "zero") thresholds = zero_setting_thresholds();
    if (opts.tau_l) thresholds.tau_l = *opts.tau_l;
    if (opts.tau_h) thresholds.tau_h = *opts.tau_h;
    validate(thresholds);

    const auto records = io::read_records(opts.responses);
    if (records.empty()) throw ValidationError(opts.responses + ": no records");

    if (!opts.corpus.path.empty()) {
        std::unordered_map<std::string, bool> known;
        for (const auto& p : load_filtered(opts.corpus)) known[p.id] = true;
        for (const auto& r : records) {
            if (!known.count(r.problem_id)) {
                throw ValidationError("record references unknown problem id: " + r.problem_id);
            }
        }
    }

    std::vector<DifficultyVerdict> verdicts;
    for (const auto& [pid, group] : group_records(records)) {
        switch (source) {
            case EstimationSource::Rde:
                verdicts.push_back(classify_rde(group, thresholds));
                break;
            case EstimationSource::RdeAcc:
                verdicts.push_back(classify_variant(group, thresholds, RdeVariant::AccOnly));
                break;
            case EstimationSource::RdeReward:
                verdicts.push_back(classify_variant(group, thresholds, RdeVariant::RewardOnly));
                break;
            case EstimationSource::Sde:
                verdicts.push_back(classify_sde(group, opts.sde_min_samples));
                break;
        }
    }
    io::write_verdicts(opts.output, verdicts);

    std::map<DifficultyClass, std::size_t> histogram;
    for (const auto& v : verdicts) ++histogram[v.cls];

    nlohmann::json hist_json = nlohmann::json::object();
    std::string text;
    for (DifficultyClass cls :
         {DifficultyClass::Inlier, DifficultyClass::Boundary, DifficultyClass::Outlier}) {
        const std::size_t n = histogram.count(cls) ? histogram[cls] : 0;
        hist_json[to_string(cls)] = n;
        text += std::string(to_string(cls)) + " " + std::to_string(n) + "\n";
    }
    text += "total " + std::to_string(verdicts.size()) + " -> " + opts.output + "\n";
    emit(opts.common,
         {{"histogram", hist_json}, {"total", verdicts.size()}, {"output", opts.output}}, text);
}

// ---------------------------------------------------------------------------
// plan
// ---------------------------------------------------------------------------

struct PlanOpts {
    CommonOpts common;
    std::string verdicts;
    std::string output;
    std::uint32_t n_t = 8;
    std::uint32_t n_p = 3;
    std::string strategy = "boundary";
};

void cmd_plan(const PlanOpts& opts) {
    ensure_writable(opts.output, opts.common.force);
    const auto verdicts = io::read_verdicts(opts.verdicts);
    if (verdicts.empty()) throw ValidationError(opts.verdicts + ": no verdicts");

    const StrategySet strategy = strategy_from_string(opts.strategy);
    const BudgetConfig budget{opts.n_t, opts.n_p};
    const BudgetPlan plan = plan_strategy(verdicts, strategy, budget);
    io::write_budget_plan(opts.output, plan);

    std::size_t targeted = 0;
    for (const auto& v : verdicts) {
        if (strategy.count(v.cls)) ++targeted;
    }
    const bool uniform_fallback = targeted == 0;
    std::uint32_t re_min = 0, re_max = 0;
    if (!plan.re_counts.empty()) {
        re_min = re_max = plan.re_counts.begin()->second;
        for (const auto& [id, c] : plan.re_counts) {
            re_min = std::min(re_min, c);
            re_max = std::max(re_max, c);
        }
    }
    const std::uint64_t expected =
        static_cast<std::uint64_t>(budget.n_t) * verdicts.size();

    char line[256];
    std::snprintf(line, sizeof(line),
                  "plan: %zu problems, %zu targets%s, re-counts %u..%u\n"
                  "budget check: total %llu == n_t x |D| = %llu %s\n",
                  verdicts.size(), plan.re_counts.size(),
                  uniform_fallback ? " (empty target set: uniform fallback)" : "", re_min, re_max,
                  static_cast<unsigned long long>(plan.total),
                  static_cast<unsigned long long>(expected),
                  plan.total == expected ? "OK" : "MISMATCH");
    emit(opts.common,
         {{"problems", verdicts.size()},
          {"targets", plan.re_counts.size()},
          {"uniform_fallback", uniform_fallback},
          {"re_count_min", re_min},
          {"re_count_max", re_max},
          {"total", plan.total},
          {"expected", expected},
          {"conserved", plan.total == expected},
          {"output", opts.output}},
         std::string(line) + (opts.output + "\n"));
    if (plan.total != expected) throw ValidationError("budget conservation check failed");
}

// ---------------------------------------------------------------------------
// sample
// ---------------------------------------------------------------------------

struct SampleOpts {
    CommonOpts common;
    CorpusOpts corpus;
    std::string output;
    std::string backend = "sim";
    std::uint32_t count = 0;
    std::string plan_path;
    std::string phase;
    double temperature = 0.7;
    std::uint32_t max_tokens = 1024;
    int jobs = 4;
    bool no_score = false;
    // sim backend
    std::string abilities_path;
    double ability = -1.0;
    std::string meta_ability_key;
    std::uint64_t seed = 1;
    double mu_correct = 0.85;
    double mu_incorrect = 0.25;
    double sigma = 0.15;
    // endpoint backend
    std::string base_url;
    std::string model = "default";
    std::string api_key_env;
    std::string prm_url;
    int retries = 3;
    int backoff_ms = 100;
};

void cmd_sample(const SampleOpts& opts) {
    ensure_writable(opts.output, opts.common.force);
    if ((opts.count == 0) == opts.plan_path.empty()) {
        throw UsageError("pass exactly one of --count or --plan");
    }

    const auto corpus = load_filtered(opts.corpus);
    std::unordered_map<std::string, const Problem*> by_id;
    for (const auto& p : corpus) by_id[p.id] = &p;

    // Per-problem sample counts and the index offset for this phase.
    std::vector<std::pair<std::string, std::uint32_t>> counts;
    std::uint32_t first_index = 0;
    Phase phase = Phase::Pre;
    if (opts.count > 0) {
        for (const auto& p : corpus) counts.push_back({p.id, opts.count});
    } else {
        const BudgetPlan plan = io::read_budget_plan(opts.plan_path);
        first_index = plan.budget.n_p;
        phase = Phase::Re;
        for (const auto& [pid, c] : plan.re_counts) {
            if (c == 0) continue;
            if (!by_id.count(pid)) {
                throw ValidationError("plan references unknown problem id: " + pid);
            }
            counts.push_back({pid, c});
        }
    }
    if (!opts.phase.empty()) phase = phase_from_string(opts.phase);

    std::vector<GenerationRequest> requests;
    requests.reserve(counts.size());
    for (const auto& [pid, c] : counts) {
        GenerationRequest request;
        request.problem_id = pid;
        request.prompt = by_id.at(pid)->question;
        request.num_samples = c;
        request.temperature = opts.temperature;
        request.max_tokens = opts.max_tokens;
        request.first_sample_index = first_index;
        requests.push_back(std::move(request));
    }

    std::vector<ResponseRecord> records;
    if (opts.backend == "sim") {
        SimulatedModel model;
        model.seed = opts.seed;
        if (!opts.abilities_path.empty()) {
            model.abilities = io::read_abilities(opts.abilities_path);
        } else if (opts.ability >= 0.0) {
            for (const auto& p : corpus) model.abilities[p.id] = opts.ability;
        } else {
            const std::string key =
                opts.meta_ability_key.empty() ? "ability" : opts.meta_ability_key;
            for (const auto& p : corpus) {
                if (!p.meta.contains(key)) {
                    throw ValidationError("problem " + p.id + " has no meta key \"" + key +
                                          "\"; pass --ability or --abilities");
                }
                const auto& tag = p.meta[key];
                if (tag.is_number()) {
                    model.abilities[p.id] = tag.get<double>();
                } else if (tag.is_string()) {
                    try {
                        model.abilities[p.id] = std::stod(tag.get<std::string>());
                    } catch (const std::exception&) {
                        throw ValidationError("problem " + p.id + ": meta \"" + key +
                                              "\" is not numeric");
                    }
                } else {
                    throw ValidationError("problem " + p.id + ": meta \"" + key +
                                          "\" is not numeric");
                }
            }
        }
        std::map<std::string, std::string> answers;
        for (const auto& p : corpus) answers[p.id] = p.answer;
        SimulatedGenerator generator(std::move(model), std::move(answers));
        SimulatedScorer scorer({opts.mu_correct, opts.mu_incorrect, opts.sigma}, opts.seed);

        auto batches = generate_batch(generator, requests, opts.jobs);
        for (auto& batch : batches) {
            for (auto& r : batch) {
                const Problem& problem = *by_id.at(r.problem_id);
                r.phase = phase;
                if (!opts.no_score) r = scorer.score(problem, std::move(r));
                records.push_back(std::move(r));
            }
        }
    } else if (opts.backend == "endpoint") {
        if (opts.base_url.empty()) throw UsageError("endpoint backend requires --base-url");
        EndpointConfig gen_config;
        gen_config.base_url = opts.base_url;
        gen_config.model = opts.model;
        gen_config.api_key_env = opts.api_key_env;
        gen_config.max_attempts = opts.retries;
        gen_config.backoff_ms = opts.backoff_ms;
        gen_config.in_flight = opts.jobs;
        EndpointGenerator generator(gen_config);

        std::optional<EndpointScorer> scorer;
        if (!opts.prm_url.empty() && !opts.no_score) {
            EndpointConfig prm_config = gen_config;
            prm_config.base_url = opts.prm_url;
            scorer.emplace(prm_config);
        }

        auto batches = generate_batch(generator, requests, opts.jobs);
        for (auto& batch : batches) {
            for (auto& r : batch) {
                const Problem& problem = *by_id.at(r.problem_id);
                r.phase = phase;
                r.steps = segment_steps(r.text);
                r.correct = verify(problem, r.text).correct;
                if (scorer) r = scorer->score(problem, std::move(r));
                records.push_back(std::move(r));
            }
        }
    } else {
        throw UsageError("unknown backend: \"" + opts.backend + "\" (sim or endpoint)");
    }

    io::write_records(opts.output, records);

    std::size_t correct_count = 0;
    for (const auto& r : records) {
        if (r.has_verdict() && r.is_correct()) ++correct_count;
    }
    char line[192];
    std::snprintf(line, sizeof(line), "wrote %zu records (%zu correct) for %zu problems\n",
                  records.size(), correct_count, counts.size());
    emit(opts.common,
         {{"records", records.size()},
          {"correct", correct_count},
          {"problems", counts.size()},
          {"phase", to_string(phase)},
          {"output", opts.output}},
         std::string(line) + opts.output + "\n");
}

// ---------------------------------------------------------------------------
// pairs
// ---------------------------------------------------------------------------

struct PairsOpts {
    CommonOpts common;
    CorpusOpts corpus;
    std::vector<std::string> responses;
    std::string output;
    bool correct_only = false;
};

void cmd_pairs(const PairsOpts& opts) {
    ensure_writable(opts.output, opts.common.force);

    const auto corpus = load_filtered(opts.corpus);
    std::unordered_map<std::string, const Problem*> by_id;
    for (const auto& p : corpus) by_id[p.id] = &p;
    const PromptLookup prompt_for = [&](const std::string& pid) {
        auto it = by_id.find(pid);
        if (it == by_id.end()) {
            throw ValidationError("record references unknown problem id: " + pid);
        }
        return it->second->question;
    };

    std::vector<ResponseRecord> records;
    for (const auto& path : opts.responses) {
        throw_schema_issues(path, io::validate_records_file(path, !opts.correct_only, true));
        auto part = io::read_records(path);
        std::move(part.begin(), part.end(), std::back_inserter(records));
    }
    if (records.empty()) throw ValidationError("no records in the given response files");

    if (opts.correct_only) {
        const std::size_t written = export_correct_only(records, prompt_for, opts.output);
        emit(opts.common, {{"responses", records.size()}, {"written", written},
                           {"output", opts.output}},
             "wrote " + std::to_string(written) + " correct responses -> " + opts.output + "\n");
        return;
    }

    std::vector<PreferencePair> all_pairs;
    std::size_t problems = 0;
    for (const auto& [pid, group] : group_records(records)) {
        ++problems;
        auto pairs = build_pairs(pid, group);
        std::move(pairs.begin(), pairs.end(), std::back_inserter(all_pairs));
    }
    const std::size_t written = export_pairs(all_pairs, prompt_for, opts.output);
    emit(opts.common,
         {{"responses", records.size()},
          {"problems", problems},
          {"pairs", written},
          {"output", opts.output}},
         "built " + std::to_string(written) + " pairs from " + std::to_string(records.size()) +
             " responses across " + std::to_string(problems) + " problems -> " + opts.output +
             "\n");
}

// ---------------------------------------------------------------------------
// simulate / sweep
// ---------------------------------------------------------------------------

struct ConfigOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::uint32_t> iterations;
    std::optional<std::uint32_t> per_iteration;
    std::optional<std::uint32_t> n_t;
    std::optional<std::uint32_t> n_p;
    std::optional<double> tau_l;
    std::optional<double> tau_h;
    std::optional<std::string> profile;
    std::optional<std::string> source;
    std::optional<std::string> strategy;
    std::optional<double> learning_rate;
    std::optional<double> spillover;
    std::optional<std::uint32_t> sde_samples;
    std::optional<bool> track_sde_agreement;
    std::optional<bool> with_replacement;
    std::optional<double> quality_coupling;
    std::optional<std::string> ability_mode;
    std::optional<std::string> ability_key;
    std::optional<double> ability_value;
    std::optional<std::string> run_id;
};

void add_overrides(CLI::App* cmd, ConfigOverrides& o) {
    cmd->add_option("--seed", o.seed, "Run seed");
    cmd->add_option("--iterations", o.iterations, "Self-training iterations");
    cmd->add_option("--per-iteration", o.per_iteration,
                    "Problems per iteration (0 = corpus/iterations)");
    cmd->add_option("--nt", o.n_t, "Average samples per problem (n_t)");
    cmd->add_option("--np", o.n_p, "Pre-sampling count (n_p)");
    cmd->add_option("--tau-l", o.tau_l, "Lower reward threshold");
    cmd->add_option("--tau-h", o.tau_h, "Upper reward threshold");
    cmd->add_option("--profile", o.profile, "Threshold profile: default or zero")
        ->check(CLI::IsMember({"default", "zero"}));
    cmd->add_option("--source", o.source, "Estimation source: rde, acc, reward, sde");
    cmd->add_option("--strategy", o.strategy,
                    "Re-sampling target classes, e.g. boundary, inlier+boundary, uniform");
    cmd->add_option("--learning-rate", o.learning_rate, "Ability update learning rate");
    cmd->add_option("--spillover", o.spillover, "Global ability spillover fraction");
    cmd->add_option("--sde-samples", o.sde_samples, "Oracle draws per problem");
    cmd->add_option("--track-sde-agreement", o.track_sde_agreement,
                    "Record RDE-vs-SDE agreement per iteration");
    cmd->add_option("--with-replacement", o.with_replacement,
                    "Redraw problems each iteration instead of partitioning");
    cmd->add_option("--coupling", o.quality_coupling, "Reward/correctness coupling strength");
    cmd->add_option("--ability-mode", o.ability_mode, "Ability init: meta, uniform, constant")
        ->check(CLI::IsMember({"meta", "uniform", "constant"}));
    cmd->add_option("--ability-key", o.ability_key, "Meta key carrying the planted ability");
    cmd->add_option("--ability-value", o.ability_value, "Constant ability value");
    cmd->add_option("--run-id", o.run_id, "Run identifier recorded in the manifest");
}

void apply_overrides(RunConfig& config, const ConfigOverrides& o) {
    if (o.seed) config.seed = *o.seed;
    if (o.iterations) config.iterations = *o.iterations;
    if (o.per_iteration) config.per_iteration = *o.per_iteration;
    if (o.n_t) config.budget.n_t = *o.n_t;
    if (o.n_p) config.budget.n_p = *o.n_p;
    if (o.profile && *o.profile == "zero") config.thresholds = zero_setting_thresholds();
    if (o.tau_l) config.thresholds.tau_l = *o.tau_l;
    if (o.tau_h) config.thresholds.tau_h = *o.tau_h;
    if (o.source) config.estimation_source = estimation_source_from_string(*o.source);
    if (o.strategy) config.strategy = strategy_from_string(*o.strategy);
    if (o.learning_rate) config.learning_rate = *o.learning_rate;
    if (o.spillover) config.spillover = *o.spillover;
    if (o.sde_samples) config.sde_samples = *o.sde_samples;
    if (o.track_sde_agreement) config.track_sde_agreement = *o.track_sde_agreement;
    if (o.with_replacement) config.with_replacement = *o.with_replacement;
    if (o.quality_coupling) config.quality_coupling = *o.quality_coupling;
    if (o.ability_mode) {
        if (*o.ability_mode == "meta") config.ability_init.mode = AbilityInit::Mode::Meta;
        if (*o.ability_mode == "uniform") config.ability_init.mode = AbilityInit::Mode::Uniform;
        if (*o.ability_mode == "constant") config.ability_init.mode = AbilityInit::Mode::Constant;
    }
    if (o.ability_key) config.ability_init.meta_key = *o.ability_key;
    if (o.ability_value) config.ability_init.value = *o.ability_value;
    if (o.run_id) config.run_id = *o.run_id;
}

struct SimulateOpts {
    CommonOpts common;
    CorpusOpts corpus;
    std::string config_path;
    std::string out_dir;
    ConfigOverrides overrides;
};

void cmd_simulate(const SimulateOpts& opts) {
    ensure_dir_writable(opts.out_dir, opts.common.force);

    RunConfig config;
    if (!opts.config_path.empty()) {
        config = run_config_from_json(io::read_json_file(opts.config_path));
    }
    apply_overrides(config, opts.overrides);

    const auto corpus = load_filtered(opts.corpus);
    const RunResult result = run(config, corpus, fs::path(opts.out_dir));

    nlohmann::json metrics = nlohmann::json::array();
    std::string text;
    for (const auto& m : result.metrics) {
        metrics.push_back(to_json(m));
        char line[192];
        std::snprintf(line, sizeof(line),
                      "iteration %u: %llu pairs, %llu samples, ability %.4f -> %.4f\n",
                      m.iteration, static_cast<unsigned long long>(m.pairs_built),
                      static_cast<unsigned long long>(m.samples_spent), m.mean_ability_before,
                      m.mean_ability_after);
        text += line;
    }
    if (result.truncated) text += "warning: corpus exhausted before filling every iteration\n";
    char final_line[96];
    std::snprintf(final_line, sizeof(final_line), "final mean ability %.4f\n",
                  mean_ability(result.final_model));
    text += final_line;
    text += opts.out_dir + "\n";
    emit(opts.common,
         {{"metrics", metrics},
          {"final_mean_ability", mean_ability(result.final_model)},
          {"truncated", result.truncated},
          {"output", opts.out_dir}},
         text);
}

struct SweepOpts {
    CommonOpts common;
    CorpusOpts corpus;
    std::string config_path;
    std::string output;
    std::string strategies;  // flag wins over config; falls back to boundary,uniform
    std::string seeds;       // flag wins over config; falls back to 1..5
    ConfigOverrides overrides;
};

void cmd_sweep(const SweepOpts& opts) {
    ensure_writable(opts.output, opts.common.force);

    SweepConfig sweep;
    if (!opts.config_path.empty()) {
        sweep = sweep_config_from_json(io::read_json_file(opts.config_path));
    }
    apply_overrides(sweep.base, opts.overrides);
    std::string strategies_spec = opts.strategies;
    if (strategies_spec.empty() && sweep.strategies.empty()) {
        strategies_spec = "boundary,uniform";
    }
    if (!strategies_spec.empty()) {
        sweep.strategies.clear();
        std::size_t pos = 0;
        while (pos <= strategies_spec.size()) {
            const std::size_t comma = strategies_spec.find(',', pos);
            const std::string token = comma == std::string::npos
                                          ? strategies_spec.substr(pos)
                                          : strategies_spec.substr(pos, comma - pos);
            if (!token.empty()) sweep.strategies.push_back(strategy_from_string(token));
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
    }
    if (!opts.seeds.empty()) {
        sweep.seeds = parse_seed_list(opts.seeds);
    } else if (sweep.seeds.empty()) {
        sweep.seeds = parse_seed_list("1..5");
    }

    const auto corpus = load_filtered(opts.corpus);
    const SweepReport report = compare_strategies(sweep, corpus);
    write_report_csv(opts.output, report.rows);

    nlohmann::json rows = nlohmann::json::array();
    std::string text;
    for (const auto& row : report.rows) {
        rows.push_back({{"strategy", row.strategy},
                        {"iteration", row.iteration},
                        {"mean_ability", row.mean_ability},
                        {"sd_ability", row.sd_ability},
                        {"mean_pairs", row.mean_pairs},
                        {"sd_pairs", row.sd_pairs},
                        {"samples", row.samples}});
        char line[192];
        std::snprintf(line, sizeof(line), "%-28s iter %u: ability %.4f (sd %.4f), pairs %.1f\n",
                      row.strategy.c_str(), row.iteration, row.mean_ability, row.sd_ability,
                      row.mean_pairs);
        text += line;
    }
    text += "wrote " + std::to_string(report.rows.size()) + " rows -> " + opts.output + "\n";
    emit(opts.common, {{"rows", rows}, {"output", opts.output}}, text);
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

struct ReportOpts {
    CommonOpts common;
    std::vector<std::string> runs;
    std::string output;
};

void cmd_report(const ReportOpts& opts) {
    if (!opts.output.empty()) ensure_writable(opts.output, opts.common.force);

    std::vector<SweepRow> rows;
    for (const auto& dir : opts.runs) {
        const auto config_json = io::read_json_file((fs::path(dir) / "config.json").string());
        const auto manifest = read_manifest((fs::path(dir) / "manifest.json").string());
        verify_manifest(manifest, config_json);
        const RunConfig config = run_config_from_json(config_json);

        for (std::uint32_t t = 0;; ++t) {
            const fs::path metrics_path = fs::path(dir) / ("iteration-" + std::to_string(t)) /
                                          "metrics.json";
            if (!fs::exists(metrics_path)) break;
            const auto m = io::read_json_file(metrics_path.string());
            SweepRow row;
            row.strategy = to_string(config.strategy);
            row.iteration = t;
            row.mean_ability = m.at("mean_ability_after").get<double>();
            row.mean_pairs = m.at("pairs_built").get<double>();
            row.samples = m.at("samples_spent").get<std::uint64_t>();
            rows.push_back(std::move(row));
        }
    }
    if (rows.empty()) throw ValidationError("no iteration metrics found under the given runs");

    if (!opts.output.empty()) write_report_csv(opts.output, rows);

    nlohmann::json json_rows = nlohmann::json::array();
    std::string text;
    for (const auto& row : rows) {
        json_rows.push_back({{"strategy", row.strategy},
                             {"iteration", row.iteration},
                             {"mean_ability", row.mean_ability},
                             {"pairs", row.mean_pairs},
                             {"samples", row.samples}});
        char line[160];
        std::snprintf(line, sizeof(line), "%-28s iter %u: ability %.4f, pairs %.0f, samples %llu\n",
                      row.strategy.c_str(), row.iteration, row.mean_ability, row.mean_pairs,
                      static_cast<unsigned long long>(row.samples));
        text += line;
    }
    if (!opts.output.empty()) text += opts.output + "\n";
    emit(opts.common, {{"rows", json_rows}, {"output", opts.output}}, text);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sampling-budget orchestration for iterative self-training"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    EstimateOpts estimate_opts;
    auto* estimate = app.add_subcommand(
        "estimate", "Classify problem difficulty from scored responses");
    estimate->add_option("--responses", estimate_opts.responses, "Scored responses JSONL")
        ->required();
    estimate->add_option("-o,--output", estimate_opts.output, "Verdicts JSONL")->required();
    estimate->add_option("--source", estimate_opts.source, "rde, acc, reward or sde");
    estimate->add_option("--tau-l", estimate_opts.tau_l, "Lower reward threshold");
    estimate->add_option("--tau-h", estimate_opts.tau_h, "Upper reward threshold");
    estimate->add_option("--profile", estimate_opts.profile, "Threshold profile: default or zero")
        ->check(CLI::IsMember({"default", "zero"}));
    estimate->add_option("--sde-min-samples", estimate_opts.sde_min_samples,
                         "Minimum records per problem for --source sde");
    add_corpus(estimate, estimate_opts.corpus, /*required=*/false);
    add_common(estimate, estimate_opts.common);
    estimate->callback([&] { cmd_estimate(estimate_opts); });

    PlanOpts plan_opts;
    auto* plan = app.add_subcommand("plan", "Reallocate the leftover budget from verdicts");
    plan->add_option("--verdicts", plan_opts.verdicts, "Verdicts JSONL")->required();
    plan->add_option("-o,--output", plan_opts.output, "Budget plan JSON")->required();
    plan->add_option("--nt", plan_opts.n_t, "Average samples per problem (n_t)");
    plan->add_option("--np", plan_opts.n_p, "Pre-sampling count (n_p)");
    plan->add_option("--strategy", plan_opts.strategy, "Target classes (default boundary)");
    add_common(plan, plan_opts.common);
    plan->callback([&] { cmd_plan(plan_opts); });

    SampleOpts sample_opts;
    auto* sample = app.add_subcommand("sample", "Generate, verify and score responses");
    add_corpus(sample, sample_opts.corpus);
    sample->add_option("-o,--output", sample_opts.output, "Responses JSONL")->required();
    sample->add_option("--backend", sample_opts.backend, "sim or endpoint");
    sample->add_option("--count", sample_opts.count, "Uniform samples per problem (pre phase)");
    sample->add_option("--plan", sample_opts.plan_path, "Budget plan JSON (re phase)");
    sample->add_option("--phase", sample_opts.phase, "Override the phase label (pre or re)");
    sample->add_option("--temperature", sample_opts.temperature, "Sampling temperature");
    sample->add_option("--max-tokens", sample_opts.max_tokens, "Generation length cap");
    sample->add_option("--jobs", sample_opts.jobs, "Parallel in-flight requests");
    sample->add_flag("--no-score", sample_opts.no_score, "Skip reward scoring");
    sample->add_option("--abilities", sample_opts.abilities_path,
                       "Ability map JSON for the sim backend");
    sample->add_option("--ability", sample_opts.ability, "Constant ability for the sim backend");
    sample->add_option("--meta-ability-key", sample_opts.meta_ability_key,
                       "Corpus meta key carrying abilities (default \"ability\")");
    sample->add_option("--seed", sample_opts.seed, "Sim backend seed");
    sample->add_option("--mu-correct", sample_opts.mu_correct, "Sim PRM mean (correct)");
    sample->add_option("--mu-incorrect", sample_opts.mu_incorrect, "Sim PRM mean (incorrect)");
    sample->add_option("--sigma", sample_opts.sigma, "Sim PRM noise");
    sample->add_option("--base-url", sample_opts.base_url, "Generation endpoint base URL");
    sample->add_option("--model", sample_opts.model, "Model name for the chat payload");
    sample->add_option("--api-key-env", sample_opts.api_key_env,
                       "Env var holding the bearer token");
    sample->add_option("--prm-url", sample_opts.prm_url, "PRM endpoint base URL");
    sample->add_option("--retries", sample_opts.retries, "Endpoint retry attempts");
    sample->add_option("--backoff-ms", sample_opts.backoff_ms, "Initial retry backoff");
    add_common(sample, sample_opts.common);
    sample->callback([&] { cmd_sample(sample_opts); });

    PairsOpts pairs_opts;
    auto* pairs = app.add_subcommand("pairs", "Build preference pairs from responses");
    pairs->add_option("--responses", pairs_opts.responses, "Responses JSONL (repeatable)")
        ->required();
    add_corpus(pairs, pairs_opts.corpus);
    pairs->add_option("-o,--output", pairs_opts.output, "Pairs JSONL")->required();
    pairs->add_flag("--correct-only", pairs_opts.correct_only,
                    "Export correct responses instead of pairs");
    add_common(pairs, pairs_opts.common);
    pairs->callback([&] { cmd_pairs(pairs_opts); });

    SimulateOpts simulate_opts;
    auto* simulate = app.add_subcommand("simulate", "Run the full simulated loop");
    add_corpus(simulate, simulate_opts.corpus);
    simulate->add_option("--config", simulate_opts.config_path, "Run config JSON");
    simulate->add_option("-o,--output", simulate_opts.out_dir, "Run directory")->required();
    add_overrides(simulate, simulate_opts.overrides);
    add_common(simulate, simulate_opts.common);
    simulate->callback([&] { cmd_simulate(simulate_opts); });

    SweepOpts sweep_opts;
    auto* sweep = app.add_subcommand("sweep", "Compare re-sampling strategies across seeds");
    add_corpus(sweep, sweep_opts.corpus);
    sweep->add_option("--config", sweep_opts.config_path, "Sweep config JSON");
    sweep->add_option("-o,--output", sweep_opts.output, "Report CSV")->required();
    sweep->add_option("--strategies", sweep_opts.strategies, "Comma-separated strategy tokens");
    sweep->add_option("--seeds", sweep_opts.seeds, "Seed list, e.g. 1,2,3 or 1..20");
    add_overrides(sweep, sweep_opts.overrides);
    add_common(sweep, sweep_opts.common);
    sweep->callback([&] { cmd_sweep(sweep_opts); });

    ReportOpts report_opts;
    auto* report = app.add_subcommand("report", "Summarize run directories as CSV");
    report->add_option("--run", report_opts.runs, "Run directory (repeatable)")->required();
    report->add_option("-o,--output", report_opts.output, "Report CSV");
    add_common(report, report_opts.common);
    report->callback([&] { cmd_report(report_opts); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    } catch (const EndpointError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 5;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

#include "selftrain/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <unordered_map>

#include "selftrain/errors.hpp"
#include "selftrain/io.hpp"
#include "selftrain/manifest.hpp"
#include "selftrain/rng.hpp"

namespace selftrain {

namespace {

void require_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                  const char* scope) {
    for (const auto& [key, value] : j.items()) {
        if (std::find_if(allowed.begin(), allowed.end(),
                         [&](const char* k) { return key == k; }) == allowed.end()) {
            throw ValidationError(std::string("unknown config key \"") + key + "\" in " + scope);
        }
    }
}

const char* to_string(AbilityInit::Mode mode) {
    switch (mode) {
        case AbilityInit::Mode::Meta: return "meta";
        case AbilityInit::Mode::Uniform: return "uniform";
        case AbilityInit::Mode::Constant: return "constant";
    }
    return "meta";
}

AbilityInit::Mode ability_mode_from_string(std::string_view s) {
    if (s == "meta") return AbilityInit::Mode::Meta;
    if (s == "uniform") return AbilityInit::Mode::Uniform;
    if (s == "constant") return AbilityInit::Mode::Constant;
    throw ValidationError("unknown ability_init mode: " + std::string(s));
}

RunConfig parse_run_config(const nlohmann::json& j);

}  // namespace

nlohmann::json to_json(const RunConfig& config) {
    return {
        {"run_id", config.run_id},
        {"iterations", config.iterations},
        {"per_iteration", config.per_iteration},
        {"budget", {{"n_t", config.budget.n_t}, {"n_p", config.budget.n_p}}},
        {"thresholds", {{"tau_l", config.thresholds.tau_l}, {"tau_h", config.thresholds.tau_h}}},
        {"estimation_source", to_string(config.estimation_source)},
        {"strategy", to_string(config.strategy)},
        {"seed", config.seed},
        {"learning_rate", config.learning_rate},
        {"spillover", config.spillover},
        {"with_replacement", config.with_replacement},
        {"sde_samples", config.sde_samples},
        {"track_sde_agreement", config.track_sde_agreement},
        {"prm",
         {{"mu_correct", config.prm.mu_correct},
          {"mu_incorrect", config.prm.mu_incorrect},
          {"sigma", config.prm.sigma},
          {"aggregation", to_string(config.prm.aggregation)}}},
        {"quality_coupling", config.quality_coupling},
        {"ability_init",
         {{"mode", to_string(config.ability_init.mode)},
          {"meta_key", config.ability_init.meta_key},
          {"low", config.ability_init.low},
          {"high", config.ability_init.high},
          {"value", config.ability_init.value},
          {"seed", config.ability_init.seed}}},
        {"temperature", config.temperature},
        {"max_tokens", config.max_tokens},
    };
}

RunConfig run_config_from_json(const nlohmann::json& j) {
    require_keys(j, {"run_id", "iterations", "per_iteration", "budget", "thresholds",
                     "estimation_source", "strategy", "seed", "learning_rate", "spillover",
                     "with_replacement", "sde_samples", "track_sde_agreement", "prm",
                     "quality_coupling", "ability_init", "temperature", "max_tokens"},
                 "run config");
    try {
        return parse_run_config(j);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("bad run config: ") + e.what());
    }
}

namespace {

RunConfig parse_run_config(const nlohmann::json& j) {
    RunConfig c;
    c.run_id = j.value("run_id", c.run_id);
    c.iterations = j.value("iterations", c.iterations);
    c.per_iteration = j.value("per_iteration", c.per_iteration);
    if (j.contains("budget")) {
        require_keys(j["budget"], {"n_t", "n_p"}, "budget");
        c.budget.n_t = j["budget"].value("n_t", c.budget.n_t);
        c.budget.n_p = j["budget"].value("n_p", c.budget.n_p);
    }
    if (j.contains("thresholds")) {
        require_keys(j["thresholds"], {"tau_l", "tau_h", "profile"}, "thresholds");
        if (j["thresholds"].contains("profile")) {
            const auto profile = j["thresholds"]["profile"].get<std::string>();
            if (profile == "zero") {
                c.thresholds = zero_setting_thresholds();
            } else if (profile != "default") {
                throw ValidationError("unknown thresholds profile: " + profile);
            }
        }
        c.thresholds.tau_l = j["thresholds"].value("tau_l", c.thresholds.tau_l);
        c.thresholds.tau_h = j["thresholds"].value("tau_h", c.thresholds.tau_h);
    }
    if (j.contains("estimation_source")) {
        c.estimation_source = estimation_source_from_string(j["estimation_source"].get<std::string>());
    }
    if (j.contains("strategy")) {
        c.strategy = strategy_from_string(j["strategy"].get<std::string>());
    }
    c.seed = j.value("seed", c.seed);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.spillover = j.value("spillover", c.spillover);
    c.with_replacement = j.value("with_replacement", c.with_replacement);
    c.sde_samples = j.value("sde_samples", c.sde_samples);
    c.track_sde_agreement = j.value("track_sde_agreement", c.track_sde_agreement);
    if (j.contains("prm")) {
        require_keys(j["prm"], {"mu_correct", "mu_incorrect", "sigma", "aggregation"}, "prm");
        c.prm.mu_correct = j["prm"].value("mu_correct", c.prm.mu_correct);
        c.prm.mu_incorrect = j["prm"].value("mu_incorrect", c.prm.mu_incorrect);
        c.prm.sigma = j["prm"].value("sigma", c.prm.sigma);
        if (j["prm"].contains("aggregation")) {
            c.prm.aggregation = aggregation_from_string(j["prm"]["aggregation"].get<std::string>());
        }
    }
    c.quality_coupling = j.value("quality_coupling", c.quality_coupling);
    if (j.contains("ability_init")) {
        require_keys(j["ability_init"], {"mode", "meta_key", "low", "high", "value", "seed"},
                     "ability_init");
        if (j["ability_init"].contains("mode")) {
            c.ability_init.mode =
                ability_mode_from_string(j["ability_init"]["mode"].get<std::string>());
        }
        c.ability_init.meta_key = j["ability_init"].value("meta_key", c.ability_init.meta_key);
        c.ability_init.low = j["ability_init"].value("low", c.ability_init.low);
        c.ability_init.high = j["ability_init"].value("high", c.ability_init.high);
        c.ability_init.value = j["ability_init"].value("value", c.ability_init.value);
        c.ability_init.seed = j["ability_init"].value("seed", c.ability_init.seed);
    }
    c.temperature = j.value("temperature", c.temperature);
    c.max_tokens = j.value("max_tokens", c.max_tokens);
    return c;
}

}  // namespace

nlohmann::json to_json(const IterationMetrics& metrics) {
    nlohmann::json counts = nlohmann::json::object();
    for (const auto& [cls, n] : metrics.class_counts) counts[to_string(cls)] = n;
    nlohmann::json j{
        {"iteration", metrics.iteration},
        {"class_counts", counts},
        {"pairs_built", metrics.pairs_built},
        {"samples_spent", metrics.samples_spent},
        {"mean_ability_before", metrics.mean_ability_before},
        {"mean_ability_after", metrics.mean_ability_after},
    };
    if (metrics.agreement_vs_sde) j["agreement_vs_sde"] = *metrics.agreement_vs_sde;
    return j;
}

namespace {

std::map<std::string, double> init_abilities(const RunConfig& config,
                                             const std::vector<Problem>& corpus) {
    std::map<std::string, double> abilities;
    const auto& init = config.ability_init;
    const std::uint64_t seed = init.seed ? init.seed : config.seed;

    for (const auto& p : corpus) {
        double value = 0.0;
        switch (init.mode) {
            case AbilityInit::Mode::Constant:
                value = init.value;
                break;
            case AbilityInit::Mode::Uniform: {
                auto stream = rng::derive(seed, {rng::key("ability"), rng::hash_bytes(p.id)});
                value = init.low + (init.high - init.low) * stream.next_double();
                break;
            }
            case AbilityInit::Mode::Meta: {
                if (!p.meta.contains(init.meta_key)) {
                    throw ValidationError("problem " + p.id + " has no meta key \"" +
                                          init.meta_key + "\" for ability initialization");
                }
                const auto& tag = p.meta[init.meta_key];
                if (tag.is_number()) {
                    value = tag.get<double>();
                } else if (tag.is_string()) {
                    try {
                        value = std::stod(tag.get<std::string>());
                    } catch (const std::exception&) {
                        throw ValidationError("problem " + p.id + ": meta \"" + init.meta_key +
                                              "\" is not numeric");
                    }
                } else {
                    throw ValidationError("problem " + p.id + ": meta \"" + init.meta_key +
                                          "\" is not numeric");
                }
                break;
            }
        }
        if (!(value >= 0.0 && value <= 1.0)) {
            throw ValidationError("ability for " + p.id + " outside [0, 1]");
        }
        abilities[p.id] = value;
    }
    return abilities;
}

std::vector<IterationPlan> make_iteration_plans(const RunConfig& config,
                                                const std::vector<Problem>& corpus,
                                                std::size_t per_iteration, bool* truncated) {
    if (!config.with_replacement) {
        auto partition =
            partition_iterations(corpus, per_iteration, config.iterations, config.seed);
        *truncated = partition.truncated;
        return partition.plans;
    }

    // With replacement: an independent draw of per_iteration problems each
    // iteration; meant for corpora too small to stay disjoint.
    std::vector<IterationPlan> plans;
    for (std::uint32_t t = 0; t < config.iterations; ++t) {
        std::vector<std::size_t> order(corpus.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        auto stream = rng::derive(config.seed, {rng::key("partition"), t});
        for (std::size_t i = order.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(stream.next_below(i));
            std::swap(order[i - 1], order[j]);
        }
        IterationPlan plan;
        plan.iteration_index = t;
        plan.seed = rng::derive_seed(config.seed, {rng::key("iteration"), t});
        const std::size_t take = std::min(per_iteration, corpus.size());
        for (std::size_t k = 0; k < take; ++k) plan.problem_ids.push_back(corpus[order[k]].id);
        if (take < per_iteration) *truncated = true;
        plans.push_back(std::move(plan));
    }
    return plans;
}

std::vector<ResponseRecord> sde_oracle_records(const std::string& problem_id, double ability,
                                               std::uint32_t samples, std::uint64_t run_seed,
                                               std::uint32_t iteration) {
    std::vector<ResponseRecord> records;
    records.reserve(samples);
    for (std::uint32_t k = 0; k < samples; ++k) {
        auto stream = rng::derive(
            run_seed, {rng::key("sde"), iteration, rng::hash_bytes(problem_id), k});
        ResponseRecord r;
        r.problem_id = problem_id;
        r.sample_index = k;
        r.correct = stream.next_bernoulli(ability);
        records.push_back(std::move(r));
    }
    return records;
}

struct RunArtifacts {
    bool enabled = false;
    std::filesystem::path dir;
    const std::unordered_map<std::string, const Problem*>* by_id = nullptr;
};

std::string csv_double(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

}  // namespace

RunResult run(const RunConfig& config, const std::vector<Problem>& corpus) {
    return run(config, corpus, std::filesystem::path{});
}

RunResult run(const RunConfig& config, const std::vector<Problem>& corpus,
              const std::filesystem::path& out_dir) {
    validate(config.budget);
    validate(config.thresholds);
    if (config.iterations == 0) throw ValidationError("run needs at least one iteration");
    if (corpus.empty()) throw ValidationError("run needs a non-empty corpus");
    if (config.learning_rate < 0.0) throw ValidationError("learning rate must be non-negative");
    if (config.spillover < 0.0) throw ValidationError("spillover must be non-negative");
    if (config.sde_samples == 0) throw ValidationError("sde_samples must be >= 1");

    std::unordered_map<std::string, const Problem*> by_id;
    std::map<std::string, std::string> answers;
    by_id.reserve(corpus.size());
    for (const auto& p : corpus) {
        by_id[p.id] = &p;
        answers[p.id] = p.answer;
    }

    const std::size_t per_iteration =
        config.per_iteration ? config.per_iteration
                             : std::max<std::size_t>(1, corpus.size() / config.iterations);

    RunResult result;
    auto plans = make_iteration_plans(config, corpus, per_iteration, &result.truncated);

    SimulatedModel model;
    model.abilities = init_abilities(config, corpus);
    model.quality_coupling = config.quality_coupling;

    RunArtifacts artifacts;
    if (!out_dir.empty()) {
        artifacts.enabled = true;
        artifacts.dir = out_dir;
        artifacts.by_id = &by_id;
        std::filesystem::create_directories(out_dir);

        const nlohmann::json config_json = to_json(config);
        io::write_json_file((out_dir / "config.json").string(), config_json);

        std::string corpus_repr;
        for (const auto& p : corpus) {
            corpus_repr += p.id;
            corpus_repr += '\x1f';
            corpus_repr += p.question;
            corpus_repr += '\x1f';
            corpus_repr += p.answer;
            corpus_repr += '\x1e';
        }
        const std::string run_id = config.run_id.empty()
                                       ? "run-" + config_hash(config_json).substr(0, 12)
                                       : config.run_id;
        write_manifest((out_dir / "manifest.json").string(),
                       make_manifest(run_id, config_json, corpus_repr));
        io::write_abilities((out_dir / "abilities-0.json").string(), model.abilities);
    }

    const PrmParams scorer_params = scale_reward_separation(config.prm, config.quality_coupling);

    for (std::uint32_t t = 0; t < config.iterations; ++t) {
        const auto& plan = plans[t];
        if (plan.problem_ids.empty()) {
            // Corpus exhausted; nothing left to learn from.
            IterationMetrics metrics;
            metrics.iteration = t;
            metrics.mean_ability_before = mean_ability(model);
            metrics.mean_ability_after = metrics.mean_ability_before;
            result.metrics.push_back(metrics);
            continue;
        }

        model.seed = rng::derive_seed(config.seed, {rng::key("model"), t});
        SimulatedGenerator generator(model, answers);
        SimulatedScorer scorer(scorer_params,
                               rng::derive_seed(config.seed, {rng::key("scorer"), t}));

        IterationMetrics metrics;
        metrics.iteration = t;
        metrics.mean_ability_before = mean_ability(model);

        // Phase 1: pre-sampling and scoring.
        std::unordered_map<std::string, std::vector<ResponseRecord>> pool;
        pool.reserve(plan.problem_ids.size());
        for (const auto& pid : plan.problem_ids) {
            const Problem& problem = *by_id.at(pid);
            GenerationRequest request;
            request.problem_id = pid;
            request.prompt = problem.question;
            request.num_samples = config.budget.n_p;
            request.temperature = config.temperature;
            request.max_tokens = config.max_tokens;
            auto records = generator.generate(request);
            for (auto& r : records) {
                r.phase = Phase::Pre;
                pool[pid].push_back(scorer.score(problem, std::move(r)));
            }
        }

        // Difficulty estimation.
        std::vector<DifficultyVerdict> verdicts;
        verdicts.reserve(plan.problem_ids.size());
        std::vector<DifficultyVerdict> sde_verdicts;
        const bool need_sde =
            config.estimation_source == EstimationSource::Sde || config.track_sde_agreement;
        for (const auto& pid : plan.problem_ids) {
            const auto& records = pool[pid];
            DifficultyVerdict verdict;
            std::optional<DifficultyVerdict> oracle;
            if (need_sde) {
                const auto oracle_records = sde_oracle_records(
                    pid, model.abilities.at(pid), config.sde_samples, config.seed, t);
                oracle = classify_sde(oracle_records, config.sde_samples);
            }
            switch (config.estimation_source) {
                case EstimationSource::Rde:
                    verdict = classify_rde(records, config.thresholds);
                    break;
                case EstimationSource::RdeAcc:
                    verdict = classify_variant(records, config.thresholds, RdeVariant::AccOnly);
                    break;
                case EstimationSource::RdeReward:
                    verdict = classify_variant(records, config.thresholds, RdeVariant::RewardOnly);
                    break;
                case EstimationSource::Sde:
                    verdict = *oracle;
                    break;
            }
            verdicts.push_back(verdict);
            if (oracle) sde_verdicts.push_back(*oracle);
            ++metrics.class_counts[verdict.cls];
        }
        if (config.track_sde_agreement) {
            metrics.agreement_vs_sde = agreement(verdicts, sde_verdicts).overall;
        }

        // Phase 2: budget reallocation and re-sampling.
        const BudgetPlan budget_plan = plan_strategy(verdicts, config.strategy, config.budget);
        for (const auto& [pid, count] : budget_plan.re_counts) {
            if (count == 0) continue;
            const Problem& problem = *by_id.at(pid);
            GenerationRequest request;
            request.problem_id = pid;
            request.prompt = problem.question;
            request.num_samples = count;
            request.temperature = config.temperature;
            request.max_tokens = config.max_tokens;
            request.first_sample_index = config.budget.n_p;
            auto records = generator.generate(request);
            for (auto& r : records) {
                r.phase = Phase::Re;
                pool[pid].push_back(scorer.score(problem, std::move(r)));
            }
        }
        metrics.samples_spent = budget_plan.total;

        // Phase 3: preference pairs over pooled responses.
        std::unordered_map<std::string, std::uint32_t> pair_counts;
        std::vector<PreferencePair> all_pairs;
        for (const auto& pid : plan.problem_ids) {
            auto pairs = build_pairs(pid, pool[pid]);
            pair_counts[pid] = static_cast<std::uint32_t>(pairs.size());
            metrics.pairs_built += pairs.size();
            std::move(pairs.begin(), pairs.end(), std::back_inserter(all_pairs));
        }

        // Ability update stands in for preference optimization: each problem
        // learns from its own pairs, plus an optional global spillover share.
        const double mean_pairs = static_cast<double>(metrics.pairs_built) /
                                  static_cast<double>(plan.problem_ids.size());
        const double spill = config.spillover * mean_pairs;
        for (auto& [pid, ability] : model.abilities) {
            const auto own = pair_counts.find(pid);
            const double effective =
                (own != pair_counts.end() ? static_cast<double>(own->second) : 0.0) + spill;
            if (effective > 0.0) {
                ability = updated_ability_value(ability, effective, config.learning_rate);
            }
        }
        metrics.mean_ability_after = mean_ability(model);

        if (artifacts.enabled) {
            const auto iter_dir = artifacts.dir / ("iteration-" + std::to_string(t));
            std::filesystem::create_directories(iter_dir);
            io::write_verdicts((iter_dir / "verdicts.jsonl").string(), verdicts);
            io::write_budget_plan((iter_dir / "budget.json").string(), budget_plan);
            export_pairs(all_pairs,
                         [&](const std::string& pid) { return by_id.at(pid)->question; },
                         (iter_dir / "pairs.jsonl").string());
            io::write_json_file((iter_dir / "metrics.json").string(), to_json(metrics));
            io::write_abilities(
                (artifacts.dir / ("abilities-" + std::to_string(t + 1) + ".json")).string(),
                model.abilities);
        }

        result.metrics.push_back(std::move(metrics));
    }

    if (artifacts.enabled) {
        std::vector<SweepRow> rows;
        for (const auto& m : result.metrics) {
            SweepRow row;
            row.strategy = to_string(config.strategy);
            row.iteration = m.iteration;
            row.mean_ability = m.mean_ability_after;
            row.mean_pairs = static_cast<double>(m.pairs_built);
            row.samples = m.samples_spent;
            rows.push_back(row);
        }
        write_report_csv((artifacts.dir / "report.csv").string(), rows);
    }

    result.final_model = std::move(model);
    return result;
}

nlohmann::json to_json(const SweepConfig& config) {
    nlohmann::json strategies = nlohmann::json::array();
    for (const auto& s : config.strategies) strategies.push_back(to_string(s));
    return {
        {"run", to_json(config.base)},
        {"strategies", strategies},
        {"seeds", config.seeds},
    };
}

SweepConfig sweep_config_from_json(const nlohmann::json& j) {
    require_keys(j, {"run", "strategies", "seeds"}, "sweep config");
    SweepConfig c;
    try {
        if (j.contains("run")) c.base = run_config_from_json(j["run"]);
        if (j.contains("strategies")) {
            for (const auto& s : j["strategies"]) {
                c.strategies.push_back(strategy_from_string(s.get<std::string>()));
            }
        }
        if (j.contains("seeds")) c.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("bad sweep config: ") + e.what());
    }
    return c;
}

SweepReport compare_strategies(const SweepConfig& config, const std::vector<Problem>& corpus) {
    if (config.strategies.empty()) throw ValidationError("sweep needs at least one strategy");
    if (config.seeds.empty()) throw ValidationError("sweep needs at least one seed");

    SweepReport report;
    for (const auto& strategy : config.strategies) {
        StrategyOutcome outcome;
        outcome.strategy_label = to_string(strategy);
        outcome.mean_ability_after.assign(config.base.iterations, {});
        outcome.pairs_built.assign(config.base.iterations, {});

        for (std::uint64_t seed : config.seeds) {
            RunConfig run_config = config.base;
            run_config.strategy = strategy;
            run_config.seed = seed;
            const RunResult run_result = run(run_config, corpus);
            for (const auto& m : run_result.metrics) {
                outcome.mean_ability_after[m.iteration].push_back(m.mean_ability_after);
                outcome.pairs_built[m.iteration].push_back(m.pairs_built);
                outcome.samples_per_iteration = m.samples_spent;
            }
            outcome.final_ability.push_back(mean_ability(run_result.final_model));
        }
        report.outcomes.push_back(std::move(outcome));
    }

    auto mean_sd = [](const std::vector<double>& xs) {
        const double n = static_cast<double>(xs.size());
        double mean = 0.0;
        for (double x : xs) mean += x;
        mean /= n;
        if (xs.size() < 2) return std::pair(mean, 0.0);
        double ss = 0.0;
        for (double x : xs) ss += (x - mean) * (x - mean);
        return std::pair(mean, std::sqrt(ss / (n - 1.0)));
    };

    for (const auto& outcome : report.outcomes) {
        for (std::uint32_t t = 0; t < config.base.iterations; ++t) {
            SweepRow row;
            row.strategy = outcome.strategy_label;
            row.iteration = t;
            const auto [am, asd] = mean_sd(outcome.mean_ability_after[t]);
            row.mean_ability = am;
            row.sd_ability = asd;
            std::vector<double> pairs(outcome.pairs_built[t].begin(),
                                      outcome.pairs_built[t].end());
            const auto [pm, psd] = mean_sd(pairs);
            row.mean_pairs = pm;
            row.sd_pairs = psd;
            row.samples = outcome.samples_per_iteration;
            report.rows.push_back(std::move(row));
        }
    }
    return report;
}

void write_report_csv(const std::string& path, const std::vector<SweepRow>& rows) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open report for writing: " + path);
    out << "strategy,iteration,mean_ability,sd_ability,mean_pairs,sd_pairs,samples\n";
    for (const auto& row : rows) {
        out << row.strategy << ',' << row.iteration << ',' << csv_double(row.mean_ability) << ','
            << csv_double(row.sd_ability) << ',' << csv_double(row.mean_pairs) << ','
            << csv_double(row.sd_pairs) << ',' << row.samples << '\n';
    }
    out.flush();
    if (!out) throw IoError("failed writing report: " + path);
}

}  // namespace selftrain

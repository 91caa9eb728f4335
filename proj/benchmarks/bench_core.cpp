#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "selftrain/estimator.hpp"
#include "selftrain/generator.hpp"
#include "selftrain/pairs.hpp"
#include "selftrain/prm.hpp"
#include "selftrain/rng.hpp"
#include "selftrain/scheduler.hpp"
#include "selftrain/simulator.hpp"
#include "selftrain/verifier.hpp"

using namespace selftrain;

namespace {

std::vector<DifficultyVerdict> make_verdicts(std::size_t n) {
    std::vector<DifficultyVerdict> verdicts;
    auto stream = rng::derive(1, {rng::key("bench-verdicts")});
    for (std::size_t i = 0; i < n; ++i) {
        DifficultyVerdict v;
        char buf[32];
        std::snprintf(buf, sizeof(buf), "q%06zu", i);
        v.problem_id = buf;
        const auto roll = stream.next_below(3);
        v.cls = roll == 0 ? DifficultyClass::Inlier
                          : (roll == 1 ? DifficultyClass::Boundary : DifficultyClass::Outlier);
        verdicts.push_back(std::move(v));
    }
    return verdicts;
}

std::vector<Problem> make_corpus(std::size_t n) {
    std::vector<Problem> corpus;
    auto stream = rng::derive(2, {rng::key("bench-corpus")});
    for (std::size_t i = 0; i < n; ++i) {
        Problem p;
        char buf[32];
        std::snprintf(buf, sizeof(buf), "q%06zu", i);
        p.id = buf;
        p.question = "compute something " + std::to_string(i);
        p.answer = std::to_string(i);
        p.meta["ability"] = stream.next_double();
        corpus.push_back(std::move(p));
    }
    return corpus;
}

}  // namespace

static void BM_PlanStrategy(benchmark::State& state) {
    const auto verdicts = make_verdicts(static_cast<std::size_t>(state.range(0)));
    const StrategySet strategy{DifficultyClass::Boundary};
    for (auto _ : state) {
        benchmark::DoNotOptimize(plan_strategy(verdicts, strategy, {8, 3}));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_PlanStrategy)->Arg(1000)->Arg(10000)->Arg(100000);

static void BM_BuildPairs(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    std::vector<ResponseRecord> records;
    auto stream = rng::derive(3, {rng::key("bench-pairs")});
    for (std::size_t i = 0; i < n; ++i) {
        ResponseRecord r;
        r.problem_id = "q";
        r.sample_index = static_cast<std::uint32_t>(i);
        r.correct = stream.next_bernoulli(0.5);
        r.steps = {"s"};
        r.step_rewards = {stream.next_double()};
        r.reward = r.step_rewards[0];
        records.push_back(std::move(r));
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(build_pairs("q", records));
    }
    state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_BuildPairs)->Arg(8)->Arg(64)->Arg(512);

static void BM_GenerateAndScore(benchmark::State& state) {
    SimulatedModel model;
    model.abilities["q"] = 0.5;
    model.seed = 4;
    SimulatedGenerator generator(model, {{"q", "42"}});
    SimulatedScorer scorer({}, 5);
    const Problem problem{"q", "question", "42", {}};
    GenerationRequest request;
    request.problem_id = "q";
    request.prompt = problem.question;
    request.num_samples = static_cast<std::uint32_t>(state.range(0));
    for (auto _ : state) {
        auto records = generator.generate(request);
        for (auto& r : records) benchmark::DoNotOptimize(scorer.score(problem, std::move(r)));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_GenerateAndScore)->Arg(8)->Arg(32);

static void BM_Verify(benchmark::State& state) {
    const Problem problem{"q", "question", "12532", {}};
    const std::string text =
        "Restate the problem and set up the computation.\n\n"
        "Carry out the intermediate calculation as 482 times 26.\n\n"
        "Therefore the final answer is \\boxed{12532}.";
    for (auto _ : state) {
        benchmark::DoNotOptimize(verify(problem, text));
    }
}
BENCHMARK(BM_Verify);

static void BM_SimulatedIteration(benchmark::State& state) {
    const auto corpus = make_corpus(static_cast<std::size_t>(state.range(0)));
    RunConfig config;
    config.iterations = 1;
    config.per_iteration = static_cast<std::uint32_t>(state.range(0));
    config.seed = 6;
    for (auto _ : state) {
        benchmark::DoNotOptimize(run(config, corpus));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SimulatedIteration)->Arg(100)->Arg(500);

BENCHMARK_MAIN();

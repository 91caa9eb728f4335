#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include "doctest.h"
#include "selftrain/dataset.hpp"
#include "selftrain/errors.hpp"

using namespace selftrain;
namespace fs = std::filesystem;

namespace {

struct TempFile {
    fs::path path;
    explicit TempFile(const std::string& content) {
        path = fs::temp_directory_path() /
               ("selftrain-test-" + std::to_string(reinterpret_cast<std::uintptr_t>(this)) +
                ".jsonl");
        std::ofstream out(path);
        out << content;
    }
    ~TempFile() { std::error_code ec; fs::remove(path, ec); }
};

std::vector<Problem> synthetic_corpus(std::size_t n) {
    std::vector<Problem> corpus;
    for (std::size_t i = 0; i < n; ++i) {
        Problem p;
        p.id = "q" + std::to_string(i);
        p.question = "question " + std::to_string(i);
        p.answer = std::to_string(i);
        corpus.push_back(std::move(p));
    }
    return corpus;
}

}  // namespace

TEST_CASE("load_corpus parses valid lines in order") {
    TempFile f(R"({"id":"a","question":"1+1","answer":"2"}
{"id":"b","question":"2+2","answer":"4","meta":{"topic":"arith"}}
{"id":"c","question":"3+3","answer":"6"}
)");
    const auto corpus = load_corpus(f.path.string());
    REQUIRE(corpus.size() == 3);
    CHECK(corpus[0].id == "a");
    CHECK(corpus[1].meta["topic"] == "arith");
    CHECK(corpus[2].answer == "6");
}

TEST_CASE("load_corpus rejects duplicate ids naming the id") {
    TempFile f(R"({"id":"q1","question":"x","answer":"1"}
{"id":"q2","question":"y","answer":"2"}
{"id":"q1","question":"z","answer":"3"}
)");
    CHECK_THROWS_WITH_AS(load_corpus(f.path.string()),
                         doctest::Contains("duplicate id \"q1\""), ValidationError);
}

TEST_CASE("load_corpus reports the failing line number") {
    TempFile f("{\"id\":\"a\",\"question\":\"x\",\"answer\":\"1\"}\nnot json\n");
    CHECK_THROWS_WITH_AS(load_corpus(f.path.string()), doctest::Contains("line 2"),
                         ValidationError);
}

TEST_CASE("load_corpus rejects an empty file") {
    TempFile f("");
    CHECK_THROWS_AS(load_corpus(f.path.string()), ValidationError);
}

TEST_CASE("load_corpus on a missing path is an io error") {
    CHECK_THROWS_AS(load_corpus("/nonexistent/corpus.jsonl"), IoError);
}

TEST_CASE("filter_corpus applies answer-length and numeric filters") {
    auto corpus = synthetic_corpus(3);
    corpus[1].answer = "not-a-number";
    corpus[2].answer = "12345";
    const auto numeric = filter_corpus(corpus, 0, true);
    CHECK(numeric.size() == 2);
    const auto longer = filter_corpus(corpus, 5, false);
    REQUIRE(longer.size() == 2);
    CHECK(longer[0].answer == "not-a-number");
}

TEST_CASE("partition produces disjoint plans of the requested size") {
    const auto corpus = synthetic_corpus(100);
    const auto result = partition_iterations(corpus, 30, 3, 7);
    REQUIRE(result.plans.size() == 3);
    CHECK_FALSE(result.truncated);
    std::set<std::string> all;
    for (const auto& plan : result.plans) {
        CHECK(plan.problem_ids.size() == 30);
        all.insert(plan.problem_ids.begin(), plan.problem_ids.end());
    }
    CHECK(all.size() == 90);
}

TEST_CASE("partition truncates the final plan when the corpus runs out") {
    const auto corpus = synthetic_corpus(100);
    const auto result = partition_iterations(corpus, 40, 3, 7);
    REQUIRE(result.plans.size() == 3);
    CHECK(result.plans[0].problem_ids.size() == 40);
    CHECK(result.plans[1].problem_ids.size() == 40);
    CHECK(result.plans[2].problem_ids.size() == 20);
    CHECK(result.truncated);
}

TEST_CASE("partition is deterministic for a fixed seed") {
    const auto corpus = synthetic_corpus(64);
    const auto a = partition_iterations(corpus, 10, 4, 99);
    const auto b = partition_iterations(corpus, 10, 4, 99);
    REQUIRE(a.plans.size() == b.plans.size());
    for (std::size_t t = 0; t < a.plans.size(); ++t) {
        CHECK(a.plans[t].problem_ids == b.plans[t].problem_ids);
        CHECK(a.plans[t].seed == b.plans[t].seed);
    }
    const auto c = partition_iterations(corpus, 10, 4, 100);
    CHECK(a.plans[0].problem_ids != c.plans[0].problem_ids);
}

TEST_CASE("partition rejects zero sizes") {
    const auto corpus = synthetic_corpus(4);
    CHECK_THROWS_AS(partition_iterations(corpus, 0, 2, 1), ValidationError);
    CHECK_THROWS_AS(partition_iterations(corpus, 2, 0, 1), ValidationError);
}

TEST_CASE("property: no id repeats across plans for any seed") {
    const auto corpus = synthetic_corpus(53);
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
        const auto result = partition_iterations(corpus, 17, 3, seed);
        std::set<std::string> all;
        std::size_t total = 0;
        for (const auto& plan : result.plans) {
            total += plan.problem_ids.size();
            all.insert(plan.problem_ids.begin(), plan.problem_ids.end());
        }
        CHECK(all.size() == total);
        CHECK(total == std::min<std::size_t>(17 * 3, corpus.size()));
    }
}

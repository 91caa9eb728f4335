#include "selftrain/dataset.hpp"

#include <fstream>
#include <numeric>
#include <unordered_set>
#include <utility>

#include "selftrain/errors.hpp"
#include "selftrain/rng.hpp"
#include "selftrain/verifier.hpp"

namespace selftrain {

std::vector<Problem> load_corpus(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open corpus file: " + path);

    std::vector<Problem> problems;
    std::unordered_set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;

        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ValidationError("corpus line " + std::to_string(line_no) +
                                  ": invalid JSON: " + e.what());
        }
        if (!j.is_object()) {
            throw ValidationError("corpus line " + std::to_string(line_no) +
                                  ": expected a JSON object");
        }
        for (const char* field : {"id", "question", "answer"}) {
            if (!j.contains(field) || !j[field].is_string()) {
                throw ValidationError("corpus line " + std::to_string(line_no) +
                                      ": missing or non-string field \"" + field + "\"");
            }
        }

        Problem p;
        p.id = j["id"].get<std::string>();
        p.question = j["question"].get<std::string>();
        p.answer = j["answer"].get<std::string>();
        if (j.contains("meta")) {
            if (!j["meta"].is_object()) {
                throw ValidationError("corpus line " + std::to_string(line_no) +
                                      ": \"meta\" must be an object");
            }
            p.meta = j["meta"];
        }

        if (p.id.empty()) {
            throw ValidationError("corpus line " + std::to_string(line_no) + ": empty id");
        }
        if (p.answer.empty()) {
            throw ValidationError("corpus line " + std::to_string(line_no) +
                                  ": empty answer for id \"" + p.id + "\"");
        }
        if (!seen.insert(p.id).second) {
            throw ValidationError("corpus line " + std::to_string(line_no) +
                                  ": duplicate id \"" + p.id + "\"");
        }
        problems.push_back(std::move(p));
    }

    if (problems.empty()) throw ValidationError("empty corpus: " + path);
    return problems;
}

std::vector<Problem> filter_corpus(std::vector<Problem> problems, std::size_t min_answer_len,
                                   bool numeric_answers_only) {
    std::vector<Problem> kept;
    kept.reserve(problems.size());
    for (auto& p : problems) {
        if (p.answer.size() < min_answer_len) continue;
        if (numeric_answers_only && !parse_numeric(canonicalize_answer(p.answer))) continue;
        kept.push_back(std::move(p));
    }
    return kept;
}

PartitionResult partition_iterations(const std::vector<Problem>& corpus,
                                     std::size_t per_iteration, std::size_t iterations,
                                     std::uint64_t seed) {
    if (per_iteration == 0) throw ValidationError("per-iteration problem count must be positive");
    if (iterations == 0) throw ValidationError("iteration count must be positive");

    // One global shuffle, then consecutive slices: disjoint by construction.
    std::vector<std::size_t> order(corpus.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto stream = rng::derive(seed, {rng::key("partition")});
    for (std::size_t i = order.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(stream.next_below(i));
        std::swap(order[i - 1], order[j]);
    }

    PartitionResult result;
    std::size_t cursor = 0;
    for (std::size_t t = 0; t < iterations; ++t) {
        IterationPlan plan;
        plan.iteration_index = static_cast<std::uint32_t>(t);
        plan.seed = rng::derive_seed(seed, {rng::key("iteration"), t});
        const std::size_t take = std::min(per_iteration, corpus.size() - cursor);
        plan.problem_ids.reserve(take);
        for (std::size_t k = 0; k < take; ++k) {
            plan.problem_ids.push_back(corpus[order[cursor + k]].id);
        }
        cursor += take;
        if (take < per_iteration) result.truncated = true;
        result.plans.push_back(std::move(plan));
    }
    return result;
}

}  // namespace selftrain

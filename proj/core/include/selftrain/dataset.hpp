#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace selftrain {

/// One problem with a verifiable reference answer and a stable id.
struct Problem {
    std::string id;
    std::string question;
    std::string answer;
    nlohmann::json meta = nlohmann::json::object();
};

/// The ordered problem subset assigned to one self-training iteration.
struct IterationPlan {
    std::uint32_t iteration_index = 0;
    std::vector<std::string> problem_ids;
    std::uint64_t seed = 0;
};

struct PartitionResult {
    std::vector<IterationPlan> plans;
    // True when the corpus ran out before per_iteration * iterations problems.
    bool truncated = false;
};

// Reads a JSONL corpus (one {"id", "question", "answer", "meta"?} per line).
// Throws ValidationError with the line number on malformed lines, duplicate
// ids, or an empty corpus; IoError when the file cannot be opened.
std::vector<Problem> load_corpus(const std::string& path);

// Lightweight quality stand-ins: drop answers shorter than min_answer_len and,
// optionally, answers that do not parse as a numeric value.
std::vector<Problem> filter_corpus(std::vector<Problem> problems,
                                   std::size_t min_answer_len,
                                   bool numeric_answers_only);

// Splits the corpus into `iterations` pairwise-disjoint plans of
// `per_iteration` problems each, sampled without replacement. The final plan
// is truncated (and the result flagged) when the corpus is too small.
// Deterministic for a given seed.
PartitionResult partition_iterations(const std::vector<Problem>& corpus,
                                     std::size_t per_iteration,
                                     std::size_t iterations,
                                     std::uint64_t seed);

}  // namespace selftrain

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "selftrain/generator.hpp"
#include "selftrain/prm.hpp"

namespace selftrain {

struct EndpointConfig {
    std::string base_url;     // e.g. http://127.0.0.1:8080
    std::string model;        // model name sent in the chat payload
    std::string api_key_env;  // env var holding the bearer token; empty = none
    int max_attempts = 3;
    int backoff_ms = 100;  // doubles per retry
    int timeout_s = 60;
    int in_flight = 4;  // parallel request cap for batch drivers
};

/**
 * Chat-completions-style client: POST {base_url}/v1/chat/completions with
 * {model, messages, n, temperature, max_tokens}. Transport failures, non-2xx
 * statuses and malformed bodies are each retried with exponential backoff,
 * then surfaced as EndpointError with the request context. Records carry raw
 * text only; correctness is left for the verifier and steps for the segmenter.
 */
class EndpointGenerator final : public Generator {
public:
    explicit EndpointGenerator(EndpointConfig config);

    std::vector<ResponseRecord> generate(const GenerationRequest& request) override;

private:
    EndpointConfig config_;
};

/**
 * Process-reward endpoint client: POST {base_url}/score with
 * {question, steps} and read back {step_scores}. A score count mismatch or a
 * score outside [0, 1] is an endpoint error, never silently repaired.
 */
class EndpointScorer final : public Scorer {
public:
    explicit EndpointScorer(EndpointConfig config);

    ResponseRecord score(const Problem& problem, ResponseRecord record) const override;

private:
    EndpointConfig config_;
};

// Runs one generate() per request with at most `jobs` in flight. Responses
// may complete out of order; results are returned in request order.
std::vector<std::vector<ResponseRecord>> generate_batch(
    Generator& generator, const std::vector<GenerationRequest>& requests, int jobs);

}  // namespace selftrain

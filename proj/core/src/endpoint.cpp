#include "selftrain/endpoint.hpp"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <thread>
#include <utility>

#include <nlohmann/json.hpp>

#include "httplib.h"
#include "selftrain/errors.hpp"

namespace selftrain {

namespace {

std::string bearer_token(const EndpointConfig& config) {
    if (config.api_key_env.empty()) return "";
    const char* value = std::getenv(config.api_key_env.c_str());
    return value ? value : "";
}

// POSTs JSON with retry on transport failure, non-2xx status and malformed
// bodies. `parse` must throw EndpointError on a body it cannot accept.
template <typename Parse>
auto post_with_retry(const EndpointConfig& config, const std::string& route,
                     const nlohmann::json& body, const std::string& context, Parse&& parse)
    -> decltype(parse(std::string{})) {
    const std::string payload = body.dump();
    const std::string token = bearer_token(config);
    std::string last_error;

    for (int attempt = 1; attempt <= config.max_attempts; ++attempt) {
        if (attempt > 1) {
            const auto delay = std::chrono::milliseconds(
                static_cast<long long>(config.backoff_ms) << (attempt - 2));
            std::this_thread::sleep_for(delay);
        }

        httplib::Client client(config.base_url);
        client.set_connection_timeout(config.timeout_s, 0);
        client.set_read_timeout(config.timeout_s, 0);
        client.set_write_timeout(config.timeout_s, 0);
        httplib::Headers headers;
        if (!token.empty()) headers.emplace("Authorization", "Bearer " + token);

        auto result = client.Post(route, headers, payload, "application/json");
        if (!result) {
            last_error = "transport failure: " + httplib::to_string(result.error());
            continue;
        }
        if (result->status < 200 || result->status >= 300) {
            last_error = "HTTP status " + std::to_string(result->status);
            continue;
        }
        try {
            return parse(result->body);
        } catch (const EndpointError& e) {
            last_error = e.what();
            continue;
        }
    }

    throw EndpointError(context + ": " + last_error + " after " +
                        std::to_string(config.max_attempts) + " attempts (" + config.base_url +
                        route + ")");
}

}  // namespace

EndpointGenerator::EndpointGenerator(EndpointConfig config) : config_(std::move(config)) {
    if (config_.base_url.empty()) throw ValidationError("endpoint generator needs a base URL");
}

std::vector<ResponseRecord> EndpointGenerator::generate(const GenerationRequest& request) {
    validate(request);

    const nlohmann::json body{
        {"model", config_.model},
        {"messages", nlohmann::json::array({{{"role", "user"}, {"content", request.prompt}}})},
        {"n", request.num_samples},
        {"temperature", request.temperature},
        {"max_tokens", request.max_tokens},
    };
    const std::string context = "generate(" + request.problem_id + ")";

    auto texts = post_with_retry(
        config_, "/v1/chat/completions", body, context,
        [&](const std::string& raw) -> std::vector<std::string> {
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(raw);
            } catch (const nlohmann::json::parse_error& e) {
                throw EndpointError(std::string("malformed body: ") + e.what());
            }
            if (!j.contains("choices") || !j["choices"].is_array() ||
                j["choices"].size() != request.num_samples) {
                throw EndpointError("malformed body: expected " +
                                    std::to_string(request.num_samples) + " choices");
            }
            std::vector<std::string> out;
            out.reserve(request.num_samples);
            for (const auto& choice : j["choices"]) {
                if (!choice.contains("message") || !choice["message"].contains("content") ||
                    !choice["message"]["content"].is_string()) {
                    throw EndpointError("malformed body: choice without message content");
                }
                out.push_back(choice["message"]["content"].get<std::string>());
            }
            return out;
        });

    std::vector<ResponseRecord> records;
    records.reserve(texts.size());
    for (std::size_t i = 0; i < texts.size(); ++i) {
        ResponseRecord record;
        record.problem_id = request.problem_id;
        record.sample_index = request.first_sample_index + static_cast<std::uint32_t>(i);
        record.text = std::move(texts[i]);
        records.push_back(std::move(record));
    }
    return records;
}

EndpointScorer::EndpointScorer(EndpointConfig config) : config_(std::move(config)) {
    if (config_.base_url.empty()) throw ValidationError("endpoint scorer needs a base URL");
}

ResponseRecord EndpointScorer::score(const Problem& problem, ResponseRecord record) const {
    if (record.steps.empty()) {
        throw ValidationError("record " + record.problem_id + "#" +
                              std::to_string(record.sample_index) + " has no steps to score");
    }

    const nlohmann::json body{{"question", problem.question}, {"steps", record.steps}};
    const std::string context =
        "score(" + record.problem_id + "#" + std::to_string(record.sample_index) + ")";

    auto scores = post_with_retry(
        config_, "/score", body, context,
        [&](const std::string& raw) -> std::vector<double> {
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(raw);
            } catch (const nlohmann::json::parse_error& e) {
                throw EndpointError(std::string("malformed body: ") + e.what());
            }
            if (!j.contains("step_scores") || !j["step_scores"].is_array()) {
                throw EndpointError("malformed body: missing step_scores");
            }
            std::vector<double> out;
            for (const auto& v : j["step_scores"]) {
                if (!v.is_number()) throw EndpointError("malformed body: non-numeric step score");
                out.push_back(v.get<double>());
            }
            return out;
        });

    // Count and range violations are endpoint contract breaches, not values to
    // repair: threshold semantics depend on the [0, 1] scale.
    if (scores.size() != record.steps.size()) {
        throw EndpointError(context + ": endpoint returned " + std::to_string(scores.size()) +
                            " scores for " + std::to_string(record.steps.size()) + " steps");
    }
    for (double v : scores) {
        if (v < 0.0 || v > 1.0) {
            throw EndpointError(context + ": step score " + std::to_string(v) + " outside [0, 1]");
        }
    }

    record.step_rewards = std::move(scores);
    record.reward = aggregate_reward(record.step_rewards);
    return record;
}

std::vector<std::vector<ResponseRecord>> generate_batch(
    Generator& generator, const std::vector<GenerationRequest>& requests, int jobs) {
    if (jobs < 1) jobs = 1;
    std::vector<std::vector<ResponseRecord>> results(requests.size());
    if (requests.empty()) return results;

    std::atomic<std::size_t> cursor{0};
    std::vector<std::exception_ptr> errors(requests.size());
    const std::size_t workers = std::min<std::size_t>(jobs, requests.size());

    auto work = [&] {
        while (true) {
            const std::size_t i = cursor.fetch_add(1);
            if (i >= requests.size()) return;
            try {
                results[i] = generator.generate(requests[i]);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();

    // Surface the first failure in request order, preserving its category.
    for (const auto& err : errors) {
        if (err) std::rethrow_exception(err);
    }
    return results;
}

}  // namespace selftrain

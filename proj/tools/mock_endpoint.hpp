#pragma once

// In-process mock of the generation and PRM endpoints, used by the bundled
// mockd binary and the integration tests. Serves:
//   POST /v1/chat/completions  -> {choices: [{message: {content}}, ...]}
//   POST /score                -> {step_scores: [...]}
// Completions are correct with a planted per-question probability; scores
// track whether the final boxed answer matches the reference.

#include <atomic>
#include <map>
#include <memory>
#include <string>
#include <thread>
#include <utility>

#include <nlohmann/json.hpp>

#include "httplib.h"
#include "selftrain/rng.hpp"
#include "selftrain/verifier.hpp"

namespace selftrain::mock {

struct MockOptions {
    std::map<std::string, std::string> answer_by_question;
    std::map<std::string, double> ability_by_question;  // falls back to default_ability
    double default_ability = 0.5;
    std::uint64_t seed = 7;
    double mu_correct = 0.85;
    double mu_incorrect = 0.25;
    double sigma = 0.1;
    int fail_first = 0;  // respond 500 to this many initial requests
};

inline MockOptions mock_options_from_corpus(const std::vector<Problem>& corpus,
                                            double default_ability = 0.5,
                                            const std::string& ability_meta_key = "ability") {
    MockOptions opts;
    opts.default_ability = default_ability;
    for (const auto& p : corpus) {
        opts.answer_by_question[p.question] = p.answer;
        if (p.meta.contains(ability_meta_key)) {
            const auto& tag = p.meta[ability_meta_key];
            if (tag.is_number()) {
                opts.ability_by_question[p.question] = tag.get<double>();
            } else if (tag.is_string()) {
                try {
                    opts.ability_by_question[p.question] = std::stod(tag.get<std::string>());
                } catch (const std::exception&) {
                }
            }
        }
    }
    return opts;
}

class MockEndpoint {
public:
    explicit MockEndpoint(MockOptions opts) : opts_(std::move(opts)) { install_routes(); }

    ~MockEndpoint() { stop(); }

    // Binds and serves on a background thread; port 0 picks a free port.
    int start(const std::string& host = "127.0.0.1", int port = 0) {
        if (port == 0) {
            port_ = server_.bind_to_any_port(host);
        } else {
            server_.bind_to_port(host, port);
            port_ = port;
        }
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
        return port_;
    }

    void stop() {
        if (thread_.joinable()) {
            server_.stop();
            thread_.join();
        }
    }

    int port() const { return port_; }
    int requests_served() const { return served_.load(); }

private:
    bool maybe_fail(httplib::Response& res) {
        const int n = served_.fetch_add(1);
        if (n < opts_.fail_first) {
            res.status = 500;
            res.set_content("{\"error\":\"transient\"}", "application/json");
            return true;
        }
        return false;
    }

    void install_routes() {
        server_.Post("/v1/chat/completions", [this](const httplib::Request& req,
                                                    httplib::Response& res) {
            if (maybe_fail(res)) return;
            nlohmann::json body;
            try {
                body = nlohmann::json::parse(req.body);
            } catch (const nlohmann::json::parse_error&) {
                res.status = 400;
                return;
            }
            const std::string question =
                body.at("messages").at(0).at("content").get<std::string>();
            const std::uint32_t n = body.value("n", 1u);

            const auto answer = opts_.answer_by_question.find(question);
            const auto ability = opts_.ability_by_question.find(question);
            const double p = ability != opts_.ability_by_question.end() ? ability->second
                                                                        : opts_.default_ability;

            nlohmann::json choices = nlohmann::json::array();
            for (std::uint32_t i = 0; i < n; ++i) {
                const std::uint64_t draw = sequence_.fetch_add(1);
                auto stream = rng::derive(opts_.seed, {rng::key("mock-gen"),
                                                       rng::hash_bytes(question), draw});
                const bool correct = stream.next_bernoulli(p);
                std::string final_answer = "0";
                if (answer != opts_.answer_by_question.end()) {
                    if (correct) {
                        final_answer = answer->second;
                    } else if (auto v = parse_numeric(canonicalize_answer(answer->second))) {
                        final_answer =
                            std::to_string(static_cast<long long>(*v) + 1 +
                                           static_cast<long long>(stream.next_below(9)));
                    } else {
                        final_answer = answer->second + "-alt";
                    }
                }
                const std::string text =
                    "Apply the definition and set up the computation.\n\n"
                    "Combine the intermediate results.\n\n"
                    "Therefore the final answer is \\boxed{" +
                    final_answer + "}.";
                choices.push_back({{"index", i}, {"message", {{"role", "assistant"},
                                                              {"content", text}}}});
            }
            res.set_content(nlohmann::json{{"choices", choices}}.dump(), "application/json");
        });

        server_.Post("/score", [this](const httplib::Request& req, httplib::Response& res) {
            if (maybe_fail(res)) return;
            nlohmann::json body;
            try {
                body = nlohmann::json::parse(req.body);
            } catch (const nlohmann::json::parse_error&) {
                res.status = 400;
                return;
            }
            const std::string question = body.at("question").get<std::string>();
            const auto steps = body.at("steps").get<std::vector<std::string>>();

            bool correct = false;
            const auto answer = opts_.answer_by_question.find(question);
            if (answer != opts_.answer_by_question.end() && !steps.empty()) {
                if (auto boxed = extract_boxed(steps.back())) {
                    correct = answers_match(answer->second, *boxed);
                }
            }
            const double mu = correct ? opts_.mu_correct : opts_.mu_incorrect;

            nlohmann::json scores = nlohmann::json::array();
            for (std::size_t s = 0; s < steps.size(); ++s) {
                const std::uint64_t draw = sequence_.fetch_add(1);
                auto stream = rng::derive(opts_.seed, {rng::key("mock-prm"),
                                                       rng::hash_bytes(question), s, draw});
                scores.push_back(stream.next_truncated_gaussian(mu, opts_.sigma, 0.0, 1.0));
            }
            res.set_content(nlohmann::json{{"step_scores", scores}}.dump(), "application/json");
        });
    }

    MockOptions opts_;
    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
    std::atomic<int> served_{0};
    std::atomic<std::uint64_t> sequence_{0};
};

}  // namespace selftrain::mock

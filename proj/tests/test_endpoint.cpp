#include <atomic>
#include <chrono>
#include <thread>

#include <nlohmann/json.hpp>

#include "doctest.h"
#include "httplib.h"
#include "mock_endpoint.hpp"
#include "selftrain/endpoint.hpp"
#include "selftrain/errors.hpp"

using namespace selftrain;

namespace {

// Minimal controllable server for failure-path tests.
class TestServer {
public:
    explicit TestServer(httplib::Server::Handler handler) {
        server_.Post("/v1/chat/completions", handler);
        server_.Post("/score", handler);
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~TestServer() {
        server_.stop();
        thread_.join();
    }
    std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

private:
    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
};

EndpointConfig fast_config(const std::string& url) {
    EndpointConfig config;
    config.base_url = url;
    config.model = "test";
    config.max_attempts = 3;
    config.backoff_ms = 1;
    config.timeout_s = 5;
    return config;
}

GenerationRequest make_request(std::uint32_t n) {
    GenerationRequest r;
    r.problem_id = "p1";
    r.prompt = "what is 2+2?";
    r.num_samples = n;
    return r;
}

nlohmann::json completion_body(std::uint32_t n, const std::string& text) {
    nlohmann::json choices = nlohmann::json::array();
    for (std::uint32_t i = 0; i < n; ++i) {
        choices.push_back({{"message", {{"content", text + " #" + std::to_string(i)}}}});
    }
    return {{"choices", choices}};
}

}  // namespace

TEST_CASE("generator client parses a well-formed response") {
    TestServer server([](const httplib::Request& req, httplib::Response& res) {
        const auto body = nlohmann::json::parse(req.body);
        CHECK(body.at("model") == "test");
        CHECK(body.at("n") == 4);
        res.set_content(completion_body(4, "answer").dump(), "application/json");
    });
    EndpointGenerator gen(fast_config(server.url()));
    auto request = make_request(4);
    request.first_sample_index = 3;
    const auto records = gen.generate(request);
    REQUIRE(records.size() == 4);
    CHECK(records[0].sample_index == 3);
    CHECK(records[3].sample_index == 6);
    CHECK(records[0].text == "answer #0");
    for (const auto& r : records) {
        CHECK_FALSE(r.has_verdict());  // correctness is the verifier's job
        CHECK_FALSE(r.scored());
    }
}

TEST_CASE("transient failures are retried until success") {
    std::atomic<int> calls{0};
    TestServer server([&](const httplib::Request&, httplib::Response& res) {
        if (calls.fetch_add(1) < 2) {
            res.status = 503;
            return;
        }
        res.set_content(completion_body(2, "ok").dump(), "application/json");
    });
    EndpointGenerator gen(fast_config(server.url()));
    const auto records = gen.generate(make_request(2));
    CHECK(records.size() == 2);
    CHECK(calls.load() == 3);
}

TEST_CASE("persistent non-2xx status surfaces with request context") {
    TestServer server([](const httplib::Request&, httplib::Response& res) { res.status = 500; });
    EndpointGenerator gen(fast_config(server.url()));
    CHECK_THROWS_WITH_AS(gen.generate(make_request(1)), doctest::Contains("p1"), EndpointError);
}

TEST_CASE("malformed bodies are retried then surfaced") {
    std::atomic<int> calls{0};
    TestServer server([&](const httplib::Request&, httplib::Response& res) {
        calls.fetch_add(1);
        res.set_content("this is not json", "text/plain");
    });
    EndpointGenerator gen(fast_config(server.url()));
    CHECK_THROWS_WITH_AS(gen.generate(make_request(1)), doctest::Contains("malformed"),
                         EndpointError);
    CHECK(calls.load() == 3);
}

TEST_CASE("a choice-count mismatch is malformed") {
    TestServer server([](const httplib::Request&, httplib::Response& res) {
        res.set_content(completion_body(1, "short").dump(), "application/json");
    });
    EndpointGenerator gen(fast_config(server.url()));
    CHECK_THROWS_AS(gen.generate(make_request(3)), EndpointError);
}

TEST_CASE("scorer client validates count and range") {
    SUBCASE("count mismatch") {
        TestServer server([](const httplib::Request&, httplib::Response& res) {
            res.set_content(R"({"step_scores":[0.5]})", "application/json");
        });
        EndpointScorer scorer(fast_config(server.url()));
        ResponseRecord record;
        record.problem_id = "p1";
        record.steps = {"a", "b"};
        CHECK_THROWS_WITH_AS(scorer.score({"p1", "q", "1", {}}, record),
                             doctest::Contains("2 steps"), EndpointError);
    }
    SUBCASE("out-of-range score is an error, not a clamp") {
        TestServer server([](const httplib::Request&, httplib::Response& res) {
            res.set_content(R"({"step_scores":[0.5,1.4]})", "application/json");
        });
        EndpointScorer scorer(fast_config(server.url()));
        ResponseRecord record;
        record.problem_id = "p1";
        record.steps = {"a", "b"};
        CHECK_THROWS_WITH_AS(scorer.score({"p1", "q", "1", {}}, record),
                             doctest::Contains("outside [0, 1]"), EndpointError);
    }
    SUBCASE("valid scores fill the record") {
        TestServer server([](const httplib::Request& req, httplib::Response& res) {
            const auto body = nlohmann::json::parse(req.body);
            CHECK(body.at("question") == "q");
            res.set_content(R"({"step_scores":[0.9,0.4]})", "application/json");
        });
        EndpointScorer scorer(fast_config(server.url()));
        ResponseRecord record;
        record.problem_id = "p1";
        record.steps = {"a", "b"};
        const auto scored = scorer.score({"p1", "q", "1", {}}, record);
        CHECK(scored.step_rewards == std::vector<double>{0.9, 0.4});
        CHECK(scored.reward == 0.4);
    }
}

TEST_CASE("generate_batch caps concurrency and preserves request order") {
    std::atomic<int> in_flight{0};
    std::atomic<int> max_in_flight{0};
    TestServer server([&](const httplib::Request& req, httplib::Response& res) {
        const int now = in_flight.fetch_add(1) + 1;
        int seen = max_in_flight.load();
        while (now > seen && !max_in_flight.compare_exchange_weak(seen, now)) {
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
        const auto body = nlohmann::json::parse(req.body);
        const std::string prompt = body.at("messages").at(0).at("content");
        res.set_content(completion_body(1, prompt).dump(), "application/json");
        in_flight.fetch_sub(1);
    });

    EndpointGenerator gen(fast_config(server.url()));
    std::vector<GenerationRequest> requests;
    for (int i = 0; i < 12; ++i) {
        GenerationRequest r;
        r.problem_id = "p" + std::to_string(i);
        r.prompt = "prompt-" + std::to_string(i);
        r.num_samples = 1;
        requests.push_back(std::move(r));
    }
    const auto results = generate_batch(gen, requests, 3);
    REQUIRE(results.size() == 12);
    for (int i = 0; i < 12; ++i) {
        REQUIRE(results[i].size() == 1);
        CHECK(results[i][0].text == "prompt-" + std::to_string(i) + " #0");
        CHECK(results[i][0].problem_id == ("p" + std::to_string(i)));
    }
    CHECK(max_in_flight.load() <= 3);
    CHECK(max_in_flight.load() >= 2);  // some overlap actually happened
}

TEST_CASE("bundled mock endpoint speaks both protocols") {
    mock::MockOptions options;
    options.answer_by_question["what is 2+2?"] = "4";
    options.ability_by_question["what is 2+2?"] = 1.0;
    mock::MockEndpoint endpoint(options);
    const int port = endpoint.start();
    const std::string url = "http://127.0.0.1:" + std::to_string(port);

    EndpointGenerator gen(fast_config(url));
    const auto records = gen.generate(make_request(3));
    REQUIRE(records.size() == 3);
    for (const auto& r : records) {
        CHECK(r.text.find("\\boxed{4}") != std::string::npos);
    }

    EndpointScorer scorer(fast_config(url));
    ResponseRecord record = records[0];
    record.steps = segment_steps(record.text);
    const auto scored = scorer.score({"p1", "what is 2+2?", "4", {}}, record);
    CHECK(scored.step_rewards.size() == record.steps.size());
    CHECK(scored.reward >= 0.0);
    CHECK(scored.reward <= 1.0);
}

TEST_CASE("mock endpoint fail-first knob drives the retry path") {
    mock::MockOptions options;
    options.answer_by_question["what is 2+2?"] = "4";
    options.fail_first = 2;
    mock::MockEndpoint endpoint(options);
    const int port = endpoint.start();

    EndpointGenerator gen(fast_config("http://127.0.0.1:" + std::to_string(port)));
    const auto records = gen.generate(make_request(1));
    CHECK(records.size() == 1);
    CHECK(endpoint.requests_served() == 3);
}

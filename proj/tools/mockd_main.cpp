// selftrain-mockd: standalone mock generation + PRM endpoint for local runs.

#include <csignal>
#include <iostream>

#include "CLI11.hpp"
#include "mock_endpoint.hpp"
#include "selftrain/dataset.hpp"

namespace {
volatile std::sig_atomic_t g_stop = 0;
void handle_signal(int) { g_stop = 1; }
}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mock generation and PRM endpoints backed by a problem corpus"};

    std::string corpus_path;
    int port = 8089;
    double ability = 0.5;
    std::uint64_t seed = 7;
    int fail_first = 0;
    app.add_option("--corpus", corpus_path, "Problems JSONL")->required();
    app.add_option("--port", port, "Port to bind (0 = any free port)");
    app.add_option("--ability", ability, "Default solve probability per completion");
    app.add_option("--seed", seed, "Deterministic draw seed");
    app.add_option("--fail-first", fail_first, "Respond 500 to this many initial requests");

    CLI11_PARSE(app, argc, argv);

    try {
        const auto corpus = selftrain::load_corpus(corpus_path);
        auto options = selftrain::mock::mock_options_from_corpus(corpus, ability);
        options.seed = seed;
        options.fail_first = fail_first;

        selftrain::mock::MockEndpoint endpoint(std::move(options));
        const int bound = endpoint.start("127.0.0.1", port);
        std::cout << "listening on http://127.0.0.1:" << bound << " (" << corpus.size()
                  << " problems)" << std::endl;

        std::signal(SIGINT, handle_signal);
        std::signal(SIGTERM, handle_signal);
        while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
        endpoint.stop();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

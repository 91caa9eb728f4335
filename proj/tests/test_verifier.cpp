#include <string>

#include "doctest.h"
#include "selftrain/rng.hpp"
#include "selftrain/verifier.hpp"
#include "support/oracles.hpp"

using namespace selftrain;

namespace {
Problem make_problem(const std::string& answer) {
    return Problem{"p1", "what is the answer?", answer, {}};
}
}  // namespace

TEST_CASE("boxed answer matches exactly") {
    const auto v = verify(make_problem("42"), "...so the result is \\boxed{42}.");
    CHECK(v.correct);
    CHECK(v.method == ExtractionMethod::BoxedExtraction);
    REQUIRE(v.extracted_answer.has_value());
    CHECK(*v.extracted_answer == "42");
}

TEST_CASE("rational and decimal forms agree within tolerance") {
    const auto v = verify(make_problem("1/2"), "we conclude \\boxed{0.5}");
    CHECK(v.correct);

    // Cross-check with an independent rational reader.
    const auto lhs = oracles::read_rational("1/2");
    const auto rhs = oracles::read_rational("0.5");
    REQUIRE(lhs);
    REQUIRE(rhs);
    CHECK(std::abs(static_cast<double>(*lhs - *rhs)) <= 1e-9);
}

TEST_CASE("no number and no box means no extraction") {
    const auto v = verify(make_problem("7"), "I am not sure about this one.");
    CHECK_FALSE(v.correct);
    CHECK_FALSE(v.extracted_answer.has_value());
}

TEST_CASE("the last boxed span wins") {
    const auto v = verify(make_problem("9"), "first \\boxed{3} then finally \\boxed{9}");
    CHECK(v.correct);
    CHECK(*v.extracted_answer == "9");
}

TEST_CASE("nested braces inside a boxed span survive") {
    const auto extracted = extract_boxed("answer: \\boxed{\\frac{1}{2}}");
    REQUIRE(extracted);
    CHECK(*extracted == "\\frac{1}{2}");
}

TEST_CASE("last numeric token is used when no box is present") {
    const auto v = verify(make_problem("28"), "we add 12 and 16 to get 28");
    CHECK(v.correct);
    CHECK(v.method == ExtractionMethod::LastNumber);

    const auto negative = verify(make_problem("-3"), "the value drops to -3");
    CHECK(negative.correct);

    const auto fraction = verify(make_problem("0.75"), "this simplifies to 3/4");
    CHECK(fraction.correct);
}

TEST_CASE("canonicalization strips currency and grouping") {
    CHECK(answers_match("1,234", "$1234"));
    CHECK(answers_match(" 12 ", "12"));
    CHECK_FALSE(answers_match("12", "13"));
}

TEST_CASE("non-numeric answers fall back to case-insensitive equality") {
    CHECK(answers_match("Yes", "yes"));
    CHECK_FALSE(answers_match("yes", "no"));
    const auto v = verify(make_problem("yes"), "yes");
    CHECK(v.correct);
    CHECK(v.method == ExtractionMethod::Exact);
}

TEST_CASE("numeric tolerance is 1e-9 absolute") {
    CHECK(answers_match("1", "1.0000000005"));
    CHECK_FALSE(answers_match("1", "1.000001"));
}

TEST_CASE("property: a verbatim boxed answer always verifies") {
    auto stream = rng::derive(2024, {rng::key("verifier-prop")});
    const std::string alphabet = "0123456789abcXYZ./-";
    for (int trial = 0; trial < 200; ++trial) {
        std::string answer;
        const std::size_t len = 1 + stream.next_below(8);
        for (std::size_t i = 0; i < len; ++i) {
            answer.push_back(alphabet[stream.next_below(alphabet.size())]);
        }
        if (!parse_numeric(canonicalize_answer(answer)) &&
            canonicalize_answer(answer).empty()) {
            continue;
        }
        const auto problem = make_problem(answer);
        const auto v = verify(problem, "some reasoning...\n\n\\boxed{" + answer + "}");
        CAPTURE(answer);
        CHECK(v.correct);
    }
}

TEST_CASE("verify is deterministic") {
    const auto p = make_problem("5");
    const auto a = verify(p, "maybe \\boxed{5}");
    const auto b = verify(p, "maybe \\boxed{5}");
    CHECK(a.correct == b.correct);
    CHECK(a.extracted_answer == b.extracted_answer);
    CHECK(a.method == b.method);
}

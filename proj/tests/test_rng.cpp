#include <set>

#include "doctest.h"
#include "selftrain/rng.hpp"

using namespace selftrain;

TEST_CASE("derived streams are independent of draw order") {
    auto a = rng::derive(42, {rng::key("gen"), rng::hash_bytes("q1"), 0});
    auto b = rng::derive(42, {rng::key("gen"), rng::hash_bytes("q1"), 0});
    for (int i = 0; i < 16; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("different keys give different streams") {
    std::set<std::uint64_t> firsts;
    for (std::uint64_t sample = 0; sample < 64; ++sample) {
        firsts.insert(
            rng::derive(42, {rng::key("gen"), rng::hash_bytes("q1"), sample}).next_u64());
    }
    CHECK(firsts.size() == 64);
}

TEST_CASE("next_double lies in [0, 1)") {
    auto s = rng::derive(7, {rng::key("u")});
    for (int i = 0; i < 10000; ++i) {
        const double v = s.next_double();
        CHECK(v >= 0.0);
        CHECK(v < 1.0);
    }
}

TEST_CASE("next_below is bounded and hits every residue") {
    auto s = rng::derive(9, {rng::key("b")});
    std::set<std::uint64_t> seen;
    for (int i = 0; i < 2000; ++i) {
        const auto v = s.next_below(7);
        CHECK(v < 7);
        seen.insert(v);
    }
    CHECK(seen.size() == 7);
}

TEST_CASE("truncated gaussian stays inside the bounds") {
    auto s = rng::derive(11, {rng::key("t")});
    for (int i = 0; i < 5000; ++i) {
        const double v = s.next_truncated_gaussian(0.85, 0.15, 0.0, 1.0);
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("zero-sigma truncated gaussian degenerates to the clamped mean") {
    auto s = rng::derive(11, {rng::key("t")});
    CHECK(s.next_truncated_gaussian(0.3, 0.0, 0.0, 1.0) == 0.3);
    CHECK(s.next_truncated_gaussian(1.5, 0.0, 0.0, 1.0) == 1.0);
}

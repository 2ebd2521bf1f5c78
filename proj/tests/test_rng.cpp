#include <cmath>
#include <cstdint>
#include <vector>

#include "cwbc/rng.hpp"
#include "doctest.h"

using namespace cwbc;

namespace {

// Standalone xoshiro256++ reimplementation used only to cross-check Rng.
struct RefXoshiro {
    std::uint64_t s[4];

    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t next() {
        const std::uint64_t result = rotl(s[0] + s[3], 23) + s[0];
        const std::uint64_t t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = rotl(s[3], 45);
        return result;
    }
};

}  // namespace

TEST_CASE("splitmix64 matches the published reference vector") {
    // First output of the reference splitmix64 stream from state 0.
    CHECK(splitmix64(0) == 0xe220a8397b1dcdafULL);
    // Regression pins so seed derivations never drift silently.
    CHECK(splitmix64(42) == 0xbdd732262feb6e95ULL);
    CHECK(mix_seed(1, 2) != mix_seed(2, 1));
}

TEST_CASE("Rng agrees with an independent xoshiro256++ next()") {
    // Reproduce the seeding chain, then compare raw outputs.
    RefXoshiro ref{};
    std::uint64_t s = 12345;
    for (auto& w : ref.s) {
        s = splitmix64(s);
        w = s;
    }
    Rng rng(12345);
    for (int i = 0; i < 50; ++i) CHECK(rng.next_u64() == ref.next());
}

TEST_CASE("Rng output is pinned for seed 42") {
    Rng rng(42);
    CHECK(rng.next_u64() == 0xc757960b442b0ac3ULL);
    CHECK(rng.next_u64() == 0x4bb22a7f77ff8c6cULL);
    CHECK(rng.next_u64() == 0x04950439d3c5eafeULL);
    Rng sampler = Rng::stream(42, streams::kSampler);
    CHECK(sampler.next_u64() == 0xa032edcf22102200ULL);
}

TEST_CASE("same seed, same sequence; different streams diverge") {
    Rng a(7), b(7);
    for (int i = 0; i < 20; ++i) CHECK(a.next_u64() == b.next_u64());

    Rng s1 = Rng::stream(7, streams::kSampler);
    Rng s2 = Rng::stream(7, streams::kNoise);
    int equal = 0;
    for (int i = 0; i < 20; ++i)
        if (s1.next_u64() == s2.next_u64()) ++equal;
    CHECK(equal == 0);

    Rng i0 = Rng::stream(7, streams::kDatagen, 0);
    Rng i1 = Rng::stream(7, streams::kDatagen, 1);
    CHECK(i0.next_u64() != i1.next_u64());
}

TEST_CASE("uniform() stays in [0,1) with the right moments") {
    Rng rng(3);
    const int n = 100000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        sum += u;
        sq += u * u;
    }
    const double mean = sum / n;
    const double var = sq / n - mean * mean;
    CHECK(std::abs(mean - 0.5) < 0.01);
    CHECK(std::abs(var - 1.0 / 12.0) < 0.01);
}

TEST_CASE("uniform(lo, hi) respects its interval") {
    Rng rng(4);
    for (int i = 0; i < 1000; ++i) {
        const double u = rng.uniform(-3.0, 5.0);
        CHECK(u >= -3.0);
        CHECK(u < 5.0);
    }
}

TEST_CASE("uniform_index covers 0..n-1 near-uniformly") {
    Rng rng(5);
    const std::size_t n = 7;
    std::vector<long> counts(n, 0);
    const long draws = 70000;
    for (long i = 0; i < draws; ++i) {
        const std::size_t k = rng.uniform_index(n);
        REQUIRE(k < n);
        ++counts[k];
    }
    const double expected = static_cast<double>(draws) / static_cast<double>(n);
    for (long c : counts) CHECK(std::abs(c - expected) / expected < 0.05);
    CHECK(rng.uniform_index(1) == 0);
    CHECK(rng.uniform_index(0) == 0);
}

TEST_CASE("normal() has standard moments and reproducible pairs") {
    Rng rng(6);
    const int n = 200000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal();
        sum += z;
        sq += z * z;
    }
    const double mean = sum / n;
    const double stddev = std::sqrt(sq / n - mean * mean);
    CHECK(std::abs(mean) < 0.01);
    CHECK(std::abs(stddev - 1.0) < 0.01);

    Rng a(9), b(9);
    for (int i = 0; i < 10; ++i) CHECK(a.normal() == b.normal());
}

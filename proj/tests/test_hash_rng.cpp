#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "ganimals/error.hpp"
#include "ganimals/hash.hpp"
#include "ganimals/rng.hpp"

using namespace ganimals;

TEST_CASE("sha256 known vectors") {
    CHECK(sha256("abc").hex() == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256("").hex() == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("digest hex round trip and prefix") {
    const auto d = sha256("abc");
    CHECK(Digest256::from_hex(d.hex()) == d);
    CHECK(d.prefix_u64() == 0xba7816bf8f01cfeaULL);
    CHECK_THROWS_AS(Digest256::from_hex("abc"), Error);
    CHECK_THROWS_AS(Digest256::from_hex(std::string(64, 'g')), Error);
}

TEST_CASE("derive_seed separates every argument") {
    std::set<std::uint64_t> seen{derive_seed(1, "a", "b", 0), derive_seed(2, "a", "b", 0),
                                 derive_seed(1, "x", "b", 0), derive_seed(1, "a", "x", 0),
                                 derive_seed(1, "a", "b", 1)};
    CHECK(seen.size() == 5);
    CHECK(derive_seed(1, "a", "b", 0) == derive_seed(1, "a", "b", 0));
}

TEST_CASE("rng is reproducible and seeds diverge") {
    Rng a(42), b(42), c(43);
    for (int i = 0; i < 100; ++i) {
        const auto x = a.next_u64();
        CHECK(x == b.next_u64());
        (void)c.next_u64();
    }
    CHECK(a.state() != c.state());
}

TEST_CASE("uniform01 stays in [0, 1)") {
    Rng r(7);
    double sum = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double u = r.uniform01();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
    }
    CHECK(sum / 100000 == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("below is bounded and roughly uniform") {
    Rng r(9);
    std::vector<int> counts(7, 0);
    for (int i = 0; i < 70000; ++i) {
        const auto v = r.below(7);
        REQUIRE(v < 7);
        ++counts[v];
    }
    for (int c : counts)
        CHECK(std::abs(c - 10000) < 500);
    CHECK(r.below(1) == 0);
}

TEST_CASE("normal has unit moments") {
    Rng r(11);
    double s = 0.0, s2 = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double z = r.normal();
        s += z;
        s2 += z * z;
    }
    CHECK(std::abs(s / n) < 0.01);
    CHECK(std::abs(s2 / n - 1.0) < 0.02);
}

#include <catch2/catch_amalgamated.hpp>

#include "seuda/uda/pool.hpp"
#include "seuda/uda/schedule.hpp"

using namespace seuda;

namespace {

Tensor<float> tagged(float v) { return Tensor<float>(1, 2, 2, v); }

}  // namespace

TEST_CASE("pool passes fresh images through while filling") {
    uda::ImagePool<float> pool(50, Rng::stream(1, "pool"));
    auto out = pool.query(tagged(7.0f));
    REQUIRE(out[0] == 7.0f);
    REQUIRE(pool.size() == 1);
    for (int i = 1; i < 50; ++i) {
        auto o = pool.query(tagged(static_cast<float>(i)));
        REQUIRE(o[0] == static_cast<float>(i));  // fill phase: exact passthrough
    }
    REQUIRE(pool.size() == 50);
}

TEST_CASE("pool capacity is never exceeded") {
    uda::ImagePool<float> pool(50, Rng::stream(2, "pool"));
    for (int i = 0; i < 500; ++i) {
        pool.query(tagged(static_cast<float>(i)));
        REQUIRE(pool.size() <= 50);
    }
    REQUIRE(pool.size() == 50);
}

TEST_CASE("pool replay is deterministic under a fixed seed") {
    uda::ImagePool<float> a(10, Rng::stream(3, "pool"));
    uda::ImagePool<float> b(10, Rng::stream(3, "pool"));
    bool any_evicted = false;
    for (int i = 0; i < 200; ++i) {
        auto oa = a.query(tagged(static_cast<float>(i)));
        auto ob = b.query(tagged(static_cast<float>(i)));
        REQUIRE(oa[0] == ob[0]);
        any_evicted |= oa[0] != static_cast<float>(i);
    }
    REQUIRE(any_evicted);  // past images do come back after the fill phase
}

TEST_CASE("lr schedule endpoints and midpoint") {
    REQUIRE(uda::lr_at(0) == 0.002);
    REQUIRE(uda::lr_at(150, 0.002, 100, 100) == Catch::Approx(0.001));
    REQUIRE(uda::lr_at(200, 0.002, 100, 100) == 0.0);
    REQUIRE(uda::lr_at(1000, 0.002, 100, 100) == 0.0);
    REQUIRE_THROWS_AS(uda::lr_at(-1), std::invalid_argument);
}

TEST_CASE("lr schedule is non-increasing and hits zero at hold+decay") {
    double prev = 1e9;
    for (long long e = 0; e <= 250; ++e) {
        const double lr = uda::lr_at(e, 0.002, 100, 100);
        REQUIRE(lr <= prev);
        REQUIRE(lr >= 0.0);
        prev = lr;
    }
    REQUIRE(uda::lr_at(99, 0.002, 100, 100) == 0.002);
    REQUIRE(uda::lr_at(100 + 100, 0.002, 100, 100) == 0.0);

    // knobs move the ramp
    REQUIRE(uda::lr_at(5, 0.01, 2, 10) == Catch::Approx(0.01 * (1.0 - 3.0 / 10.0)));
}

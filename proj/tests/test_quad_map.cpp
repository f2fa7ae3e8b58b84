#include <doctest.h>

#include <random>

#include "hea/quad_map.hpp"

using hea::MapDomainError;
using hea::QuadMap;

TEST_CASE("identity map evaluates and inverts") {
    QuadMap id{0.0, 1.0, 0.0};
    CHECK(id.eval(3.7) == doctest::Approx(3.7));
    CHECK(id.invert(-2.0) == doctest::Approx(-2.0));
}

TEST_CASE("fuel map arithmetic") {
    QuadMap fuel{0.0, 0.0821, 0.0327};
    CHECK(fuel.eval(1.0) == doctest::Approx(0.1148).epsilon(1e-12));
    CHECK(fuel.eval(5.0) == doctest::Approx(0.4432).epsilon(1e-12));
    CHECK(fuel.invert(0.1148) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("quadratic inversion on the monotone branch") {
    QuadMap m{1.0, 1.0, 0.0};
    CHECK(m.invert(2.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m.vertex() == doctest::Approx(-0.5));
    CHECK(m.min_value() == doctest::Approx(-0.25));
}

TEST_CASE("domain guards throw") {
    QuadMap m{1.0, 1.0, 0.0};
    CHECK_THROWS_AS(m.eval(-2.0), MapDomainError);
    CHECK_THROWS_AS(m.invert(-1.0), MapDomainError);
}

TEST_CASE("round trip, monotonicity and convexity on random maps") {
    std::mt19937 rng(12345);
    std::uniform_real_distribution<double> c2d(0.0, 2.0), c1d(0.1, 3.0),
        c0d(-1.0, 1.0), xd(0.0, 10.0);
    for (int k = 0; k < 200; ++k) {
        QuadMap m{c2d(rng), c1d(rng), c0d(rng)};
        REQUIRE(m.valid());
        const double lo = m.c2 > 0 ? m.vertex() : -10.0;
        double xa = lo + xd(rng), xb = lo + xd(rng);
        if (xa > xb) std::swap(xa, xb);
        // monotone
        CHECK(m.eval(xa) <= m.eval(xb) + 1e-12);
        // midpoint convexity
        const double mid = 0.5 * (xa + xb);
        CHECK(m.eval(mid) <= 0.5 * (m.eval(xa) + m.eval(xb)) + 1e-12);
        // round trip
        const double y = m.eval(xb);
        CHECK(m.eval(m.invert(y)) ==
              doctest::Approx(y).epsilon(1e-12).scale(1.0 + std::abs(y)));
    }
}

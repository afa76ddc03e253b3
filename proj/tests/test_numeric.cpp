#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hedgelab/normal.hpp"
#include "hedgelab/quadrature.hpp"
#include "hedgelab/rng.hpp"
#include "hedgelab/rootfind.hpp"

using namespace hedgelab;

TEST_CASE("normal cdf/ppf round trip") {
    for (double p : {1e-10, 1e-4, 0.2, 0.5, 0.77, 1.0 - 1e-6}) {
        const double x = num::norm_ppf(p);
        CHECK(num::norm_cdf(x) == doctest::Approx(p).epsilon(1e-12));
    }
    CHECK(num::norm_ppf(0.5) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(num::norm_cdf(0.0) == doctest::Approx(0.5));
    CHECK_THROWS_AS(num::norm_ppf(0.0), std::invalid_argument);
    CHECK_THROWS_AS(num::norm_ppf(1.0), std::invalid_argument);
}

TEST_CASE("adaptive quadrature on smooth and long-tailed integrands") {
    const double i1 = num::integrate([](double x) { return std::sin(x); }, 0.0, M_PI);
    CHECK(i1 == doctest::Approx(2.0).epsilon(1e-12));

    // power-law tail over many decades
    const double big = 1e18;
    const double i2 = num::integrate([](double x) { return 1.0 / ((1.0 + x) * (1.0 + x)); },
                                     0.0, big);
    CHECK(i2 == doctest::Approx(1.0 - 1.0 / (1.0 + big)).epsilon(1e-9));

    // breakpoint at a jump
    auto jumpy = [](double x) { return x < 1.0 ? 1.0 : 0.25; };
    const double i3 = num::integrate(jumpy, 0.0, 2.0, {}, {1.0});
    CHECK(i3 == doctest::Approx(1.25).epsilon(1e-12));
}

TEST_CASE("cumulative integral prefix queries") {
    num::CumulativeIntegral cum([](double x) { return std::exp(-x); }, 0.0, 30.0);
    CHECK(cum.converged());
    CHECK(cum.total() == doctest::Approx(1.0 - std::exp(-30.0)).epsilon(1e-11));
    for (double x : {0.1, 1.0, 2.5, 10.0, 29.0})
        CHECK(cum.value(x) == doctest::Approx(1.0 - std::exp(-x)).epsilon(1e-10));
    // relative accuracy of a tiny forward tail
    const double tail = cum.tail(25.0);
    CHECK(tail == doctest::Approx(std::exp(-25.0) - std::exp(-30.0)).epsilon(1e-9));
}

TEST_CASE("rng determinism and stream independence") {
    num::PathRng a(42, 7), b(42, 7), c(42, 8);
    bool same = true, diff = false;
    for (int i = 0; i < 100; ++i) {
        const auto x = a.next_u64(), y = b.next_u64(), z = c.next_u64();
        same = same && (x == y);
        diff = diff || (x != z);
    }
    CHECK(same);
    CHECK(diff);
    num::PathRng d(42, 7);
    for (int i = 0; i < 1000; ++i) {
        const double u = d.next_uniform();
        CHECK(u > 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("bisection and golden section") {
    const double root = num::bisect([](double x) { return x * x - 2.0; }, 0.0, 2.0);
    CHECK(root == doctest::Approx(std::sqrt(2.0)).epsilon(1e-10));
    const double m = num::golden_min([](double x) { return (x - 1.7) * (x - 1.7); }, 0.0, 5.0);
    CHECK(m == doctest::Approx(1.7).epsilon(1e-7));
    auto f = [](double x) { return 1.0 / x + x; };
    const auto [lo, hi] = num::bracket_min(f, 0.01);
    CHECK(lo < 1.0);
    CHECK(hi > 1.0);
}

TEST_CASE("kolmogorov tail values") {
    // classical reference points of the asymptotic KS distribution
    CHECK(num::kolmogorov_tail(1.3581) == doctest::Approx(0.05).epsilon(2e-3));
    CHECK(num::kolmogorov_tail(1.2238) == doctest::Approx(0.10).epsilon(2e-3));
    CHECK(num::kolmogorov_tail(0.05) == doctest::Approx(1.0));
}

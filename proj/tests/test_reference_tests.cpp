#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <vector>

#include "mtest/error.hpp"
#include "mtest/random.hpp"
#include "mtest/reference_tests.hpp"
#include "oracles.hpp"

using namespace mtest;
using Catch::Approx;

TEST_CASE("incomplete beta closed forms", "[reference]") {
    // I_x(1, 1) = x, I_x(a, 1) = x^a, I_x(1, b) = 1 - (1 - x)^b
    for (double x : {0.0, 0.1, 0.37, 0.5, 0.9, 1.0}) {
        CHECK(incomplete_beta(1.0, 1.0, x) == Approx(x).margin(1e-14));
        CHECK(incomplete_beta(2.5, 1.0, x) == Approx(std::pow(x, 2.5)).margin(1e-14));
        CHECK(incomplete_beta(1.0, 3.0, x) == Approx(1.0 - std::pow(1.0 - x, 3.0)).margin(1e-14));
        CHECK(incomplete_beta(0.5, 0.5, x) ==
              Approx(2.0 / std::numbers::pi * std::asin(std::sqrt(x))).margin(1e-13));
    }
}

TEST_CASE("student_t_cdf", "[reference]") {
    for (double df : {0.5, 1.0, 2.0, 3.7, 10.0, 100.0, 1e6}) {
        CHECK(student_t_cdf(0.0, df) == 0.5);
        CHECK(student_t_cdf(1e300, df) == Approx(1.0).margin(1e-15));
        CHECK(student_t_cdf(-1e300, df) == Approx(0.0).margin(1e-15));
        CHECK(student_t_cdf(INFINITY, df) == 1.0);
        CHECK(student_t_cdf(-INFINITY, df) == 0.0);
        for (double x : {0.01, 0.3, 1.0, 2.5, 7.0, 40.0}) {
            CHECK(std::fabs(student_t_cdf(-x, df) - (1.0 - student_t_cdf(x, df))) < 1e-12);
        }
    }
    // closed forms for df = 1 (Cauchy) and df = 2
    for (double x : {-30.0, -2.0, -0.4, 0.4, 1.0, 3.0, 100.0}) {
        CHECK(student_t_cdf(x, 1.0) == Approx(0.5 + std::atan(x) / std::numbers::pi).margin(1e-14));
        CHECK(student_t_cdf(x, 2.0) == Approx(0.5 + x / (2.0 * std::sqrt(2.0 + x * x))).margin(1e-14));
    }
}

TEST_CASE("student_t_cdf matches quadrature of the density", "[reference][oracle]") {
    const double q = oracle::t_cdf_quadrature(1.0, 10.0);
    CHECK(std::fabs(student_t_cdf(1.0, 10.0) - q) < 1e-8);
    CHECK(q == Approx(0.8295534338).margin(1e-9));
    for (double df : {1.0, 2.0, 5.0, 10.0, 30.0, 100.0}) {
        for (double x : {-6.0, -2.2, -0.7, 0.05, 0.9, 1.96, 4.5}) {
            CHECK(std::fabs(student_t_cdf(x, df) - oracle::t_cdf_quadrature(x, df)) < 1e-8);
        }
    }
}

TEST_CASE("student_t_cdf is increasing and tends to the normal", "[reference][property]") {
    RandomStream rng(1);
    for (int trial = 0; trial < 2000; ++trial) {
        const double df = std::exp(rng.normal(1.0, 2.0));
        const double a = rng.normal(0.0, 3.0);
        const double b = a + 0.01 + rng.uniform();
        const double fa = student_t_cdf(a, df);
        const double fb = student_t_cdf(b, df);
        CHECK(fa <= fb);
        // strict wherever the two values are not both rounded into a tail
        if (fa > 1e-10 && fb < 1.0 - 1e-10) CHECK(fa < fb);
    }
    for (double x = -5.0; x <= 5.0; x += 0.25) {
        const double normal = 0.5 * std::erfc(-x / std::sqrt(2.0));
        CHECK(std::fabs(student_t_cdf(x, 1e6) - normal) < 1e-6);
    }
}

TEST_CASE("t_test", "[reference]") {
    SECTION("hand example") {
        // means 3 and 5, variances 2.5 each: pooled sp^2 = 2.5, se = sqrt(2.5 * (1/5 + 1/5)) = 1
        const auto r = t_test(SamplePair({1, 2, 3, 4, 5}, {3, 4, 5, 6, 7}), 0.05).result;
        CHECK(r.statistic == Approx(-2.0));
        CHECK(r.df == 8.0);
        const double p = 2.0 * oracle::t_cdf_quadrature(-2.0, 8.0);
        CHECK(std::fabs(r.p_value - p) < 1e-8);
        CHECK(r.p_value == Approx(0.0805).margin(5e-5));
        CHECK(r.test == ClassicalTest::StudentT);
        CHECK_FALSE(t_test(SamplePair({1, 2, 3, 4, 5}, {3, 4, 5, 6, 7}), 0.05).reject);
        CHECK(t_test(SamplePair({1, 2, 3, 4, 5}, {3, 4, 5, 6, 7}), 0.1).reject);
    }
    SECTION("identical groups") {
        const auto r = t_test(SamplePair({0.3, 1.7, 2.2}, {0.3, 1.7, 2.2}), 0.05).result;
        CHECK(r.statistic == 0.0);
        CHECK(r.p_value == 1.0);
    }
    SECTION("degenerate") {
        CHECK_THROWS_AS(t_test(SamplePair({1, 1}, {1, 1}), 0.05), DegenerateData);
        CHECK_THROWS_AS(t_test(SamplePair({1, 2}, {3, 4}), 1.5), InvalidAlpha);
        CHECK_THROWS_AS(welch_test(SamplePair({1, 2}, {3, 4}), 0.0), InvalidAlpha);
    }
}

TEST_CASE("welch_test", "[reference]") {
    SECTION("equal variances and sizes reduce to the pooled test") {
        const SamplePair p({1, 2, 3, 4, 5}, {3, 4, 5, 6, 7});
        const auto w = welch_test(p, 0.05).result;
        const auto t = t_test(p, 0.05).result;
        CHECK(w.statistic == Approx(t.statistic));
        CHECK(w.df == Approx(8.0));
        CHECK(w.p_value == Approx(t.p_value));
        CHECK(w.test == ClassicalTest::WelchT);
    }
    SECTION("df lies between min(n) - 1 and n1 + n2 - 2") {
        RandomStream rng(4);
        for (int trial = 0; trial < 200; ++trial) {
            std::vector<double> a(10), b(10);
            for (double& v : a) v = rng.normal(0.0, 1.0);
            for (double& v : b) v = rng.normal(0.0, 2.0);
            const auto r = welch_test(SamplePair(a, b), 0.05).result;
            CHECK(r.df > 9.0);
            CHECK(r.df < 18.0);
        }
    }
    SECTION("hand example with unequal variances") {
        // var1 = 1, var2 = 16, n = 3 each: se^2 = 17/3, df = (17/3)^2 / ((1/9 + 256/9) / 2)
        const auto r = welch_test(SamplePair({-1, 0, 1}, {6, 10, 14}), 0.05).result;
        CHECK(r.statistic == Approx(-10.0 / std::sqrt(17.0 / 3.0)));
        CHECK(r.df == Approx((289.0 / 9.0) / (257.0 / 18.0)));
        CHECK(std::fabs(r.p_value - 2.0 * oracle::t_cdf_quadrature(r.statistic, r.df)) < 1e-8);
    }
    SECTION("degenerate") {
        CHECK_THROWS_AS(welch_test(SamplePair({1, 1}, {1, 3}), 0.05), DegenerateData);
    }
}

TEST_CASE("null rejection rates", "[reference][simulation]") {
    RandomStream rng(2025);
    const int reps = 20000;
    int t_rej = 0, w_rej = 0;
    std::vector<double> a(10), b(10);
    for (int r = 0; r < reps; ++r) {
        for (double& v : a) v = rng.normal();
        for (double& v : b) v = rng.normal();
        const SamplePair p(a, b);
        t_rej += t_test(p, 0.05).reject;
        w_rej += welch_test(p, 0.05).reject;
    }
    CHECK(std::fabs(t_rej / double(reps) - 0.05) < 0.005);
    CHECK(std::fabs(w_rej / double(reps) - 0.05) < 0.005);
}

TEST_CASE("classical tests are affine invariant", "[reference][property]") {
    RandomStream rng(9);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<double> a(2 + trial % 15), b(2 + trial % 9);
        for (double& v : a) v = rng.normal();
        for (double& v : b) v = rng.normal(0.5, 1.5);
        const double scale = (rng.uniform() < 0.5 ? -1.0 : 1.0) * std::exp(rng.normal());
        const double shift = rng.normal(0.0, 10.0);
        std::vector<double> a2, b2;
        for (double v : a) a2.push_back(scale * v + shift);
        for (double v : b) b2.push_back(scale * v + shift);
        const SamplePair p(a, b), q(a2, b2);
        CHECK(std::fabs(t_test(p, 0.05).result.p_value - t_test(q, 0.05).result.p_value) < 1e-12);
        CHECK(std::fabs(welch_test(p, 0.05).result.p_value - welch_test(q, 0.05).result.p_value) < 1e-12);
    }
}

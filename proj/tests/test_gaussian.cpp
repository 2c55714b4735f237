#include <doctest.h>

#include <cmath>

#include "bivex/gaussian.hpp"
#include "test_oracles.hpp"

using namespace bivex;

TEST_CASE("std_normal_tail at zero is exactly log(1/2)") {
    CHECK(std_normal_tail(0.0) == doctest::Approx(std::log(0.5)).epsilon(1e-16));
}

TEST_CASE("std_normal_tail(3) matches direct quadrature of the density") {
    // Independent oracle: long-double Simpson of phi over [3, 40].
    long double ref = oracle::adaptive_simpson(
        [](long double z) { return oracle::normal_pdf_ld(z); }, 3.0L, 40.0L, 1e-17L);
    double rel = std::abs(std::expm1(std_normal_tail(3.0) - (double)logl(ref)));
    CHECK(rel < 1e-12);
}

TEST_CASE("std_normal_tail far-tail factor approaches the Mills form") {
    // x * e^{x^2/2} * sqrt(2 pi) * Q(x) = 1 - 1/x^2 + O(x^-4); at x = 8 the
    // deficit is ~1.5%.
    double v = std_normal_tail(8.0);
    double factor = std::exp(v + 32.0 + std::log(8.0 * std::sqrt(2.0 * M_PI)));
    CHECK(std::abs(factor - 1.0) < 0.02);
    CHECK(factor < 1.0);
}

TEST_CASE("std_normal_tail matches erfcl across the double range") {
    for (double x = -8.0; x <= 38.0; x += 0.375) {
        long double ref = oracle::normal_tail_ld(x);
        double rel = std::abs(std::expm1(std_normal_tail(x) - (double)logl(ref)));
        CHECK_MESSAGE(rel < 2e-13, "x = ", x);
    }
}

TEST_CASE("std_normal_tail is continuous across the branch switch") {
    // Both branches against the long-double oracle in a tight window.
    for (double x : {4.997, 4.999, 5.0, 5.001, 5.003}) {
        long double ref = oracle::normal_tail_ld(x);
        double rel = std::abs(std::expm1(std_normal_tail(x) - (double)logl(ref)));
        CHECK(rel < 1e-13);
    }
}

TEST_CASE("std_normal_tail total on finite reals, monotone, NaN passthrough") {
    double prev = std_normal_tail(-40.0);
    for (double x = -39.0; x <= 41.0; x += 1.0) {
        double v = std_normal_tail(x);
        CHECK(v <= 0.0);
        CHECK(v < prev + 1e-300);
        prev = v;
    }
    CHECK(std::isnan(std_normal_tail(std::nan(""))));
    // Far beyond erfc's range the continued fraction still provides the log.
    CHECK(std_normal_tail(100.0) == doctest::Approx(-5005.5241).epsilon(1e-6));
}

TEST_CASE("tail quantile round-trips through the tail") {
    for (double log_q : {-0.8, -2.0, -10.0, -50.0, -200.0, -700.0}) {
        double x = std_normal_tail_quantile(log_q);
        CHECK(std_normal_tail(x) == doctest::Approx(log_q).epsilon(1e-11));
    }
    CHECK_THROWS_AS(std_normal_tail_quantile(-0.1), std::invalid_argument);
}

TEST_CASE("bvn_upper_tail factorizes at rho = 0") {
    double got = bvn_upper_tail(1.0, 2.0, 0.0).log;
    double want = std_normal_tail(1.0) + std_normal_tail(2.0);
    CHECK(std::abs(std::expm1(got - want)) < 1e-12);
}

TEST_CASE("arcsin orthant identity, pre-validated against quadrature") {
    for (double rho : {-0.9, -0.5, 0.25, 0.5, 0.9}) {
        double identity = 0.25 + std::asin(rho) / (2.0 * M_PI);
        long double quad = oracle::bvn_upper_ld(0.0L, 0.0L, rho);
        // The identity itself must agree with the independent quadrature
        // before it may serve as an expected value.
        CHECK(std::abs((double)(quad / identity) - 1.0) < 1e-12);
        double rel = std::abs(std::expm1(bvn_upper_tail(0.0, 0.0, rho).log -
                                         std::log(identity)));
        CHECK_MESSAGE(rel < 1e-10, "rho = ", rho);
    }
}

TEST_CASE("bvn_upper_tail degenerate correlations reduce to one dimension") {
    CHECK(bvn_upper_tail(1.0, 2.0, 1.0).log == std_normal_tail(2.0));
    CHECK(bvn_upper_tail(1.0, 2.0, -1.0).is_zero());
    // P(Z > -2, -Z > -1) = Phi(1) - Phi(-2)
    double want = std::log(0.5 * std::erfc(-1.0 / std::sqrt(2.0)) -
                           0.5 * std::erfc(2.0 / std::sqrt(2.0)));
    CHECK(bvn_upper_tail(-2.0, -1.0, -1.0).log == doctest::Approx(want).epsilon(1e-13));
}

TEST_CASE("bvn_upper_tail matches long-double quadrature at moderate depth") {
    struct Pt {
        double a, b, rho;
    };
    for (Pt p : {Pt{2, 1, 0.5}, Pt{2, 1, -0.5}, Pt{3, 3, 0.8}, Pt{5, 2, -0.7},
                 Pt{-1.5, 0.5, 0.3}, Pt{4, 4, -0.9}, Pt{0.5, 4.5, 0.95}}) {
        long double ref = oracle::bvn_upper_ld(p.a, p.b, p.rho);
        double rel = std::abs(std::expm1(bvn_upper_tail(p.a, p.b, p.rho).log -
                                         (double)logl(ref)));
        CHECK_MESSAGE(rel < 5e-11, "a=", p.a, " b=", p.b, " rho=", p.rho);
    }
}

TEST_CASE("bvn_upper_tail symmetry is exact") {
    for (double rho : {-0.7, 0.0, 0.6}) {
        for (double a : {-1.0, 0.5, 3.0}) {
            for (double b : {-2.0, 1.5, 6.0}) {
                CHECK(bvn_upper_tail(a, b, rho).log == bvn_upper_tail(b, a, rho).log);
            }
        }
    }
}

TEST_CASE("bvn_upper_tail is nonincreasing in each threshold") {
    for (double rho : {-0.9, -0.5, 0.0, 0.5, 0.9}) {
        double prev_row = 0.0;
        for (int i = 0; i < 20; ++i) {
            double a = -2.0 + 0.35 * i;
            double prev = 1.0;
            for (int j = 0; j < 20; ++j) {
                double b = -2.0 + 0.35 * j;
                double v = bvn_upper_tail(a, b, rho).log;
                if (j > 0) CHECK(v <= prev + 1e-12);
                prev = v;
                if (j == 0) {
                    if (i > 0) CHECK(v <= prev_row + 1e-12);
                    prev_row = v;
                }
            }
        }
    }
}

TEST_CASE("bvn_upper_tail collapses to the marginal when one level is -38") {
    for (double a : {-1.0, 0.0, 2.0, 5.0}) {
        for (double rho : {-0.9, -0.3, 0.4, 0.8}) {
            double rel = std::abs(std::expm1(bvn_upper_tail(a, -38.0, rho).log -
                                             std_normal_tail(a)));
            CHECK_MESSAGE(rel < 1e-9, "a=", a, " rho=", rho);
        }
    }
}

TEST_CASE("orthant log-probability approaches the QP rate") {
    // -(1/t^2) log P(Z > (2t,2t)) climbs to the constrained quadratic
    // minimum; the gap at t = 8 is under 0.15 and shrinking in t.
    struct Case {
        double rho, limit;
    };
    for (Case c : {Case{0.0, 4.0}, Case{0.5, 8.0 / 3.0}, Case{-0.5, 8.0}}) {
        double prev_gap = 1e9;
        for (double t : {4.0, 6.0, 8.0}) {
            double rate = -bvn_upper_tail(2.0 * t, 2.0 * t, c.rho).log / (t * t);
            double gap = std::abs(rate - c.limit);
            CHECK(gap < prev_gap);
            prev_gap = gap;
            if (t == 8.0) CHECK(gap < 0.15);
        }
    }
}

TEST_CASE("bvn_upper_tail rejects NaN and out-of-range rho") {
    CHECK_THROWS_AS(bvn_upper_tail(std::nan(""), 0.0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(bvn_upper_tail(0.0, std::nan(""), 0.5), std::invalid_argument);
    CHECK_THROWS_AS(bvn_upper_tail(0.0, 0.0, std::nan("")), std::invalid_argument);
    CHECK_THROWS_AS(bvn_upper_tail(0.0, 0.0, 1.5), std::invalid_argument);
}

TEST_CASE("sample_bvn reproduces the requested correlation") {
    const int n = 1000000;
    for (double rho : {0.0, 0.8}) {
        RngStream rng(2024, 0);
        double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
        for (int i = 0; i < n; ++i) {
            auto [x, y] = sample_bvn(rho, rng);
            sx += x;
            sy += y;
            sxx += x * x;
            syy += y * y;
            sxy += x * y;
        }
        double mx = sx / n, my = sy / n;
        double corr = (sxy / n - mx * my) /
                      std::sqrt((sxx / n - mx * mx) * (syy / n - my * my));
        CHECK_MESSAGE(std::abs(corr - rho) < 0.01, "rho = ", rho);
    }
    RngStream rng(7, 7);
    for (int i = 0; i < 100; ++i) {
        auto [x, y] = sample_bvn(1.0, rng);
        CHECK(std::abs(x - y) <= 1e-15 * std::max(1.0, std::abs(x)));
    }
}

TEST_CASE("correlation structure validates and inverts") {
    CorrelationStructure c(2.0, 0.5, 0.6);
    auto cov = c.covariance();
    auto inv = c.inverse();
    // Sigma * Sigma^{-1} = identity componentwise.
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            double v = cov[i][0] * inv[0][j] + cov[i][1] * inv[1][j];
            CHECK(v == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-12).scale(1.0));
        }
    }
    CHECK_THROWS_AS(CorrelationStructure(0.0, 1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(CorrelationStructure(1.0, 1.0, 1.5), std::invalid_argument);
    CHECK_THROWS_AS(CorrelationStructure(1.0, 1.0, 1.0).inverse(), DegenerateCorrelation);
}

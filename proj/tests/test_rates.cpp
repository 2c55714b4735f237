#include <doctest.h>

#include <cmath>

#include "bivex/rates.hpp"
#include "bivex/rng.hpp"
#include "test_oracles.hpp"

using namespace bivex;

namespace {
const CorrelationStructure kStd05(1.0, 1.0, 0.5);
}

TEST_CASE("orthant_qp closed-form cases") {
    RateResult r = orthant_qp({1.0, 2.0}, CorrelationStructure(1.0, 1.0, 0.0));
    CHECK(r.value == doctest::Approx(2.5).epsilon(1e-15));
    CHECK(r.minimizer1 == 1.0);
    CHECK(r.minimizer2 == 2.0);

    r = orthant_qp({2.0, 2.0}, kStd05);
    CHECK(r.value == doctest::Approx(8.0 / 3.0).epsilon(1e-14));
    CHECK(r.minimizer1 == 2.0);
    CHECK(r.minimizer2 == 2.0);
    CHECK(r.case_label == CaseLabel::InteriorOneIndex);

    r = orthant_qp({2.0, 1.0}, CorrelationStructure(1.0, 1.0, 0.8));
    CHECK(r.value == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(r.minimizer1 == doctest::Approx(2.0));
    CHECK(r.minimizer2 == doctest::Approx(1.6));
    CHECK(r.case_label == CaseLabel::ConeU2);
}

TEST_CASE("orthant_qp handles nonpositive thresholds") {
    RateResult r = orthant_qp({-1.0, -2.0}, kStd05);
    CHECK(r.value == 0.0);
    CHECK(r.minimizer1 == 0.0);
    CHECK(r.minimizer2 == 0.0);
    // Mixed signs against the grid oracle.
    for (double rho : {-0.7, -0.2, 0.4, 0.9}) {
        for (double u1 : {-2.0, -0.5, 1.0}) {
            for (double u2 : {-1.5, 0.75, 2.5}) {
                RateResult got = orthant_qp({u1, u2}, CorrelationStructure(1.0, 1.0, rho));
                double ref = oracle::qp_grid_min(u1, u2, rho);
                CHECK_MESSAGE(std::abs(got.value - ref) < 1e-7, "rho=", rho, " u1=", u1,
                              " u2=", u2);
            }
        }
    }
}

TEST_CASE("orthant_qp equivalence and KKT certificate on random draws") {
    RngStream rng(314, 0);
    for (int k = 0; k < 250; ++k) {
        double rho = -0.95 + 1.9 * rng.next_uniform();
        double u1 = 0.1 + 3.9 * rng.next_uniform();
        double u2 = 0.1 + 3.9 * rng.next_uniform();
        RateResult r = orthant_qp({u1, u2}, CorrelationStructure(1.0, 1.0, rho));
        CHECK(std::abs(r.value - oracle::qp_grid_min(u1, u2, rho)) < 1e-8);

        // Feasibility, objective consistency, and first-order conditions.
        CHECK(r.minimizer1 >= u1 - 1e-12);
        CHECK(r.minimizer2 >= u2 - 1e-12);
        double om = (1.0 - rho) * (1.0 + rho);
        double quad = 0.5 *
                      (r.minimizer1 * r.minimizer1 - 2.0 * rho * r.minimizer1 * r.minimizer2 +
                       r.minimizer2 * r.minimizer2) /
                      om;
        CHECK(std::abs(quad - r.value) < 1e-12 * std::max(1.0, r.value));
        double g1 = (r.minimizer1 - rho * r.minimizer2) / om;
        double g2 = (r.minimizer2 - rho * r.minimizer1) / om;
        if (std::abs(r.minimizer1 - u1) > 1e-10) CHECK(std::abs(g1) < 1e-10);
        else CHECK(g1 > -1e-10);
        if (std::abs(r.minimizer2 - u2) > 1e-10) CHECK(std::abs(g2) < 1e-10);
        else CHECK(g2 > -1e-10);
    }
}

TEST_CASE("orthant_qp requires a nondegenerate correlation") {
    CHECK_THROWS_AS(orthant_qp({1.0, 1.0}, CorrelationStructure(1.0, 1.0, 1.0)),
                    DegenerateCorrelation);
}

TEST_CASE("right_scale_rate branch selection") {
    RateResult r = right_scale_rate({2.0, 2.0}, kStd05);
    CHECK(r.value == doctest::Approx(-5.0 / 3.0).epsilon(1e-14));
    CHECK(r.case_label == CaseLabel::InteriorOneIndex);

    r = right_scale_rate({3.0, 1.6}, CorrelationStructure(1.0, 1.0, 0.9));
    CHECK(r.value == doctest::Approx(-3.5).epsilon(1e-14));
    CHECK(r.case_label == CaseLabel::ConeU2);

    r = right_scale_rate({2.0, 2.0}, CorrelationStructure(1.0, 1.0, 0.0));
    CHECK(r.value == doctest::Approx(-2.0).epsilon(1e-14));
    CHECK(r.case_label == CaseLabel::InteriorTwoIndex);

    CHECK_THROWS_AS(right_scale_rate({1.0, 1.0}, CorrelationStructure(1.0, 1.0, 0.0)),
                    InvalidThreshold);
    CHECK_THROWS_AS(right_scale_rate({2.0, 1.4}, CorrelationStructure(1.0, 1.0, 0.0)),
                    InvalidThreshold);
}

TEST_CASE("right_scale_rate standardizes exactly") {
    CorrelationStructure scaled(2.0, 0.5, 0.5);
    RateResult a = right_scale_rate({4.0, 1.0}, scaled);
    RateResult b = right_scale_rate({4.0 / 2.0, 1.0 / 0.5}, kStd05);
    CHECK(a.value == b.value);
    CHECK(a.case_label == b.case_label);
}

TEST_CASE("large_scale_rate symmetric closed forms") {
    RateResult r = large_scale_rate({1.0, 1.0}, 0.5);
    CHECK(r.value == doctest::Approx(2.0 / 3.0).epsilon(1e-14));  // u^2/(1+rho)
    CHECK(r.case_label == CaseLabel::InteriorOneIndex);

    r = large_scale_rate({1.0, 1.0}, -0.5);
    CHECK(r.value == doctest::Approx(1.0).epsilon(1e-14));  // ||u||^2/2
    CHECK(r.case_label == CaseLabel::InteriorTwoIndex);

    r = large_scale_rate({2.0, 1.0}, 0.8);
    CHECK(r.value == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(r.case_label == CaseLabel::ConeU2);

    // rho = 0 symmetric point: both candidate rates coincide.
    r = large_scale_rate({2.0, 2.0}, 0.0);
    CHECK(r.value == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(r.case_label == CaseLabel::BoundaryTie);

    CHECK_THROWS_AS(large_scale_rate({1.0, -1.0}, 0.5), InvalidThreshold);
}

TEST_CASE("rates are continuous across the cone boundary") {
    for (double rho : {0.3, 0.6, 0.9}) {
        for (double u1 : {2.0, 3.0, 3.5}) {
            double u2 = rho * u1;
            double cone = 0.5 * u1 * u1;
            double mahal = 0.5 * (u1 * u1 - 2.0 * rho * u1 * u2 + u2 * u2) /
                           ((1.0 - rho) * (1.0 + rho));
            CHECK(std::abs(cone - mahal) < 1e-12 * cone);
        }
    }
}

TEST_CASE("monotonicity of the rates in the threshold") {
    for (double rho : {-0.6, 0.0, 0.7}) {
        double prev = 0.0;
        for (int i = 0; i <= 12; ++i) {
            double u = 0.5 + 0.3 * i;
            double v = large_scale_rate({u, 1.1}, rho).value;
            if (i > 0) CHECK(v >= prev - 1e-12);
            prev = v;
        }
        double prev_j = 1.0;
        for (int i = 0; i <= 10; ++i) {
            double u = 1.5 + 0.25 * i;
            double v = right_scale_rate({u, 1.6}, CorrelationStructure(1.0, 1.0, rho)).value;
            if (i > 0) CHECK(v <= prev_j + 1e-12);
            prev_j = v;
        }
    }
}

TEST_CASE("inside the cone the one-index rate dominates on the valid domain") {
    for (double rho : {0.5, 0.7, 0.9}) {
        for (double u1 = 2.9; u1 <= 4.0; u1 += 0.25) {
            for (double u2 = 1.45; u2 <= rho * u1; u2 += 0.2) {
                double j1 = 1.0 - 0.5 * u1 * u1;
                double j2 = 2.0 - 0.5 * (u1 * u1 + u2 * u2);
                CHECK(j2 <= j1 + 1e-12);
            }
        }
    }
}

TEST_CASE("sharp_asymptote constants across the five regimes") {
    // Two-index, asymmetric.
    SharpAsymptote s = sharp_asymptote({2.0, 1.0}, -0.5);
    CHECK(s.b == 2);
    CHECK(s.c == 2);
    CHECK(s.k == doctest::Approx(1.0 / (4.0 * M_PI)).epsilon(1e-14));
    CHECK(s.rate == doctest::Approx(2.5));

    // Two-index, symmetric: same constant, the pair count is not halved.
    s = sharp_asymptote({2.0, 2.0}, -0.5);
    CHECK(s.b == 2);
    CHECK(s.c == 2);
    CHECK(s.k == doctest::Approx(1.0 / (8.0 * M_PI)).epsilon(1e-14));

    // Cone interior: single Mills factor.
    s = sharp_asymptote({2.0, 1.0}, 0.8);
    CHECK(s.b == 1);
    CHECK(s.c == 1);
    CHECK(s.k == doctest::Approx(1.0 / (2.0 * std::sqrt(2.0 * M_PI))).epsilon(1e-14));

    // Cone boundary: conditional clears its level with probability 1/2.
    s = sharp_asymptote({2.0, 1.0}, 0.5);
    CHECK(s.b == 1);
    CHECK(s.c == 1);
    CHECK(s.k == doctest::Approx(0.5 / (2.0 * std::sqrt(2.0 * M_PI))).epsilon(1e-14));

    // Laplace interior.
    s = sharp_asymptote({2.0, 2.0}, 0.5);
    CHECK(s.b == 2);
    CHECK(s.c == 1);
    CHECK(s.k == doctest::Approx(std::pow(0.75, 1.5) / (2.0 * M_PI)).epsilon(1e-14));
    CHECK(s.rate == doctest::Approx(8.0 / 3.0));

    CHECK_THROWS_AS(sharp_asymptote({1.0, 2.0}, 0.5), UnsortedThreshold);
}

TEST_CASE("sharp_asymptote at the exact rate tie reports the two-index row") {
    SharpAsymptote s = sharp_asymptote({2.0, 2.0}, 0.0);
    CHECK(s.case_label == CaseLabel::BoundaryTie);
    CHECK(s.c == 2);
    CHECK(s.k == doctest::Approx(1.0 / (8.0 * M_PI)));
}

TEST_CASE("sharp constants are positive, finite, and consistent with the classifier") {
    for (double rho : {-0.9, -0.4, 0.0, 0.4, 0.9}) {
        for (double u1 : {0.5, 1.0, 2.0, 3.5}) {
            for (double u2 : {0.3, 1.0, 2.0}) {
                if (u2 > u1) continue;
                SharpAsymptote s = sharp_asymptote({u1, u2}, rho);
                CHECK(s.k > 0.0);
                CHECK(std::isfinite(s.k));
                CHECK((s.b == 1 || s.b == 2));
                CHECK((s.c == 1 || s.c == 2));
                Regime regime = classify_regime({u1, u2}, CorrelationStructure(1.0, 1.0, rho),
                                                Scale::Large);
                CHECK((s.c == 2) == (regime != Regime::OneIndexDominant));
            }
        }
    }
}

TEST_CASE("regime classification at both scales") {
    CHECK(classify_regime({2.0, 2.0}, CorrelationStructure(1.0, 1.0, 0.0), Scale::Right) ==
          Regime::TwoIndexDominant);
    CHECK(classify_regime({2.0, 2.0}, kStd05, Scale::Right) == Regime::OneIndexDominant);
    CHECK(classify_regime({2.0, 1.0}, CorrelationStructure(1.0, 1.0, 0.8), Scale::Large) ==
          Regime::OneIndexDominant);
    CHECK(classify_regime({2.0, 1.0}, CorrelationStructure(1.0, 1.0, -0.5), Scale::Large) ==
          Regime::TwoIndexDominant);
    CHECK(classify_regime({2.0, 2.0}, CorrelationStructure(1.0, 1.0, 0.0), Scale::Large) ==
          Regime::Boundary);
}

#include "bivex/rates.hpp"

#include <cmath>

namespace bivex {

std::string_view to_string(CaseLabel c) {
    switch (c) {
        case CaseLabel::ConeU2: return "ConeU2";
        case CaseLabel::ConeU1: return "ConeU1";
        case CaseLabel::InteriorTwoIndex: return "InteriorTwoIndex";
        case CaseLabel::InteriorOneIndex: return "InteriorOneIndex";
        case CaseLabel::BoundaryTie: return "BoundaryTie";
    }
    return "?";
}

std::string_view to_string(Regime r) {
    switch (r) {
        case Regime::TwoIndexDominant: return "TwoIndexDominant";
        case Regime::OneIndexDominant: return "OneIndexDominant";
        case Regime::Boundary: return "Boundary";
    }
    return "?";
}

namespace {

constexpr double kTieTol = 1e-12;

bool tie(double a, double b) {
    return std::abs(a - b) <= kTieTol * std::max({std::abs(a), std::abs(b), 1.0});
}

double mahalanobis(double u1, double u2, double rho) {
    return (u1 * u1 - 2.0 * rho * u1 * u2 + u2 * u2) / ((1.0 - rho) * (1.0 + rho));
}

void require_nondegenerate(double rho) {
    if (std::abs(rho) >= 1.0)
        throw DegenerateCorrelation("operation requires |rho| < 1");
}

}  // namespace

RateResult orthant_qp(Threshold u, const CorrelationStructure& corr) {
    require_nondegenerate(corr.rho());
    double u1 = u.u1 / corr.sigma1();
    double u2 = u.u2 / corr.sigma2();
    double rho = corr.rho();
    if (!std::isfinite(u1) || !std::isfinite(u2))
        throw std::invalid_argument("orthant_qp: threshold must be finite");

    if (u1 <= 0.0 && u2 <= 0.0)
        return {0.0, CaseLabel::InteriorOneIndex, std::max(u1, 0.0), std::max(u2, 0.0)};
    if (u1 >= 0.0 && u2 <= rho * u1)
        return {0.5 * u1 * u1, CaseLabel::ConeU2, u1, rho * u1};
    if (u2 >= 0.0 && u1 <= rho * u2)
        return {0.5 * u2 * u2, CaseLabel::ConeU1, rho * u2, u2};
    return {0.5 * mahalanobis(u1, u2, rho), CaseLabel::InteriorOneIndex, u1, u2};
}

RateResult right_scale_rate(Threshold u, const CorrelationStructure& corr) {
    require_nondegenerate(corr.rho());
    if (!u.valid_right_scale(corr))
        throw InvalidThreshold("right-scale rate requires u > sqrt(2)*sigma componentwise");
    double u1 = u.u1 / corr.sigma1();
    double u2 = u.u2 / corr.sigma2();
    double rho = corr.rho();

    RateResult qp = orthant_qp({u1, u2}, CorrelationStructure(1.0, 1.0, rho));
    double j1 = 1.0 - qp.value;
    if (qp.case_label == CaseLabel::ConeU2 || qp.case_label == CaseLabel::ConeU1)
        return {j1, qp.case_label, qp.minimizer1, qp.minimizer2};

    double j2 = 2.0 - 0.5 * (u1 * u1 + u2 * u2);
    if (tie(j1, j2)) return {j1, CaseLabel::BoundaryTie, qp.minimizer1, qp.minimizer2};
    if (j2 > j1) return {j2, CaseLabel::InteriorTwoIndex, qp.minimizer1, qp.minimizer2};
    return {j1, CaseLabel::InteriorOneIndex, qp.minimizer1, qp.minimizer2};
}

RateResult large_scale_rate(Threshold u, double rho) {
    require_nondegenerate(rho);
    if (!(u.u1 > 0.0) || !(u.u2 > 0.0))
        throw InvalidThreshold("large-scale rate requires u > 0 componentwise");

    RateResult qp = orthant_qp(u, CorrelationStructure(1.0, 1.0, rho));
    if (qp.case_label == CaseLabel::ConeU2 || qp.case_label == CaseLabel::ConeU1)
        return qp;

    double two_index = 0.5 * (u.u1 * u.u1 + u.u2 * u.u2);
    if (tie(two_index, qp.value))
        return {qp.value, CaseLabel::BoundaryTie, qp.minimizer1, qp.minimizer2};
    if (two_index < qp.value)
        return {two_index, CaseLabel::InteriorTwoIndex, qp.minimizer1, qp.minimizer2};
    return qp;
}

SharpAsymptote sharp_asymptote(Threshold u, double rho) {
    require_nondegenerate(rho);
    if (u.u2 > u.u1)
        throw UnsortedThreshold("sharp asymptote requires u2 <= u1");
    RateResult rate = large_scale_rate(u, rho);

    SharpAsymptote out;
    out.rate = rate.value;
    out.case_label = rate.case_label;
    out.b = 1 + (u.u2 > rho * u.u1 && !tie(u.u2, rho * u.u1) ? 1 : 0);
    bool two_index = rate.case_label == CaseLabel::InteriorTwoIndex ||
                     rate.case_label == CaseLabel::BoundaryTie;
    out.c = two_index ? 2 : 1;

    if (two_index) {
        out.k = 1.0 / (2.0 * M_PI * u.u1 * u.u2);
    } else if (tie(u.u2, rho * u.u1)) {
        // Cone boundary: the conditional second coordinate clears its level
        // with limiting probability 1/2.
        out.k = 0.5 / (std::sqrt(2.0 * M_PI) * u.u1);
        out.b = 1;
    } else if (u.u2 < rho * u.u1) {
        out.k = 1.0 / (std::sqrt(2.0 * M_PI) * u.u1);
    } else {
        double om = (1.0 - rho) * (1.0 + rho);
        out.k = om * std::sqrt(om) /
                (2.0 * M_PI * (u.u1 - rho * u.u2) * (u.u2 - rho * u.u1));
    }
    return out;
}

Regime classify_regime(Threshold u, const CorrelationStructure& corr, Scale scale) {
    if (scale == Scale::Right) {
        RateResult r = right_scale_rate(u, corr);
        switch (r.case_label) {
            case CaseLabel::InteriorTwoIndex: return Regime::TwoIndexDominant;
            case CaseLabel::BoundaryTie: return Regime::Boundary;
            default: return Regime::OneIndexDominant;
        }
    }
    double u1 = u.u1 / corr.sigma1();
    double u2 = u.u2 / corr.sigma2();
    RateResult r = large_scale_rate({u1, u2}, corr.rho());
    switch (r.case_label) {
        case CaseLabel::InteriorTwoIndex: return Regime::TwoIndexDominant;
        case CaseLabel::BoundaryTie: return Regime::Boundary;
        default: return Regime::OneIndexDominant;
    }
}

}  // namespace bivex

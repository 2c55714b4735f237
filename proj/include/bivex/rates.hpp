#pragma once

#include <stdexcept>
#include <string_view>

#include "bivex/gaussian.hpp"

namespace bivex {

struct InvalidThreshold : std::domain_error {
    using std::domain_error::domain_error;
};
struct UnsortedThreshold : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Tail level vector, in the same units as the Gaussian coordinates.
struct Threshold {
    double u1 = 0.0;
    double u2 = 0.0;

    Threshold sorted() const { return u1 >= u2 ? *this : Threshold{u2, u1}; }
    /// Right-scale formulas require u > sqrt(2)*sigma componentwise.
    bool valid_right_scale(const CorrelationStructure& corr) const {
        return u1 > M_SQRT2 * corr.sigma1() && u2 > M_SQRT2 * corr.sigma2();
    }
};

/// Which branch of a rate formula produced the value.
enum class CaseLabel {
    ConeU2,            // u2 <= rho * u1: one-index, second coordinate rides along
    ConeU1,            // u1 <= rho * u2
    InteriorTwoIndex,  // two distinct sample indices dominate
    InteriorOneIndex,  // a single sample index dominates
    BoundaryTie,       // competing branches agree to tolerance
};
std::string_view to_string(CaseLabel c);

enum class Regime { TwoIndexDominant, OneIndexDominant, Boundary };
std::string_view to_string(Regime r);

enum class Scale { Right, Large };

struct RateResult {
    double value = 0.0;
    CaseLabel case_label = CaseLabel::InteriorOneIndex;
    double minimizer1 = 0.0;
    double minimizer2 = 0.0;
};

/// Constants of the refined tail limit a^b * n^{-c} * e^{a^2 rate} * P -> k.
struct SharpAsymptote {
    int b = 1;
    int c = 1;
    double k = 0.0;
    double rate = 0.0;
    CaseLabel case_label = CaseLabel::InteriorOneIndex;
};

/// Minimum of (1/2) x^T Sigma^{-1} x over x >= u, with its minimizer.
/// Inputs are standardized by the marginal sigmas first. Closed form by the
/// KKT case split: two cone cases, the corner, and the trivial x* = 0 case
/// when u <= 0. Throws DegenerateCorrelation when |rho| = 1.
RateResult orthant_qp(Threshold u, const CorrelationStructure& corr);

/// Rate of the componentwise-max tail at the a_n = sqrt(log n) scale
/// (log P / log n limit). Requires u > sqrt(2)*sigma componentwise, else
/// throws InvalidThreshold; |rho| < 1.
RateResult right_scale_rate(Threshold u, const CorrelationStructure& corr);

/// Rate of the tail at scales a_n >> sqrt(log n), for standardized u > 0.
RateResult large_scale_rate(Threshold u, double rho);

/// Sharp-limit constants (b, c, k) for standardized, sorted u (u2 <= u1).
/// Throws UnsortedThreshold when u2 > u1. At the exact rate tie the
/// two-index constant is reported with a BoundaryTie label; no sharp limit
/// is claimed there.
SharpAsymptote sharp_asymptote(Threshold u, double rho);

/// Whether the tail event is dominated by two distinct indices or one.
Regime classify_regime(Threshold u, const CorrelationStructure& corr, Scale scale);

}  // namespace bivex

#pragma once

#include "bivex/rates.hpp"

namespace bivex {

struct RegimeViolation : std::domain_error {
    using std::domain_error::domain_error;
};

/// The pair (n, a_n). n may be far beyond 2^64, so it is carried as log n;
/// every formula downstream is smooth in log n.
struct ScalingSequence {
    enum class Kind { RightScale, LargeScale, Explicit };
    Kind kind = Kind::Explicit;
    double log_n = 0.0;
    double a_n = 1.0;

    static ScalingSequence right(double log_n) {
        return {Kind::RightScale, log_n, std::sqrt(log_n)};
    }
    /// Requires a_n^2 > log n strictly.
    static ScalingSequence large(double log_n, double a_n) {
        if (!(a_n * a_n > log_n))
            throw RegimeViolation("large scale requires a_n^2 > log n");
        return {Kind::LargeScale, log_n, a_n};
    }
    static ScalingSequence explicit_scale(double log_n, double a_n) {
        return {Kind::Explicit, log_n, a_n};
    }
};

inline double log_count(double n) { return std::log(n); }

struct ExactTail {
    LogProb log_prob;
    /// Set when the independent expm1-form evaluation disagrees with the
    /// primary decomposition by more than 1e-6 in log (diagnostic, not fatal).
    bool precision_loss = false;
};

/// log P(componentwise max over n draws exceeds v), exact up to floating
/// error and quadrature error in the orthant probabilities. Evaluated through
/// the cell decomposition
///   T = P(some draw exceeds both coordinates)
///     + P(none does) * P(some draw exceeds only coord 1 and another only coord 2),
/// whose two contributions are sums of nonnegative terms in log space, so the
/// result is stable from n = 1 up to log n ~ hundreds and tails ~ e^{-5000}.
ExactTail exact_max_tail(double log_n, Threshold v, double rho);

/// log P(exists i <= n with draw i exceeding both coordinates of v)
///   = log(1 - (1 - q12)^n), stable for n*q12 down to ~1e-300 in log form.
LogProb any_single_draw_tail(double log_n, Threshold v, double rho);

/// The inclusion-exclusion pieces of the tail at level a_n * u.
struct TailDecomposition {
    LogProb log_t;           // exact tail
    LogProb log_s_unequal;   // n(n-1) q1 q2, distinct-index pair sum
    LogProb log_s_equal;     // n q12, same-index sum
    LogProb log_e_n;         // upper bound on the second-order error term
    bool precision_loss = false;
};

/// Computes the decomposition at level v = a_n * u (u sorted internally so
/// u2 <= u1). Scaling must be LargeScale or Explicit.
TailDecomposition tail_decomposition(const ScalingSequence& scaling, Threshold u, double rho);

/// Upper bound on the inclusion-exclusion error term e_n(u), from the pair
/// intersection taxonomy with crude n^2/n^3/n^4 counts:
///   shared-pair patterns        n^2 q12^2
///   diagonal-adjacent patterns  n^2 q12 (q1 + q2)
///   three-index chains          3 n^3 q12 q1 q2 + n^3 q1 q2 (q1 + q2)
///   disjoint pairs              n^4 (q1 q2)^2
LogProb error_term_bound(const ScalingSequence& scaling, Threshold u, double rho);

/// a_n^b n^{-c} e^{a_n^2 I} P(max > a_n u), which converges to the sharp
/// constant k. All arithmetic in log space until the final exponentiation.
double sharp_ratio(const ScalingSequence& scaling, Threshold u, double rho);

/// 2 pi a_n^2 exp(a_n^2 Mahalanobis/2) P(Z > a_n u); converges to
/// (1-rho^2) / ((u1 - rho u2)(u2 - rho u1)). Requires rho*u1 < u2 <= u1.
double laplace_prefactor(double a_n, Threshold u, double rho);

}  // namespace bivex

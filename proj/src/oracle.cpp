#include "bivex/oracle.hpp"

#include <algorithm>
#include <cmath>

namespace bivex {

namespace {

// log(n-1) from log n, exact for huge n.
double log_n_minus_1(double log_n) {
    return log_n + std::log1p(-std::exp(-log_n));
}

// log(log1p(w)) given log w, for w >= 0.
double log_log1p_from_log(double log_w) {
    if (log_w < -36.0) return log_w;
    if (log_w > 700.0) return std::log(log_w);
    return std::log(std::log1p(std::exp(log_w)));
}

// Probability that among n multinomial draws at least one lands in cell x and
// at least one in cell y, with per-draw cell log-probabilities log_x, log_y
// and remainder cell log_delta (log(1-x-y), supplied by the caller from a
// cancellation-free source). Exact two-term positive decomposition:
//   W = (1-e^{-sx})(1-e^{-sy}) - e^{-(sx+sy)}(1-e^{-t}),  s* = -n log(1-*),
//   t = n log(1 + xy/(1-x-y)),
// where the subtracted term is at most half the first (ratio ~ 1/n), so the
// final difference costs at most one bit.
double log_w_two_cells(double log_x, double log_y, double log_delta, double log_n) {
    log_x = std::min(log_x, -1e-16);
    log_y = std::min(log_y, -1e-16);
    double log_sx = log_n + log_neg_log1p_neg(log_x);
    double log_sy = log_n + log_neg_log1p_neg(log_y);
    double log_a = log1m_exp_neg_from_log(log_sx) + log1m_exp_neg_from_log(log_sy);

    double log_t = log_n + log_log1p_from_log(log_x + log_y - log_delta);
    double log_b = -(std::exp(log_sx) + std::exp(log_sy)) + log1m_exp_neg_from_log(log_t);

    return log_sub(log_a, log_b);
}

struct Orthants {
    double lq12;        // log P(Z1 > v1, Z2 > v2)
    double l_only1;     // log P(Z1 > v1, Z2 <= v2)
    double l_only2;     // log P(Z2 > v2, Z1 <= v1)
    double l_neither;   // log P(Z1 <= v1, Z2 <= v2)
    double log_1m_q12;  // log(1 - q12), accurate on both sides of q12 = 1/2
};

// All four quadrant cells as orthant integrals of reflected pairs; avoids
// every cancelling subtraction between nearly equal tail probabilities.
Orthants quadrant_cells(Threshold v, double rho) {
    Orthants o;
    o.lq12 = bvn_upper_tail(v.u1, v.u2, rho).log;
    o.l_only1 = bvn_upper_tail(v.u1, -v.u2, -rho).log;
    o.l_only2 = bvn_upper_tail(v.u2, -v.u1, -rho).log;
    o.l_neither = bvn_upper_tail(-v.u1, -v.u2, rho).log;
    if (o.lq12 > -M_LN2) {
        double cells[3] = {o.l_only1, o.l_only2, o.l_neither};
        o.log_1m_q12 = std::min(0.0, log_sum(cells));
    } else {
        o.log_1m_q12 = std::log1p(-std::exp(o.lq12));
    }
    return o;
}

// log(1 - (1-q12)^n) and log((1-q12)^n) from the robust pieces.
struct JointPow {
    double log_at_least_one;
    double log_none;
};

JointPow joint_exceedance_pow(const Orthants& o, double log_n) {
    double log_rate;  // log(-n log(1-q12))
    if (o.lq12 < -36.0)
        log_rate = log_n + o.lq12;
    else
        log_rate = log_n + std::log(-o.log_1m_q12);
    return {log1m_exp_neg_from_log(log_rate), -std::exp(log_rate)};
}

}  // namespace

ExactTail exact_max_tail(double log_n, Threshold v, double rho) {
    if (!(log_n >= 0.0))
        throw std::invalid_argument("exact_max_tail: log n must be >= 0");
    Orthants o = quadrant_cells(v, rho);
    if (log_n == 0.0) return {LogProb{o.lq12}, false};

    double log_alpha = o.l_only1 - o.log_1m_q12;
    double log_beta = o.l_only2 - o.log_1m_q12;
    double log_delta = o.l_neither - o.log_1m_q12;

    JointPow joint = joint_exceedance_pow(o, log_n);
    double term_split =
        joint.log_none + log_w_two_cells(log_alpha, log_beta, log_delta, log_n);
    double log_t = std::min(0.0, log_add(joint.log_at_least_one, term_split));

    // Cross-check against the direct expm1/log1p evaluation where that form is
    // representable; disagreement beyond its cancellation allowance flags
    // precision loss in either path (diagnostic only).
    bool precision_loss = false;
    double n = std::exp(log_n);
    if (n <= 1e15) {
        double q1 = std::exp(std_normal_tail(v.u1));
        double q2 = std::exp(std_normal_tail(v.u2));
        double q12 = std::exp(o.lq12);
        if (n * std::max(q1, q2) >= 1e-4 && q2 < 1.0) {
            double a = -std::expm1(n * std::log1p(-q1));
            double c = std::exp(n * std::log1p(-q2)) *
                       std::expm1(n * std::log1p(-(q1 - q12) / (1.0 - q2)));
            double t_direct = a + c;
            if (t_direct > 0.0 && std::isfinite(t_direct)) {
                double cancel = n * std::max(q1, q2) / t_direct;
                double allowance = std::max(1e-6, 1e-11 * cancel);
                if (std::abs(std::log(t_direct) - log_t) > allowance)
                    precision_loss = true;
            }
        }
    }
    return {LogProb{log_t}, precision_loss};
}

LogProb any_single_draw_tail(double log_n, Threshold v, double rho) {
    if (!(log_n >= 0.0))
        throw std::invalid_argument("any_single_draw_tail: log n must be >= 0");
    Orthants o = quadrant_cells(v, rho);
    if (log_n == 0.0) return LogProb{o.lq12};
    return LogProb{joint_exceedance_pow(o, log_n).log_at_least_one};
}

TailDecomposition tail_decomposition(const ScalingSequence& scaling, Threshold u, double rho) {
    if (scaling.kind == ScalingSequence::Kind::RightScale)
        throw RegimeViolation("tail decomposition expects LargeScale or Explicit scaling");
    Threshold s = u.sorted();
    double a_n = scaling.a_n, log_n = scaling.log_n;
    Threshold v{a_n * s.u1, a_n * s.u2};

    double lq1 = std_normal_tail(v.u1);
    double lq2 = std_normal_tail(v.u2);
    double lq12 = bvn_upper_tail(v.u1, v.u2, rho).log;

    TailDecomposition out;
    out.log_s_unequal = LogProb{log_n + log_n_minus_1(log_n) + lq1 + lq2};
    out.log_s_equal = LogProb{log_n + lq12};
    ExactTail t = exact_max_tail(log_n, v, rho);
    out.log_t = t.log_prob;
    out.precision_loss = t.precision_loss;
    out.log_e_n = error_term_bound(scaling, u, rho);
    return out;
}

LogProb error_term_bound(const ScalingSequence& scaling, Threshold u, double rho) {
    Threshold s = u.sorted();
    double a_n = scaling.a_n, log_n = scaling.log_n;
    if (log_n == 0.0) return LogProb::zero();  // no distinct event pairs
    Threshold v{a_n * s.u1, a_n * s.u2};

    double lq1 = std_normal_tail(v.u1);
    double lq2 = std_normal_tail(v.u2);
    double lq12 = bvn_upper_tail(v.u1, v.u2, rho).log;
    double lq_sum = log_add(lq1, lq2);

    // Pair-intersection taxonomy with crude counts; each line upper-bounds
    // the corresponding family of event pairs:
    //   reversed/diagonal pairs (i,j),(j,i) and (i,i),(j,j):  n^2 q12^2
    //   diagonal-adjacent (i,i),(i,j) and mirrors:            n^2 q12 (q1+q2)
    //   three-index chains through a joint draw:              3 n^3 q12 q1 q2
    //   three-index same-slot shares:                         n^3 q1 q2 (q1+q2)
    //   fully disjoint pairs:                                 n^4 (q1 q2)^2
    double terms[5] = {
        2.0 * log_n + 2.0 * lq12,
        2.0 * log_n + lq12 + lq_sum,
        std::log(3.0) + 3.0 * log_n + lq12 + lq1 + lq2,
        3.0 * log_n + lq1 + lq2 + lq_sum,
        4.0 * log_n + 2.0 * (lq1 + lq2),
    };
    return LogProb{log_sum(terms)};
}

double sharp_ratio(const ScalingSequence& scaling, Threshold u, double rho) {
    Threshold s = u.sorted();
    SharpAsymptote sharp = sharp_asymptote(s, rho);
    ExactTail t =
        exact_max_tail(scaling.log_n, {scaling.a_n * s.u1, scaling.a_n * s.u2}, rho);
    double log_ratio = sharp.b * std::log(scaling.a_n) - sharp.c * scaling.log_n +
                       scaling.a_n * scaling.a_n * sharp.rate + t.log_prob.log;
    return std::exp(log_ratio);
}

double laplace_prefactor(double a_n, Threshold u, double rho) {
    if (!(rho * u.u1 < u.u2 && u.u2 <= u.u1))
        throw RegimeViolation("laplace prefactor requires rho*u1 < u2 <= u1");
    double mahal = (u.u1 * u.u1 - 2.0 * rho * u.u1 * u.u2 + u.u2 * u.u2) /
                   ((1.0 - rho) * (1.0 + rho));
    double lq12 = bvn_upper_tail(a_n * u.u1, a_n * u.u2, rho).log;
    return 2.0 * M_PI * a_n * a_n * std::exp(0.5 * a_n * a_n * mahal + lq12);
}

}  // namespace bivex

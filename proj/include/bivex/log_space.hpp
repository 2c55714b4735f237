#pragma once

#include <cmath>
#include <limits>
#include <span>

namespace bivex {

/// Natural log of a probability. log(0) is represented by -infinity.
struct LogProb {
    double log = -std::numeric_limits<double>::infinity();

    LogProb() = default;
    explicit LogProb(double log_value) : log(log_value) {}

    static LogProb zero() { return LogProb{}; }
    static LogProb one() { return LogProb{0.0}; }
    static LogProb from_prob(double p) { return LogProb{std::log(p)}; }

    double prob() const { return std::exp(log); }
    bool is_zero() const { return std::isinf(log) && log < 0; }
};

inline constexpr double kLog2Pi = 1.8378770664093454835606594728112353;
inline constexpr double kLogSqrt2Pi = 0.91893853320467274178032973640561764;

/// log(e^a + e^b), tolerant of -inf operands.
inline double log_add(double a, double b) {
    if (a < b) std::swap(a, b);
    if (std::isinf(b) && b < 0) return a;
    return a + std::log1p(std::exp(b - a));
}

/// log(e^a - e^b); requires a >= b. Returns -inf on exact cancellation.
inline double log_sub(double a, double b) {
    if (std::isinf(b) && b < 0) return a;
    double d = b - a;
    if (d >= 0) return -std::numeric_limits<double>::infinity();
    return a + std::log1p(-std::exp(d));
}

/// log sum over a fixed-order sequence of log values.
inline double log_sum(std::span<const double> logs) {
    double m = -std::numeric_limits<double>::infinity();
    for (double v : logs) m = std::max(m, v);
    if (std::isinf(m)) return m;
    double s = 0.0;
    for (double v : logs) s += std::exp(v - m);
    return m + std::log(s);
}

/// log(1 - e^{-s}) given log(s), valid over the full double range of s > 0.
inline double log1m_exp_neg_from_log(double log_s) {
    if (log_s < -37.0) return log_s + std::log1p(-0.5 * std::exp(log_s));
    double s = std::exp(log_s);
    if (s > 745.0) return 0.0;
    return std::log(-std::expm1(-s));
}

/// log(-log(1-q)) given log(q) for q in [0,1).
inline double log_neg_log1p_neg(double log_q) {
    if (log_q < -36.0) return log_q;  // -log(1-q) = q to machine precision
    double q = std::exp(log_q);
    return std::log(-std::log1p(-q));
}

/// log(1 - (1-q)^n) for q = e^{log_q}, n = e^{log_n}; stable down to nq ~ 1e-300.
inline double log_one_minus_pow(double log_q, double log_n) {
    if (log_q >= 0.0) return 0.0;  // q == 1
    double log_s = log_n + log_neg_log1p_neg(log_q);  // s = -n log(1-q)
    return log1m_exp_neg_from_log(log_s);
}

/// Exact split x*x = hi + lo (hi = rounded product), via FMA.
inline void two_prod(double x, double y, double& hi, double& lo) {
    hi = x * y;
    lo = std::fma(x, y, -hi);
}

/// Compensated sum of a small fixed set of terms (Neumaier).
class CompensatedSum {
  public:
    void add(double x) {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            c_ += (sum_ - t) + x;
        else
            c_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + c_; }

  private:
    double sum_ = 0.0;
    double c_ = 0.0;
};

}  // namespace bivex

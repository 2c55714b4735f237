#include "bivex/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace bivex {

CorrelationStructure::CorrelationStructure(double sigma1, double sigma2, double rho)
    : sigma1_(sigma1), sigma2_(sigma2), rho_(rho) {
    if (!(sigma1 > 0.0) || !std::isfinite(sigma1) || !(sigma2 > 0.0) || !std::isfinite(sigma2))
        throw std::invalid_argument("CorrelationStructure: sigma must be positive and finite");
    if (!(std::abs(rho) <= 1.0))
        throw std::invalid_argument("CorrelationStructure: rho must lie in [-1, 1]");
}

std::array<std::array<double, 2>, 2> CorrelationStructure::covariance() const {
    double c = rho_ * sigma1_ * sigma2_;
    return {{{sigma1_ * sigma1_, c}, {c, sigma2_ * sigma2_}}};
}

std::array<std::array<double, 2>, 2> CorrelationStructure::inverse() const {
    if (degenerate())
        throw DegenerateCorrelation("covariance is singular at |rho| = 1");
    double det = (1.0 - rho_) * (1.0 + rho_) * sigma1_ * sigma1_ * sigma2_ * sigma2_;
    return {{{sigma2_ * sigma2_ / det, -rho_ * sigma1_ * sigma2_ / det},
             {-rho_ * sigma1_ * sigma2_ / det, sigma1_ * sigma1_ / det}}};
}

namespace {

// Mills continued fraction: x * Q(x)/phi(x) = x / (x + 1/(x + 2/(x + 3/(...)))).
// Modified Lentz evaluation of f = x + 1/(x + 2/(x + ...)).
double mills_cf_denominator(double x) {
    const double tiny = 1e-300;
    double f = x;
    double c = f, d = 0.0;
    for (int k = 1; k <= 400; ++k) {
        double a = static_cast<double>(k);
        d = x + a * d;
        if (d == 0.0) d = tiny;
        d = 1.0 / d;
        c = x + a / c;
        if (c == 0.0) c = tiny;
        double delta = c * d;
        f *= delta;
        if (std::abs(delta - 1.0) < 1e-17) break;
    }
    return f;
}

// log Q(x) for x >= 5 via the continued fraction, with compensated x^2/2.
double log_tail_far(double x) {
    if (x > 1.3e154) return -std::numeric_limits<double>::infinity();
    double hi, lo;
    two_prod(x, x, hi, lo);
    CompensatedSum s;
    s.add(-0.5 * hi);
    s.add(-std::log(mills_cf_denominator(x)));
    s.add(-kLogSqrt2Pi);
    s.add(-0.5 * lo);
    return s.value();
}

}  // namespace

double std_normal_tail(double x) {
    if (std::isnan(x)) return x;
    if (x > 5.0) return log_tail_far(x);
    if (x < -5.0) {
        // 1 - Q(-x) with Q(-x) far below 1; absolute log error is negligible.
        return std::log1p(-std::exp(log_tail_far(-x)));
    }
    return std::min(0.0, std::log(0.5 * std::erfc(x * M_SQRT1_2)));
}

double std_normal_log_pdf(double x) {
    double hi, lo;
    two_prod(x, x, hi, lo);
    CompensatedSum s;
    s.add(-0.5 * hi);
    s.add(-kLogSqrt2Pi);
    s.add(-0.5 * lo);
    return s.value();
}

double std_normal_tail_quantile(double log_q) {
    if (!(log_q < -M_LN2))
        throw std::invalid_argument("std_normal_tail_quantile: requires log_q < log(1/2)");
    double t = -log_q;
    // Asymptotic initial guess from log Q(x) ~ -x^2/2 - log(x sqrt(2 pi)).
    double x = std::sqrt(std::max(2.0 * t - kLog2Pi, 0.25));
    for (int i = 0; i < 3; ++i)
        x = std::sqrt(std::max(2.0 * (t - std::log(x) - kLogSqrt2Pi), 0.04));
    double lo = 0.0, hi = x + 3.0;
    while (std_normal_tail(hi) > log_q) hi += 5.0;
    x = std::clamp(x, lo, hi);
    for (int i = 0; i < 60; ++i) {
        double f = std_normal_tail(x) - log_q;
        if (f > 0)
            lo = x;
        else
            hi = x;
        double hazard = std::exp(std_normal_log_pdf(x) - std_normal_tail(x));
        double step = f / hazard;
        double xn = x + step;
        if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
        if (std::abs(xn - x) < 1e-15 * (1.0 + std::abs(x))) return xn;
        x = xn;
    }
    return x;
}

namespace {

// Gauss(7)-Kronrod(15) nodes and weights on [-1, 1].
constexpr int kGkN = 15;
constexpr double kGkNode[kGkN] = {
    -0.9914553711208126, -0.9491079123427585, -0.8648644233597691, -0.7415311855993944,
    -0.5860872354676911, -0.4058451513773972, -0.2077849550078985, 0.0,
    0.2077849550078985,  0.4058451513773972,  0.5860872354676911,  0.7415311855993944,
    0.8648644233597691,  0.9491079123427585,  0.9914553711208126};
constexpr double kGkWeight[kGkN] = {
    0.02293532201052922, 0.06309209262997855, 0.1047900103222502, 0.1406532597155259,
    0.1690047266392679,  0.1903505780647854,  0.2044329400752989, 0.2094821410847278,
    0.2044329400752989,  0.1903505780647854,  0.1690047266392679, 0.1406532597155259,
    0.1047900103222502,  0.06309209262997855, 0.02293532201052922};
constexpr double kGaussWeight[7] = {
    0.1294849661688697, 0.2797053914892766, 0.3818300505051189, 0.4179591836734694,
    0.3818300505051189, 0.2797053914892766, 0.1294849661688697};

struct Panel {
    double a, b;
    int depth;
};

// Integrates f >= 0 over [a, b] by adaptive Gauss-Kronrod bisection.
// Panels are accumulated left to right so the result is deterministic.
// `noise_rel` is the relative evaluation noise of f; error estimates below
// that level are rounding jitter, and recursing into them never converges.
template <typename F>
double adaptive_gk(F&& f, double a, double b, double rel_tol, double noise_rel) {
    const int initial = 16;
    // Coarse pass to fix the error budget scale.
    double coarse = 0.0;
    for (int i = 0; i < initial; ++i) {
        double pa = a + (b - a) * i / initial;
        double pb = a + (b - a) * (i + 1) / initial;
        double h = 0.5 * (pb - pa), m = 0.5 * (pa + pb);
        for (int k = 0; k < kGkN; ++k) coarse += h * kGkWeight[k] * f(m + h * kGkNode[k]);
    }
    double budget = rel_tol * std::max(coarse, 1e-300);

    double total = 0.0;
    long panels = 0;
    std::vector<Panel> stack;
    for (int i = initial - 1; i >= 0; --i)
        stack.push_back({a + (b - a) * i / initial, a + (b - a) * (i + 1) / initial, 0});
    while (!stack.empty()) {
        Panel p = stack.back();
        stack.pop_back();
        double h = 0.5 * (p.b - p.a), m = 0.5 * (p.a + p.b);
        double k15 = 0.0, g7 = 0.0;
        for (int k = 0; k < kGkN; ++k) {
            double v = f(m + h * kGkNode[k]);
            k15 += h * kGkWeight[k] * v;
            if (k % 2 == 1) g7 += h * kGaussWeight[k / 2] * v;
        }
        double err = std::abs(k15 - g7);
        double local_budget = std::max(budget * (p.b - p.a) / (b - a),
                                       noise_rel * std::abs(k15));
        bool width_floor = p.b - p.a <= 1e-13 * (1.0 + std::abs(p.a));
        if (err <= local_budget || width_floor || p.depth >= 40 || ++panels > 20000) {
            total += k15;
        } else {
            stack.push_back({m, p.b, p.depth + 1});
            stack.push_back({p.a, m, p.depth + 1});
        }
    }
    return total;
}

}  // namespace

LogProb bvn_upper_tail(double a, double b, double rho) {
    if (std::isnan(a) || std::isnan(b) || std::isnan(rho))
        throw std::invalid_argument("bvn_upper_tail: NaN input");
    if (!(std::abs(rho) <= 1.0))
        throw std::invalid_argument("bvn_upper_tail: rho outside [-1, 1]");

    double hi = std::max(a, b), lo = std::min(a, b);
    if (std::isinf(hi) && hi > 0) return LogProb::zero();
    if (std::isinf(lo) && lo < 0) return LogProb{std_normal_tail(hi)};

    if (rho == 1.0) return LogProb{std_normal_tail(hi)};
    if (rho == -1.0) {
        // Event reduces to {hi < Z < -lo}.
        if (hi + lo < 0.0)
            return LogProb{log_sub(std_normal_tail(hi), std_normal_tail(-lo))};
        return LogProb::zero();
    }

    double s = std::sqrt((1.0 - rho) * (1.0 + rho));
    auto log_h = [&](double z) {
        return std_normal_log_pdf(z) + std_normal_tail((lo - rho * z) / s);
    };
    auto dlog_h = [&](double z) {
        double c = (lo - rho * z) / s;
        double hazard = std::exp(std_normal_log_pdf(c) - std_normal_tail(c));
        return -z + (rho / s) * hazard;
    };

    // log h is strictly concave; locate its peak on [hi, inf).
    double z_peak = hi;
    if (dlog_h(hi) > 0.0) {
        double step = 1.0, z_up = hi + step;
        while (dlog_h(z_up) > 0.0 && step < 1e8) {
            step *= 2.0;
            z_up += step;
        }
        double zl = hi, zr = z_up;
        for (int i = 0; i < 200; ++i) {
            double zm = 0.5 * (zl + zr);
            if (dlog_h(zm) > 0.0)
                zl = zm;
            else
                zr = zm;
            if (zr - zl < 1e-14 * (1.0 + std::abs(zl))) break;
        }
        z_peak = 0.5 * (zl + zr);
    }
    double l_peak = log_h(z_peak);
    if (std::isinf(l_peak)) return LogProb::zero();

    // Truncation point: 46 log-units below the peak bounds the discarded
    // mass at ~1e-20 of the total (the tail decays at least exponentially).
    double z_end = std::max(z_peak, hi);
    double step = 0.5;
    while (log_h(z_end) > l_peak - 46.0) {
        z_end += step;
        step *= 1.4;
        if (step > 1e12) break;
    }

    auto g = [&](double z) { return std::exp(log_h(z) - l_peak); };
    // Each evaluation of log h rounds at the scale of its largest component,
    // so g carries relative jitter ~ eps * (|l_peak| + window depth).
    double noise_rel = 1e-15 + 2.3e-16 * (std::abs(l_peak) + 55.0);
    double integral = adaptive_gk(g, hi, z_end, 1e-14, noise_rel);
    if (integral <= 0.0) return LogProb::zero();
    return LogProb{std::min(0.0, l_peak + std::log(integral))};
}

std::pair<double, double> sample_bvn(double rho, RngStream& rng) {
    auto [z1, z] = rng.next_normal_pair();
    double s = std::sqrt((1.0 - rho) * (1.0 + rho));
    return {z1, rho * z1 + s * z};
}

}  // namespace bivex

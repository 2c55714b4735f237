#pragma once

#include <cstdint>

#include "bivex/rates.hpp"

namespace bivex {

enum class Method { Naive, ImportanceSampling };
std::string_view to_string(Method m);

struct TailEstimate {
    LogProb log_p;
    double std_err_log = 0.0;  // delta-method standard error of log_p
    std::uint64_t trials = 0;
    Method method = Method::Naive;
    std::uint64_t seed = 0;
    std::uint64_t hits = 0;       // naive: raw hit count
    double ess = 0.0;             // importance sampling: effective sample size
    bool zero_hits = false;       // no event trials; caller should switch to IS
    bool ess_collapse = false;    // ESS < 30
};

struct IndexCoincidenceEstimate {
    double p_distinct = 0.0;  // estimate of P(argmax1 != argmax2 | tail event)
    double std_err = 0.0;
    std::uint64_t conditioning_hits = 0;
    std::uint64_t distinct_hits = 0;
    std::uint64_t trials = 0;
    std::uint64_t seed = 0;
    bool insufficient_hits = false;  // conditioning_hits < 30
};

struct MaxSample {
    double max1 = 0.0;
    double max2 = 0.0;
    std::uint64_t argmax1 = 1;  // 1-based; ties broken by smallest index
    std::uint64_t argmax2 = 1;
};

/// Effective worker count: `requested` if positive, else the hardware
/// default, in both cases capped by the BIVEX_THREADS environment variable.
int resolve_workers(int requested);

/// Componentwise maxima and argmax indices of n i.i.d. standard bivariate
/// pairs, single streaming pass.
MaxSample sample_componentwise_max(std::uint64_t n, double rho, RngStream& rng);

/// Hit-frequency estimate of log P(componentwise max over n draws > v).
/// Deterministic given (n, v, rho, trials, seed) regardless of worker count.
TailEstimate estimate_tail_naive(std::uint64_t n, Threshold v, double rho,
                                 std::uint64_t trials, std::uint64_t seed,
                                 int workers = 0);

/// Importance-sampled estimate of the same tail. Proposal: 50/50 mixture of
///  - a one-sample mean shift to the dominant point (the orthant QP minimizer
///    at level v), designated index uniform, and
///  - a two-sample marginal tilt, first coordinate of one sample to v1 and
///    second coordinate of another to v2, ordered pair uniform.
/// Weights use the full mixture density (the pair sum factorizes, so the
/// likelihood ratio costs O(n) per trial); the estimate is the unbiased
/// LR-weighted mean in log space with a delta-method standard error.
TailEstimate estimate_tail_importance(std::uint64_t n, Threshold v, double rho,
                                      std::uint64_t trials, std::uint64_t seed,
                                      int workers = 0);

/// Estimates P(argmax indices differ | componentwise max > a_n u) by exact
/// conditional sampling: the coordinate-1 maximum is drawn from its order-
/// statistic law restricted to the event, the argmax draw's second coordinate
/// from the conditional Gaussian, and the remaining n-1 draws enter through
/// one analytic Bernoulli comparison per trial. Hit counts are literal
/// integers and the cost per trial is O(1) in n.
IndexCoincidenceEstimate index_coincidence(std::uint64_t n, double a_n, Threshold u,
                                           double rho, std::uint64_t trials,
                                           std::uint64_t seed, int workers = 0);

}  // namespace bivex

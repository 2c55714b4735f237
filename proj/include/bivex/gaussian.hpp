#pragma once

#include <array>
#include <stdexcept>

#include "bivex/log_space.hpp"
#include "bivex/rng.hpp"

namespace bivex {

struct DegenerateCorrelation : std::domain_error {
    using std::domain_error::domain_error;
};

/// Marginal scales and correlation of a centered bivariate Gaussian,
/// with the derived covariance matrix and its inverse.
class CorrelationStructure {
  public:
    CorrelationStructure(double sigma1, double sigma2, double rho);

    double sigma1() const { return sigma1_; }
    double sigma2() const { return sigma2_; }
    double rho() const { return rho_; }
    bool degenerate() const { return std::abs(rho_) == 1.0; }

    std::array<std::array<double, 2>, 2> covariance() const;
    /// Inverse covariance; throws DegenerateCorrelation when |rho| = 1.
    std::array<std::array<double, 2>, 2> inverse() const;

  private:
    double sigma1_, sigma2_, rho_;
};

/// log(1 - Phi(x)). Relative error of the probability is ~1e-14 across
/// the full double range; the far tail uses the Mills continued fraction
/// with compensated x^2/2.
double std_normal_tail(double x);

/// log Phi(x) = std_normal_tail(-x).
inline double std_normal_log_cdf(double x) { return std_normal_tail(-x); }

/// log phi(x) with compensated x^2/2 (matters for |x| ~ 40 in log space).
double std_normal_log_pdf(double x);

/// Upper-tail quantile: the x with log(1 - Phi(x)) = log_q, for log_q < log(1/2).
double std_normal_tail_quantile(double log_q);

/// log P(Z1 > a, Z2 > b) for standard bivariate normal with correlation rho.
/// Evaluated by adaptive Gauss-Kronrod quadrature of the conditional tail
/// integral in log space; symmetric in (a, b) exactly. Relative error of the
/// probability is ~1e-12 for max(a,b) <= 12 and <= 1e-6 far beyond.
LogProb bvn_upper_tail(double a, double b, double rho);

/// One draw of a standard bivariate normal pair with correlation rho via the
/// conditional representation z2 = rho*z1 + sqrt(1-rho^2)*z. Consumes exactly
/// one Box-Muller pair (two uniforms) from the stream.
std::pair<double, double> sample_bvn(double rho, RngStream& rng);

}  // namespace bivex

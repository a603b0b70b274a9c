#pragma once

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

namespace holdermc {

// Hoelder conjugate exponents: p, q > 1 with 1/p + 1/q = 1.
struct ConjugatePair {
  double p;
  double q;
};

inline constexpr double kMinP = 1.0 + 1e-6;
inline constexpr double kMaxP = 1e6;

inline ConjugatePair conjugate(double p) {
  if (!std::isfinite(p) || p < kMinP || p > kMaxP) {
    throw std::domain_error("conjugate: p must be finite and in [1 + 1e-6, 1e6]");
  }
  return ConjugatePair{p, p / (p - 1.0)};
}

// k-th absolute moment of the p-generalized Gaussian:
// E|zeta|^k = p^{k/p} Gamma((k+1)/p) / Gamma(1/p).
// Evaluated through log-gamma differences; Gamma(3/p) alone overflows for
// small 1/p arguments long before the ratio does.
inline double gamma_moment(const ConjugatePair& pair, double k, bool use_q = false) {
  if (k < 0.0) throw std::domain_error("gamma_moment: k must be >= 0");
  const double p = use_q ? pair.q : pair.p;
  const double log_m =
      (k / p) * std::log(p) + std::lgamma((k + 1.0) / p) - std::lgamma(1.0 / p);
  return std::exp(log_m);
}

// Closed-form limit quantities of the Hoelder-ratio CLT.
struct LimitConstants {
  double m;                // limit mean m_{p,q}
  Eigen::Matrix3d cov;     // covariance of (|zeta*eta|, |zeta|^p, |eta|^q)
  Eigen::Vector3d d;       // gradient direction (1, -m/p, -m/q)
  double sigma2;           // <d, cov d>
  double c_norm;           // normalizing constant of gamma_p (x) gamma_q
};

inline LimitConstants limit_constants(const ConjugatePair& pair) {
  const double p = pair.p;
  const double q = pair.q;
  const double m = gamma_moment(pair, 1.0, false) * gamma_moment(pair, 1.0, true);
  const double e2p = gamma_moment(pair, 2.0, false);
  const double e2q = gamma_moment(pair, 2.0, true);

  LimitConstants lc;
  lc.m = m;
  lc.cov << e2p * e2q - m * m, m, m,
            m,                 p, 0.0,
            m,                 0.0, q;
  lc.d << 1.0, -m / p, -m / q;
  lc.sigma2 = lc.d.dot(lc.cov * lc.d);
  lc.c_norm = std::exp(-(std::log(2.0) + std::log(p) / p + std::lgamma(1.0 + 1.0 / p))
                       - (std::log(2.0) + std::log(q) / q + std::lgamma(1.0 + 1.0 / q)));
  return lc;
}

}  // namespace holdermc

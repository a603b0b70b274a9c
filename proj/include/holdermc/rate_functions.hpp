#pragma once

#include <cstdint>
#include <limits>
#include <unordered_map>

#include <Eigen/Dense>

#include "holdermc/conjugate.hpp"
#include "holdermc/quadrature.hpp"

namespace holdermc {

// Tilt (r, s, t) of the triple (|zeta*eta|, |zeta|^p, |eta|^q).
struct TiltPoint {
  double r = 0.0;
  double s = 0.0;
  double t = 0.0;
};

// Mean point (u, v, w) = (E|zeta*eta|, E|zeta|^p, E|eta|^q) under a tilt;
// (m_{p,q}, 1, 1) at the origin.
struct MeanPoint {
  double u;
  double v;
  double w;
};

// Sufficient finiteness condition from the Young split
// r|xy| <= r(|x|^p/p + |y|^q/q): both effective decay coefficients stay
// positive. Sharpness for r > 0 is not claimed.
inline bool tilt_in_domain(const TiltPoint& th, const ConjugatePair& pair) {
  const double rp = th.r > 0.0 ? th.r : 0.0;
  return th.s + rp / pair.p < 1.0 / pair.p && th.t + rp / pair.q < 1.0 / pair.q;
}

struct OptimizerSpec {
  int max_evals = 500;       // budget of cumulant evaluations per solve
  double param_tol = 1e-8;
  double value_tol = 1e-10;
  double fd_step = 1e-4;     // central-difference step for gradients
};

// Cumulant generating function of the triple, evaluated by nested adaptive
// quadrature with exponential-tail truncation. Values are memoized by the
// tilt rounded to 1e-10.
class CgfEvaluator {
 public:
  CgfEvaluator(const ConjugatePair& pair, const QuadratureSpec& quad = {});

  const ConjugatePair& pair() const { return pair_; }

  double lambda(const TiltPoint& theta) const;
  Eigen::Vector3d gradient(const TiltPoint& theta, double step = 1e-4) const;

  std::size_t cache_size() const { return cache_.size(); }

 private:
  double lambda_uncached(const TiltPoint& theta) const;

  ConjugatePair pair_;
  QuadratureSpec quad_;
  LimitConstants lc_;
  mutable std::unordered_map<std::uint64_t, double> cache_;
};

struct LegendreResult {
  double value = std::numeric_limits<double>::infinity();
  Eigen::Vector3d argmax = Eigen::Vector3d::Zero();
  double residual = std::numeric_limits<double>::infinity();  // |grad| at argmax
  bool converged = false;
  bool diverged = false;  // supremum is +infinity
};

// Legendre-Fenchel transform sup_theta <theta, (u,v,w)> - Lambda(theta),
// multistart simplex search with Newton polish.
LegendreResult legendre_star(const MeanPoint& point, const CgfEvaluator& cgf,
                             const OptimizerSpec& opt = {});
LegendreResult legendre_star(const MeanPoint& point, const CgfEvaluator& cgf,
                             const OptimizerSpec& opt, const Eigen::Vector3d& warm_start);

struct RateResult {
  double rate = std::numeric_limits<double>::infinity();
  bool converged = true;
  double residual = 0.0;
};

// Contracted LDP rate I(x) = inf { Lambda*(x v^{1/p} w^{1/q}, v, w) };
// +infinity for x <= 0 and whenever every start diverges.
RateResult ldp_rate(double x, const CgfEvaluator& cgf, const OptimizerSpec& opt = {});

inline double mdp_rate(double t, const ConjugatePair& pair) {
  return t * t / (2.0 * limit_constants(pair).sigma2);
}

}  // namespace holdermc

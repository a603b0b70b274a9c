#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "holdermc/conjugate.hpp"
#include "holdermc/rng.hpp"
#include "holdermc/summation.hpp"

namespace holdermc {

enum class ModelKind { BallUniform, ConeMeasure, SurfaceMeasure };
enum class SurfaceMethod { Rejection, ImportanceWeight };

struct DistributionModel {
  ModelKind kind = ModelKind::ConeMeasure;
  SurfaceMethod surface_method = SurfaceMethod::Rejection;
};

inline std::string to_string(ModelKind k) {
  switch (k) {
    case ModelKind::BallUniform: return "ball";
    case ModelKind::ConeMeasure: return "cone";
    case ModelKind::SurfaceMeasure: return "surface";
  }
  return "?";
}

inline std::string to_string(SurfaceMethod m) {
  return m == SurfaceMethod::Rejection ? "reject" : "weight";
}

inline ModelKind parse_model(const std::string& s) {
  if (s == "ball") return ModelKind::BallUniform;
  if (s == "cone") return ModelKind::ConeMeasure;
  if (s == "surface") return ModelKind::SurfaceMeasure;
  throw std::invalid_argument("unknown model: " + s);
}

inline SurfaceMethod parse_surface_method(const std::string& s) {
  if (s == "reject") return SurfaceMethod::Rejection;
  if (s == "weight") return SurfaceMethod::ImportanceWeight;
  throw std::invalid_argument("unknown surface method: " + s);
}

// One draw (x, y) under a chosen model. For cone/surface draws the vectors
// sit on the unit p- resp. q-sphere; weight != 1 only for
// SurfaceMeasure + ImportanceWeight (self-normalize downstream).
struct PairSample {
  Eigen::VectorXd x;
  Eigen::VectorXd y;
  double weight = 1.0;
};

// Sampler for the p-generalized Gaussian gamma_p (density ~ exp(-|x|^p/p)).
// Uses the representation |zeta|^p/p ~ Gamma(1/p, 1): with G' ~ Gamma(1/p + 1)
// and U uniform, |zeta| = (p G')^{1/p} U and |zeta|^p = p G' U^p, which needs
// a single fractional power per draw. p = 2 is plain standard normal.
class PggSampler {
 public:
  explicit PggSampler(double p) : p_(p), inv_p_(1.0 / p) {
    const double shape = inv_p_ + 1.0;
    d_ = shape - 1.0 / 3.0;
    c_ = 1.0 / (3.0 * std::sqrt(d_));
    if (p == 2.0) kind_ = kNormal;
    else if (p == 3.0) kind_ = kCube;
    else if (p == 1.5) kind_ = kThreeHalves;
    else kind_ = kGeneral;
  }

  double p() const { return p_; }

  struct Draw {
    double value;   // signed draw from gamma_p
    double pow_p;   // |value|^p
  };

  Draw draw(CounterRng& rng) const {
    if (kind_ == kNormal) {
      const double z = rng.next_normal();
      return {z, z * z};
    }
    const double g = gamma_boosted(rng);
    const std::uint64_t bits = rng.next_u64();
    const double u = static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
    const double pg = p_ * g;
    double base, up;
    switch (kind_) {
      case kCube:         // p = 3: (3G)^{1/3}, U^3
        base = std::cbrt(pg);
        up = u * u * u;
        break;
      case kThreeHalves:  // p = 3/2: x^{2/3} = cbrt(x)^2, U^{3/2} = U sqrt(U)
      {
        const double cb = std::cbrt(pg);
        base = cb * cb;
        up = u * std::sqrt(u);
        break;
      }
      default:
        base = std::pow(pg, inv_p_);
        up = std::pow(u, p_);
        break;
    }
    const double mag = base * u;
    const double v = (bits & 1ULL) ? -mag : mag;
    return {v, pg * up};
  }

 private:
  static constexpr int kNormal = 0, kCube = 1, kThreeHalves = 2, kGeneral = 3;

  // Marsaglia-Tsang for shape 1/p + 1 (always > 1).
  double gamma_boosted(CounterRng& rng) const {
    for (;;) {
      double z, v;
      do {
        z = rng.next_normal();
        v = 1.0 + c_ * z;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = rng.next_open();
      const double z2 = z * z;
      if (u < 1.0 - 0.0331 * z2 * z2) return d_ * v;
      if (std::log(u) < 0.5 * z2 + d_ * (1.0 - v + std::log(v))) return d_ * v;
    }
  }

  double p_, inv_p_, d_, c_;
  int kind_;
};

inline double sample_pgg(const ConjugatePair& pair, bool use_q, CounterRng& rng) {
  return PggSampler(use_q ? pair.q : pair.p).draw(rng).value;
}

// Unnormalized i.i.d. gamma_p vector together with sum |v_i|^p.
struct GaussianVector {
  Eigen::VectorXd v;
  double sum_pow;
};

inline GaussianVector draw_gaussian_vector(int n, const PggSampler& sampler, CounterRng& rng) {
  GaussianVector out;
  out.v.resize(n);
  for (;;) {
    CompensatedSum s;
    for (int i = 0; i < n; ++i) {
      const auto d = sampler.draw(rng);
      out.v[i] = d.value;
      s.add(d.pow_p);
    }
    out.sum_pow = s.value();
    if (out.sum_pow > 0.0) return out;  // probability-zero guard: resample
  }
}

inline PairSample sample_cone(int n, const ConjugatePair& pair, CounterRng& rng) {
  if (n < 1) throw std::invalid_argument("sample_cone: n must be >= 1");
  const PggSampler sp(pair.p), sq(pair.q);
  const auto zeta = draw_gaussian_vector(n, sp, rng);
  const auto eta = draw_gaussian_vector(n, sq, rng);
  PairSample s;
  s.x = zeta.v / std::pow(zeta.sum_pow, 1.0 / pair.p);
  s.y = eta.v / std::pow(eta.sum_pow, 1.0 / pair.q);
  return s;
}

inline PairSample sample_ball(int n, const ConjugatePair& pair, CounterRng& rng) {
  if (n < 1) throw std::invalid_argument("sample_ball: n must be >= 1");
  const PggSampler sp(pair.p), sq(pair.q);
  const auto zeta = draw_gaussian_vector(n, sp, rng);
  const double u = rng.next_open();
  const auto eta = draw_gaussian_vector(n, sq, rng);
  const double v = rng.next_open();
  PairSample s;
  s.x = zeta.v * (std::exp(std::log(u) / n) / std::pow(zeta.sum_pow, 1.0 / pair.p));
  s.y = eta.v * (std::exp(std::log(v) / n) / std::pow(eta.sum_pow, 1.0 / pair.q));
  return s;
}

// Unnormalized surface-vs-cone density on the unit p-sphere:
// (sum |x_i|^{2p-2})^{1/2}. The normalizing constant is never needed;
// self-normalization absorbs it.
inline double surface_weight(const Eigen::VectorXd& x, double p) {
  const double norm_p = std::pow(x.array().abs().pow(p).sum(), 1.0 / p);
  if (std::abs(norm_p - 1.0) > 1e-8) {
    throw std::domain_error("surface_weight: x is not on the unit p-sphere");
  }
  return std::sqrt(x.array().abs().pow(2.0 * p - 2.0).sum());
}

// Exact supremum of surface_weight over the sphere. Maximizing
// sum t_i^{(2p-2)/p} over the simplex (t_i = |x_i|^p) puts the extremum at a
// vertex when the exponent is >= 1 (p >= 2, sup = 1) and at the barycenter
// otherwise (sup = n^{(2-p)/(2p)}); stationarity of the Lagrangian forces all
// nonzero t_i equal, so only those two candidates exist.
inline double surface_weight_envelope(int n, double p) {
  return std::max(1.0, std::pow(static_cast<double>(n), (2.0 - p) / (2.0 * p)));
}

namespace detail {

inline Eigen::VectorXd draw_surface_vector_rejection(int n, double p, const PggSampler& sampler,
                                                     CounterRng& rng) {
  const double envelope = surface_weight_envelope(n, p);
  const double inv_p = 1.0 / p;
  for (long iter = 0; iter < 1000000; ++iter) {
    const auto g = draw_gaussian_vector(n, sampler, rng);
    Eigen::VectorXd x = g.v / std::pow(g.sum_pow, inv_p);
    const double w = std::sqrt(x.array().abs().pow(2.0 * p - 2.0).sum());
    if (rng.next_double() * envelope <= w) return x;
  }
  // acceptance rate is provably >= n^{-|2-p|/(2p)}; reaching here is a bug
  throw std::runtime_error("sample_surface: rejection cap hit");
}

}  // namespace detail

inline PairSample sample_surface(int n, const ConjugatePair& pair, CounterRng& rng,
                                 SurfaceMethod method) {
  if (n < 1) throw std::invalid_argument("sample_surface: n must be >= 1");
  if (method == SurfaceMethod::Rejection) {
    const PggSampler sp(pair.p), sq(pair.q);
    PairSample s;
    s.x = detail::draw_surface_vector_rejection(n, pair.p, sp, rng);
    s.y = detail::draw_surface_vector_rejection(n, pair.q, sq, rng);
    return s;
  }
  PairSample s = sample_cone(n, pair, rng);
  s.weight = surface_weight(s.x, pair.p) * surface_weight(s.y, pair.q);
  return s;
}

inline PairSample sample_pair(int n, const ConjugatePair& pair, const DistributionModel& model,
                              CounterRng& rng) {
  switch (model.kind) {
    case ModelKind::BallUniform: return sample_ball(n, pair, rng);
    case ModelKind::ConeMeasure: return sample_cone(n, pair, rng);
    case ModelKind::SurfaceMeasure: return sample_surface(n, pair, rng, model.surface_method);
  }
  throw std::logic_error("sample_pair: bad model");
}

}  // namespace holdermc

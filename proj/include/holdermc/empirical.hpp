#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

namespace holdermc {

inline double normal_cdf(double t, double sigma2) {
  if (!(sigma2 > 0.0)) throw std::domain_error("normal_cdf: sigma2 must be > 0");
  return 0.5 * std::erfc(-t / std::sqrt(2.0 * sigma2));
}

// Regularized lower incomplete gamma P(a, x); series for x < a+1,
// continued fraction otherwise.
inline double gamma_cdf_regularized(double a, double x) {
  if (x <= 0.0) return 0.0;
  const double lg = std::lgamma(a);
  if (x < a + 1.0) {
    double term = 1.0 / a;
    double sum = term;
    double ap = a;
    for (int i = 0; i < 500; ++i) {
      ap += 1.0;
      term *= x / ap;
      sum += term;
      if (std::abs(term) < std::abs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - lg);
  }
  // Lentz continued fraction for Q(a, x)
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  const double q = std::exp(-x + a * std::log(x) - lg) * h;
  return 1.0 - q;
}

// Weighted empirical distribution with ties merged into single jumps.
class EmpiricalDistribution {
 public:
  explicit EmpiricalDistribution(std::vector<double> values,
                                 std::vector<double> weights = {}) {
    if (values.empty()) throw std::invalid_argument("EmpiricalDistribution: empty sample");
    const bool weighted = !weights.empty();
    if (weighted && weights.size() != values.size()) {
      throw std::invalid_argument("EmpiricalDistribution: weight length mismatch");
    }
    std::vector<std::size_t> order(values.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

    double total = 0.0;
    if (weighted) {
      for (double w : weights) {
        if (!(w > 0.0)) throw std::invalid_argument("EmpiricalDistribution: weights must be > 0");
        total += w;
      }
    } else {
      total = static_cast<double>(values.size());
    }

    double cum = 0.0;
    for (std::size_t k = 0; k < order.size(); ++k) {
      const double v = values[order[k]];
      cum += weighted ? weights[order[k]] : 1.0;
      if (!values_.empty() && values_.back() == v) {
        cum_weights_.back() = cum / total;
      } else {
        values_.push_back(v);
        cum_weights_.push_back(cum / total);
      }
    }
    cum_weights_.back() = 1.0;  // kill roundoff drift in the last jump
  }

  const std::vector<double>& jump_points() const { return values_; }
  const std::vector<double>& cumulative() const { return cum_weights_; }

  // F_n(t), right-continuous
  double cdf(double t) const {
    const auto it = std::upper_bound(values_.begin(), values_.end(), t);
    if (it == values_.begin()) return 0.0;
    return cum_weights_[static_cast<std::size_t>(it - values_.begin()) - 1];
  }

 private:
  std::vector<double> values_;
  std::vector<double> cum_weights_;
};

// sup_t |F_n(t) - F(t)| against a continuous reference CDF. The sup is
// attained at a jump point, from the left or the right, so evaluating both
// sides at every jump is exact.
inline double kolmogorov_distance(const EmpiricalDistribution& emp,
                                  const std::function<double(double)>& cdf) {
  const auto& xs = emp.jump_points();
  const auto& cw = emp.cumulative();
  double d = 0.0;
  double prev = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max(d, std::abs(cw[i] - f));
    d = std::max(d, std::abs(prev - f));
    prev = cw[i];
  }
  return d;
}

inline double kolmogorov_distance(const EmpiricalDistribution& emp, double sigma2) {
  return kolmogorov_distance(emp, [sigma2](double t) { return normal_cdf(t, sigma2); });
}

// sup-norm distance between two (weighted) ECDFs by a linear merge.
inline double two_sample_ks(const EmpiricalDistribution& a, const EmpiricalDistribution& b) {
  const auto& xa = a.jump_points();
  const auto& xb = b.jump_points();
  const auto& ca = a.cumulative();
  const auto& cb = b.cumulative();
  double fa = 0.0, fb = 0.0, d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < xa.size() || j < xb.size()) {
    const double va = i < xa.size() ? xa[i] : std::numeric_limits<double>::infinity();
    const double vb = j < xb.size() ? xb[j] : std::numeric_limits<double>::infinity();
    if (va <= vb) fa = ca[i++];
    if (vb <= va) fb = cb[j++];
    d = std::max(d, std::abs(fa - fb));
  }
  return d;
}

}  // namespace holdermc

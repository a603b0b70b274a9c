#pragma once

#include <cmath>
#include <stdexcept>

namespace holdermc {

struct QuadratureSpec {
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  int max_subdivisions = 2000;
};

struct QuadratureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

// Gauss-Kronrod 7-15 nodes/weights on [-1, 1] (positive half; symmetric).
inline constexpr double kGK15Nodes[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.0};
inline constexpr double kGK15Weights[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
inline constexpr double kG7Weights[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

template <class F>
inline void gk15(const F& f, double a, double b, double& kronrod, double& err) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  double resk = 0.0, resg = 0.0;
  for (int i = 0; i < 8; ++i) {
    const double dx = h * kGK15Nodes[i];
    double fv;
    if (i == 7) {
      fv = f(c);
      resk += kGK15Weights[7] * fv;
      resg += kG7Weights[3] * fv;
    } else {
      fv = f(c - dx) + f(c + dx);
      resk += kGK15Weights[i] * fv;
      if (i % 2 == 1) resg += kG7Weights[i / 2] * fv;
    }
  }
  kronrod = resk * h;
  err = std::abs((resk - resg) * h);
}

}  // namespace detail

// Adaptive bisection with a GK15 panel rule. Worst panel first would be
// nicer; plain recursion with per-panel budget is plenty at this scale.
template <class F>
inline double integrate_adaptive(const F& f, double a, double b, const QuadratureSpec& spec) {
  struct Worker {
    const F& f;
    const QuadratureSpec& spec;
    int panels_left;

    double run(double a, double b, double whole, double err, int depth) {
      if (err <= spec.abs_tol || err <= spec.rel_tol * std::abs(whole)) return whole;
      if (--panels_left <= 0 || depth > 60) {
        throw QuadratureError("integrate_adaptive: subdivision cap hit");
      }
      const double c = 0.5 * (a + b);
      double left, lerr, right, rerr;
      detail::gk15(f, a, c, left, lerr);
      detail::gk15(f, c, b, right, rerr);
      return run(a, c, left, lerr, depth + 1) + run(c, b, right, rerr, depth + 1);
    }
  };
  double whole, err;
  detail::gk15(f, a, b, whole, err);
  Worker w{f, spec, spec.max_subdivisions};
  return w.run(a, b, whole, err, 0);
}

}  // namespace holdermc

#include "holdermc/rate_functions.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace holdermc {

namespace {

std::uint64_t tilt_key(const TiltPoint& th) {
  const auto q = [](double v) {
    return static_cast<std::uint64_t>(static_cast<std::int64_t>(std::llround(v * 1e10)));
  };
  std::uint64_t h = q(th.r);
  h = h * 0x100000001b3ULL ^ q(th.s);
  h = h * 0x100000001b3ULL ^ q(th.t);
  return h;
}

// Upper truncation point for int_0^inf exp(-beta y^q + drive * y) dy with
// discarded tail below ~exp(-slack). Two fixed-point sweeps are enough since
// the power term dominates eventually.
double truncation_radius(double beta, double q, double drive, double slack) {
  double y = std::pow(slack / beta, 1.0 / q);
  for (int i = 0; i < 3; ++i) {
    y = std::pow((slack + std::max(drive, 0.0) * y) / beta, 1.0 / q);
  }
  return 1.2 * y + 1.0;
}

}  // namespace

CgfEvaluator::CgfEvaluator(const ConjugatePair& pair, const QuadratureSpec& quad)
    : pair_(pair), quad_(quad), lc_(limit_constants(pair)) {}

double CgfEvaluator::lambda(const TiltPoint& theta) const {
  const auto key = tilt_key(theta);
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  const double val = lambda_uncached(theta);
  cache_.emplace(key, val);
  return val;
}

double CgfEvaluator::lambda_uncached(const TiltPoint& theta) const {
  if (!tilt_in_domain(theta, pair_)) {
    throw std::domain_error("cgf: tilt outside the sufficient-condition domain");
  }
  const double p = pair_.p, q = pair_.q;
  const double r = theta.r, s = theta.s, t = theta.t;
  const double rp = std::max(r, 0.0);
  const double ax = 1.0 / p - s - rp / p;  // effective x-decay after the Young split
  const double bx = 1.0 / p - s;           // actual x^p coefficient
  const double by = 1.0 / q - t;

  const double slack = std::log(1.0 / quad_.abs_tol) + 20.0;
  const double x_max = truncation_radius(ax, p, 0.0, slack);

  QuadratureSpec inner = quad_;
  inner.rel_tol *= 0.5;

  const auto outer_f = [&](double x) {
    const double drive = r * x;  // can be negative; truncation handles r > 0
    const double y_max = truncation_radius(by, q, drive, slack);
    const auto inner_f = [&](double y) {
      return std::exp(drive * y - by * std::pow(y, q));
    };
    const double inner_val = integrate_adaptive(inner_f, 0.0, y_max, inner);
    return std::exp(-bx * std::pow(x, p)) * inner_val;
  };

  const double integral = integrate_adaptive(outer_f, 0.0, x_max, quad_);
  // sign symmetry in both coordinates gives the factor 4
  return std::log(4.0 * lc_.c_norm * integral);
}

Eigen::Vector3d CgfEvaluator::gradient(const TiltPoint& theta, double step) const {
  Eigen::Vector3d g;
  const auto at = [&](double dr, double ds, double dt) {
    return lambda(TiltPoint{theta.r + dr, theta.s + ds, theta.t + dt});
  };
  g[0] = (at(step, 0, 0) - at(-step, 0, 0)) / (2.0 * step);
  g[1] = (at(0, step, 0) - at(0, -step, 0)) / (2.0 * step);
  g[2] = (at(0, 0, step) - at(0, 0, -step)) / (2.0 * step);
  return g;
}

namespace {

struct NmResult {
  Eigen::VectorXd x;
  double fmin;
  bool converged;
};

// Plain Nelder-Mead, minimizing; budget counts objective evaluations.
NmResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                     const Eigen::VectorXd& x0, double step, int& evals_left,
                     double param_tol, double value_tol) {
  const int dim = static_cast<int>(x0.size());
  std::vector<Eigen::VectorXd> pts(dim + 1, x0);
  std::vector<double> fv(dim + 1);
  for (int i = 1; i <= dim; ++i) pts[i][i - 1] += step;
  for (int i = 0; i <= dim; ++i) {
    fv[i] = f(pts[i]);
    --evals_left;
  }

  bool converged = false;
  while (evals_left > 0) {
    std::vector<int> order(dim + 1);
    for (int i = 0; i <= dim; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) { return fv[a] < fv[b]; });
    const int best = order[0], worst = order[dim], second_worst = order[dim - 1];

    double spread = 0.0;
    for (int i = 0; i <= dim; ++i) spread = std::max(spread, (pts[i] - pts[best]).norm());
    if (spread < param_tol && std::abs(fv[worst] - fv[best]) < value_tol) {
      converged = true;
      break;
    }

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(dim);
    for (int i = 0; i <= dim; ++i) {
      if (i != worst) centroid += pts[i];
    }
    centroid /= dim;

    const Eigen::VectorXd refl = centroid + (centroid - pts[worst]);
    const double f_refl = f(refl);
    --evals_left;
    if (f_refl < fv[best]) {
      const Eigen::VectorXd exp_pt = centroid + 2.0 * (centroid - pts[worst]);
      const double f_exp = f(exp_pt);
      --evals_left;
      if (f_exp < f_refl) {
        pts[worst] = exp_pt;
        fv[worst] = f_exp;
      } else {
        pts[worst] = refl;
        fv[worst] = f_refl;
      }
    } else if (f_refl < fv[second_worst]) {
      pts[worst] = refl;
      fv[worst] = f_refl;
    } else {
      const Eigen::VectorXd contr = centroid + 0.5 * (pts[worst] - centroid);
      const double f_contr = f(contr);
      --evals_left;
      if (f_contr < fv[worst]) {
        pts[worst] = contr;
        fv[worst] = f_contr;
      } else {
        for (int i = 0; i <= dim; ++i) {
          if (i == best) continue;
          pts[i] = pts[best] + 0.5 * (pts[i] - pts[best]);
          fv[i] = f(pts[i]);
          --evals_left;
        }
      }
    }
  }

  int best = 0;
  for (int i = 1; i <= dim; ++i) {
    if (fv[i] < fv[best]) best = i;
  }
  return {pts[best], fv[best], converged};
}

constexpr double kPenalty = 1e100;
constexpr double kBarrier = 1e-10;

}  // namespace

LegendreResult legendre_star(const MeanPoint& point, const CgfEvaluator& cgf,
                             const OptimizerSpec& opt) {
  return legendre_star(point, cgf, opt, Eigen::Vector3d::Zero());
}

LegendreResult legendre_star(const MeanPoint& point, const CgfEvaluator& cgf,
                             const OptimizerSpec& opt, const Eigen::Vector3d& warm_start) {
  const ConjugatePair& pair = cgf.pair();
  LegendreResult out;

  // Means of (|zeta*eta|, |zeta|^p, |eta|^q) live in
  // {u > 0, v > 0, w > 0, u < v^{1/p} w^{1/q}} (Hoelder under every tilt);
  // outside that set the supremum is infinite.
  const double hoelder_cap =
      std::pow(point.v, 1.0 / pair.p) * std::pow(point.w, 1.0 / pair.q);
  if (point.u <= 0.0 || point.v <= 0.0 || point.w <= 0.0 || point.u >= hoelder_cap) {
    out.diverged = true;
    return out;
  }

  const Eigen::Vector3d mu(point.u, point.v, point.w);
  const auto objective = [&](const Eigen::VectorXd& th) -> double {
    const TiltPoint theta{th[0], th[1], th[2]};
    if (!tilt_in_domain(theta, pair)) return kPenalty;
    const double rp = std::max(theta.r, 0.0);
    const double dx = 1.0 / pair.p - theta.s - rp / pair.p;
    const double dy = 1.0 / pair.q - theta.t - rp / pair.q;
    const double g = mu.dot(th) - cgf.lambda(theta);
    return -g - kBarrier * (std::log(dx) + std::log(dy));
  };

  std::vector<Eigen::Vector3d> starts;
  starts.push_back(warm_start);
  if (warm_start.norm() > 1e-12) starts.push_back(Eigen::Vector3d::Zero());
  for (int axis = 0; axis < 3; ++axis) {
    for (double delta : {0.05, -0.05}) {
      Eigen::Vector3d s = Eigen::Vector3d::Zero();
      s[axis] += delta;
      starts.push_back(s);
    }
  }

  int evals_left = opt.max_evals;
  Eigen::VectorXd best_x = Eigen::VectorXd::Zero(3);
  double best_f = kPenalty;
  bool any_converged = false;
  for (const auto& s : starts) {
    if (evals_left <= 0) break;
    if (objective(s) >= kPenalty) continue;
    const auto res = nelder_mead(objective, s, 0.05, evals_left, opt.param_tol, opt.value_tol);
    if (res.fmin < best_f) {
      best_f = res.fmin;
      best_x = res.x;
      any_converged = res.converged;
    }
    // extra starts only matter when the first one failed to settle
    if (any_converged && res.fmin <= best_f + opt.value_tol) break;
  }

  if (best_f >= kPenalty) {
    out.diverged = true;
    return out;
  }

  // damped-Newton polish with finite-difference derivatives
  TiltPoint theta{best_x[0], best_x[1], best_x[2]};
  double value = mu.dot(best_x) - cgf.lambda(theta);
  Eigen::Vector3d grad = mu - cgf.gradient(theta, opt.fd_step);
  for (int iter = 0; iter < 3 && grad.norm() > 1e-8; ++iter) {
    Eigen::Matrix3d hess;  // of Lambda, which is the negative Hessian of g
    const double h = opt.fd_step;
    const auto lam = [&](double dr, double ds, double dt) {
      const TiltPoint th{theta.r + dr, theta.s + ds, theta.t + dt};
      return tilt_in_domain(th, cgf.pair()) ? cgf.lambda(th)
                                            : std::numeric_limits<double>::quiet_NaN();
    };
    const double f0 = cgf.lambda(theta);
    const std::array<std::array<double, 3>, 3> dirs = {{{h, 0, 0}, {0, h, 0}, {0, 0, h}}};
    bool ok = true;
    for (int i = 0; i < 3 && ok; ++i) {
      for (int j = i; j < 3 && ok; ++j) {
        double v;
        if (i == j) {
          v = (lam(dirs[i][0], dirs[i][1], dirs[i][2]) - 2.0 * f0 +
               lam(-dirs[i][0], -dirs[i][1], -dirs[i][2])) / (h * h);
        } else {
          v = (lam(dirs[i][0] + dirs[j][0], dirs[i][1] + dirs[j][1], dirs[i][2] + dirs[j][2]) -
               lam(dirs[i][0] - dirs[j][0], dirs[i][1] - dirs[j][1], dirs[i][2] - dirs[j][2]) -
               lam(-dirs[i][0] + dirs[j][0], -dirs[i][1] + dirs[j][1], -dirs[i][2] + dirs[j][2]) +
               lam(-dirs[i][0] - dirs[j][0], -dirs[i][1] - dirs[j][1], -dirs[i][2] - dirs[j][2])) /
              (4.0 * h * h);
        }
        if (!std::isfinite(v)) ok = false;
        hess(i, j) = hess(j, i) = v;
      }
    }
    if (!ok) break;
    const Eigen::Vector3d step = hess.ldlt().solve(grad);
    TiltPoint trial{theta.r + step[0], theta.s + step[1], theta.t + step[2]};
    if (!tilt_in_domain(trial, cgf.pair())) break;
    const Eigen::Vector3d trial_x(trial.r, trial.s, trial.t);
    const double trial_value = mu.dot(trial_x) - cgf.lambda(trial);
    if (trial_value < value - 1e-12) break;
    theta = trial;
    value = trial_value;
    grad = mu - cgf.gradient(theta, opt.fd_step);
  }

  out.value = value;
  out.argmax = Eigen::Vector3d(theta.r, theta.s, theta.t);
  out.residual = grad.norm();
  out.converged = out.residual < 1e-4;
  out.diverged = false;
  return out;
}

RateResult ldp_rate(double x, const CgfEvaluator& cgf, const OptimizerSpec& opt) {
  RateResult out;
  if (x <= 0.0) return out;  // +inf by definition

  const ConjugatePair& pair = cgf.pair();
  Eigen::Vector3d warm = Eigen::Vector3d::Zero();
  double best_residual = std::numeric_limits<double>::infinity();
  bool best_converged = false;

  const auto objective = [&](const Eigen::VectorXd& lvw) -> double {
    const double v = std::exp(lvw[0]);
    const double w = std::exp(lvw[1]);
    const double u = x * std::pow(v, 1.0 / pair.p) * std::pow(w, 1.0 / pair.q);
    const auto res = legendre_star(MeanPoint{u, v, w}, cgf, opt, warm);
    if (res.diverged) return kPenalty;
    warm = res.argmax;
    best_residual = res.residual;
    best_converged = res.converged;
    return res.value;
  };

  const std::array<Eigen::Vector2d, 5> starts = {
      Eigen::Vector2d(0.0, 0.0), Eigen::Vector2d(-0.7, -0.7), Eigen::Vector2d(0.7, 0.7),
      Eigen::Vector2d(-0.7, 0.7), Eigen::Vector2d(0.7, -0.7)};

  double best = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_lvw;
  bool outer_converged = false;
  for (const auto& s : starts) {
    if (objective(s) >= kPenalty) continue;
    int evals_left = 200;  // outer budget; each eval is one Legendre solve
    const auto res = nelder_mead(objective, s, 0.3, evals_left, 1e-6, 1e-9);
    if (res.fmin < best) {
      best = res.fmin;
      best_lvw = res.x;
      outer_converged = res.converged;
    }
    if (outer_converged) break;
  }
  if (best_lvw.size() == 2) {
    best = std::min(best, objective(best_lvw));  // refresh residual at the minimizer
    out.residual = best_residual;
    outer_converged = outer_converged && best_converged;
  }

  if (!std::isfinite(best) || best >= kPenalty) {
    out.rate = std::numeric_limits<double>::infinity();
    out.converged = true;  // certified divergence, not an optimizer failure
    out.residual = 0.0;
    return out;
  }
  out.rate = std::max(best, 0.0);
  out.converged = outer_converged;
  return out;
}

}  // namespace holdermc

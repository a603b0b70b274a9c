#include "holdermc/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <thread>

#include "holdermc/empirical.hpp"
#include "holdermc/rate_functions.hpp"
#include "holdermc/statistics.hpp"
#include "holdermc/summation.hpp"

namespace holdermc {

namespace {

double now_seconds() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

// x^e for the surface-density exponent e = 2 - 2/p, with cheap paths for
// the exponents the experiments actually use.
double pow_surface(double x, double p) {
  if (p == 2.0) return x;
  if (p == 3.0) return std::cbrt(x) * x;          // e = 4/3
  if (p == 1.5) {
    const double c = std::cbrt(x);                 // e = 2/3
    return c * c;
  }
  return std::pow(x, 2.0 - 2.0 / p);
}

struct RatioDraw {
  double ratio;
  double weight;
};

// Streams one Hoelder-ratio draw per call without materializing vectors
// (except for surface rejection, which must buffer candidates).
class RatioKernel {
 public:
  RatioKernel(int n, const ConjugatePair& pair, const DistributionModel& model)
      : n_(n), pair_(pair), model_(model), sp_(pair.p), sq_(pair.q) {}

  RatioDraw draw(CounterRng& rng) const {
    switch (model_.kind) {
      case ModelKind::ConeMeasure:
        return draw_streaming(rng, false);
      case ModelKind::BallUniform: {
        // the radial factors U^{1/n}, V^{1/n} cancel exactly in the ratio;
        // consume them anyway so the stream matches sample_ball
        CompensatedSum prod, wp, wq;
        stream_vector(rng, sp_, pair_.p, prod, wp, nullptr, true);
        (void)rng.next_open();
        stream_vector(rng, sq_, pair_.q, prod, wq, nullptr, false);
        (void)rng.next_open();
        return finish(prod, wp, wq, 1.0);
      }
      case ModelKind::SurfaceMeasure:
        if (model_.surface_method == SurfaceMethod::ImportanceWeight) {
          return draw_streaming(rng, true);
        }
        return draw_surface_rejection(rng);
    }
    throw std::logic_error("RatioKernel: bad model");
  }

 private:
  RatioDraw draw_streaming(CounterRng& rng, bool importance) const {
    CompensatedSum prod, wp, wq;
    double s22x = 0.0, s22y = 0.0;
    stream_vector(rng, sp_, pair_.p, prod, wp, importance ? &s22x : nullptr, true);
    stream_vector(rng, sq_, pair_.q, prod, wq, importance ? &s22y : nullptr, false);
    double weight = 1.0;
    if (importance) {
      weight = std::sqrt(s22x) / std::pow(wp.value(), (pair_.p - 1.0) / pair_.p) *
               std::sqrt(s22y) / std::pow(wq.value(), (pair_.q - 1.0) / pair_.q);
    }
    return finish(prod, wp, wq, weight);
  }

  // Fills magnitude products and sum |v|^p; first=true fills mags_ scratch.
  void stream_vector(CounterRng& rng, const PggSampler& s, double p, CompensatedSum& prod,
                     CompensatedSum& sum_pow, double* s22, bool first) const {
    if (first) {
      mags_.resize(static_cast<std::size_t>(n_));
      for (int i = 0; i < n_; ++i) {
        const auto d = s.draw(rng);
        mags_[static_cast<std::size_t>(i)] = std::abs(d.value);
        sum_pow.add(d.pow_p);
        if (s22) *s22 += pow_surface(d.pow_p, p);
      }
    } else {
      for (int i = 0; i < n_; ++i) {
        const auto d = s.draw(rng);
        prod.add(mags_[static_cast<std::size_t>(i)] * std::abs(d.value));
        sum_pow.add(d.pow_p);
        if (s22) *s22 += pow_surface(d.pow_p, p);
      }
    }
  }

  RatioDraw finish(const CompensatedSum& prod, const CompensatedSum& wp,
                   const CompensatedSum& wq, double weight) const {
    const double ratio = prod.value() / (std::pow(wp.value(), 1.0 / pair_.p) *
                                         std::pow(wq.value(), 1.0 / pair_.q));
    return {ratio, weight};
  }

  RatioDraw draw_surface_rejection(CounterRng& rng) const {
    accept_vector(rng, sp_, pair_.p, true);
    accept_vector(rng, sq_, pair_.q, false);
    CompensatedSum prod;
    for (int i = 0; i < n_; ++i) {
      prod.add(mags_[static_cast<std::size_t>(i)] * other_mags_[static_cast<std::size_t>(i)]);
    }
    // accepted vectors are already unit-norm in their exponents
    RatioDraw rd{prod.value(), 1.0};
    return rd;
  }

  void accept_vector(CounterRng& rng, const PggSampler& s, double p, bool first) const {
    auto& buf = first ? mags_ : other_mags_;
    buf.resize(static_cast<std::size_t>(n_));
    const double envelope = surface_weight_envelope(n_, p);
    for (long iter = 0; iter < 1000000; ++iter) {
      CompensatedSum sum_pow;
      double s22 = 0.0;
      for (int i = 0; i < n_; ++i) {
        const auto d = s.draw(rng);
        buf[static_cast<std::size_t>(i)] = std::abs(d.value);
        sum_pow.add(d.pow_p);
        s22 += pow_surface(d.pow_p, p);
      }
      const double sp = sum_pow.value();
      const double w = std::sqrt(s22) / std::pow(sp, (p - 1.0) / p);
      if (rng.next_double() * envelope <= w) {
        const double inv_norm = 1.0 / std::pow(sp, 1.0 / p);
        for (int i = 0; i < n_; ++i) buf[static_cast<std::size_t>(i)] *= inv_norm;
        return;
      }
    }
    throw ConvergenceError("surface rejection cap hit");
  }

  int n_;
  ConjugatePair pair_;
  DistributionModel model_;
  PggSampler sp_, sq_;
  mutable std::vector<double> mags_, other_mags_;
};

// Runs make_worker()(j, rng) for j in [0, N) split over `shards` workers.
// Streams are per draw index, so the partition never changes any draw.
template <class MakeWorker>
void for_each_draw(long num_samples, int shards, std::uint64_t seed, std::uint64_t arm_tag,
                   const MakeWorker& make_worker) {
  shards = std::max(1, shards);
  if (shards == 1) {
    auto f = make_worker();
    for (long j = 0; j < num_samples; ++j) {
      CounterRng rng(substream(seed, arm_tag, static_cast<std::uint64_t>(j)));
      f(j, rng);
    }
    return;
  }
  std::vector<std::thread> workers;
  const long block = (num_samples + shards - 1) / shards;
  for (int w = 0; w < shards; ++w) {
    const long lo = w * block;
    const long hi = std::min(num_samples, lo + block);
    if (lo >= hi) break;
    workers.emplace_back([&, lo, hi] {
      auto f = make_worker();
      for (long j = lo; j < hi; ++j) {
        CounterRng rng(substream(seed, arm_tag, static_cast<std::uint64_t>(j)));
        f(j, rng);
      }
    });
  }
  for (auto& t : workers) t.join();
}

struct RatioSamples {
  std::vector<double> values;
  std::vector<double> weights;  // empty when all weights are 1
};

RatioSamples collect_ratios(int n, const ConjugatePair& pair, const DistributionModel& model,
                            long num_samples, int shards, std::uint64_t seed,
                            std::uint64_t arm_tag) {
  RatioSamples out;
  out.values.resize(static_cast<std::size_t>(num_samples));
  const bool weighted = model.kind == ModelKind::SurfaceMeasure &&
                        model.surface_method == SurfaceMethod::ImportanceWeight;
  if (weighted) out.weights.resize(static_cast<std::size_t>(num_samples));
  for_each_draw(num_samples, shards, seed, arm_tag, [&] {
    return [&, kernel = RatioKernel(n, pair, model)](long j, CounterRng& rng) {
      const auto rd = kernel.draw(rng);
      out.values[static_cast<std::size_t>(j)] = rd.ratio;
      if (weighted) out.weights[static_cast<std::size_t>(j)] = rd.weight;
    };
  });
  return out;
}

double weighted_mean(const std::vector<double>& v, const std::vector<double>& w) {
  CompensatedSum num, den;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double wi = w.empty() ? 1.0 : w[i];
    num.add(wi * v[i]);
    den.add(wi);
  }
  return num.value() / den.value();
}

double weighted_variance(const std::vector<double>& v, const std::vector<double>& w,
                         double mean) {
  CompensatedSum num, den;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double wi = w.empty() ? 1.0 : w[i];
    const double d = v[i] - mean;
    num.add(wi * d * d);
    den.add(wi);
  }
  return num.value() / den.value();
}

// Delete-one-block jackknife standard error over 20 contiguous blocks.
template <class Estimator>
double jackknife_se(std::size_t sample_size, const Estimator& leave_block_out) {
  const int blocks = 20;
  std::vector<double> est;
  est.reserve(blocks);
  for (int b = 0; b < blocks; ++b) {
    const std::size_t lo = sample_size * static_cast<std::size_t>(b) / blocks;
    const std::size_t hi = sample_size * static_cast<std::size_t>(b + 1) / blocks;
    est.push_back(leave_block_out(lo, hi));
  }
  double mean = 0.0;
  for (double e : est) mean += e;
  mean /= blocks;
  double ss = 0.0;
  for (double e : est) ss += (e - mean) * (e - mean);
  return std::sqrt(ss * (blocks - 1) / blocks);
}

std::vector<double> erase_block(const std::vector<double>& v, std::size_t lo, std::size_t hi) {
  std::vector<double> out;
  out.reserve(v.size() - (hi - lo));
  out.insert(out.end(), v.begin(), v.begin() + static_cast<long>(lo));
  out.insert(out.end(), v.begin() + static_cast<long>(hi), v.end());
  return out;
}

}  // namespace

nlohmann::json resolved_config(const std::string& experiment, const ExperimentConfig& c) {
  const auto pair = conjugate(c.p);
  nlohmann::json j;
  j["experiment"] = experiment;
  j["p"] = c.p;
  j["q"] = pair.q;
  j["model"] = to_string(c.model.kind);
  if (c.model.kind == ModelKind::SurfaceMeasure) {
    j["surface_method"] = to_string(c.model.surface_method);
  }
  j["n"] = c.n;
  j["num_samples"] = c.num_samples;
  j["seed"] = c.seed;
  j["shards"] = c.shards;
  if (!c.t_grid.empty()) j["t_grid"] = c.t_grid;
  if (!c.x_grid.empty()) j["x_grid"] = c.x_grid;
  if (!c.n_grid.empty()) j["n_grid"] = c.n_grid;
  if (experiment == "mdp") j["beta"] = c.beta;
  j["library_version"] = kLibraryVersion;
  return j;
}

namespace {

void validate_basics(const ExperimentConfig& c) {
  conjugate(c.p);  // throws on bad p
  if (c.n < 1) throw ConfigError("n must be >= 1");
  if (c.num_samples < 1) throw ConfigError("num_samples must be >= 1");
  if (c.shards < 1) throw ConfigError("shards must be >= 1");
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string to_csv(const Table& table) {
  std::string out;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (c) out += ',';
    out += table.columns[c];
  }
  out += "\r\n";
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      out += format_double(row[c]);
    }
    out += "\r\n";
  }
  return out;
}

namespace {

nlohmann::json json_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

}  // namespace

nlohmann::json envelope(const ExperimentResult& result) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : result.table.rows) {
    nlohmann::json r;
    for (std::size_t c = 0; c < row.size(); ++c) r[result.table.columns[c]] = json_number(row[c]);
    rows.push_back(std::move(r));
  }
  return nlohmann::json{{"config", result.config},
                        {"rows", std::move(rows)},
                        {"summary", result.summary},
                        {"runtime_seconds", result.runtime_seconds},
                        {"library_version", kLibraryVersion}};
}

std::string result_file_stem(const std::string& experiment, const ExperimentConfig& config) {
  std::string s = experiment;
  s += "_p" + format_double(config.p);
  s += "_" + to_string(config.model.kind);
  if (config.model.kind == ModelKind::SurfaceMeasure) {
    s += "-" + to_string(config.model.surface_method);
  }
  s += "_n" + std::to_string(config.n);
  s += "_N" + std::to_string(config.num_samples);
  s += "_seed" + std::to_string(config.seed);
  return s;
}

ExperimentResult run_clt(const ExperimentConfig& config) {
  validate_basics(config);
  const double t0 = now_seconds();
  const auto pair = conjugate(config.p);
  const auto lc = limit_constants(pair);
  const double sqrt_n = std::sqrt(static_cast<double>(config.n));

  auto samples = collect_ratios(config.n, pair, config.model, config.num_samples, config.shards,
                                config.seed, 1);
  std::vector<double>& zs = samples.values;
  for (double& z : zs) z = sqrt_n * (z - lc.m);
  const std::vector<double>& w = samples.weights;

  const double mean = weighted_mean(zs, w);
  const double variance = weighted_variance(zs, w, mean);
  const EmpiricalDistribution emp(zs, w);
  const double ks = kolmogorov_distance(emp, lc.sigma2);

  const double variance_se = jackknife_se(zs.size(), [&](std::size_t lo, std::size_t hi) {
    const auto v = erase_block(zs, lo, hi);
    const auto ww = w.empty() ? w : erase_block(w, lo, hi);
    const double mu = weighted_mean(v, ww);
    return weighted_variance(v, ww, mu);
  });
  const double ks_se = jackknife_se(zs.size(), [&](std::size_t lo, std::size_t hi) {
    const auto v = erase_block(zs, lo, hi);
    const auto ww = w.empty() ? w : erase_block(w, lo, hi);
    return kolmogorov_distance(EmpiricalDistribution(v, ww), lc.sigma2);
  });

  // 80-bin histogram over +-5 sigma
  const int bins = 80;
  const double sigma = std::sqrt(lc.sigma2);
  const double lo = -5.0 * sigma, hi = 5.0 * sigma;
  const double bin_w = (hi - lo) / bins;
  std::vector<double> counts(bins, 0.0);
  double total_w = 0.0, inside_w = 0.0;
  for (std::size_t i = 0; i < zs.size(); ++i) {
    const double wi = w.empty() ? 1.0 : w[i];
    total_w += wi;
    const int b = static_cast<int>(std::floor((zs[i] - lo) / bin_w));
    if (b >= 0 && b < bins) {
      counts[static_cast<std::size_t>(b)] += wi;
      inside_w += wi;
    }
  }

  ExperimentResult res;
  res.config = resolved_config("clt", config);
  res.table.columns = {"bin_lo", "bin_hi", "weight", "freq"};
  for (int b = 0; b < bins; ++b) {
    res.table.rows.push_back({lo + b * bin_w, lo + (b + 1) * bin_w,
                              counts[static_cast<std::size_t>(b)],
                              counts[static_cast<std::size_t>(b)] / total_w});
  }
  res.summary = {{"m", lc.m},
                 {"sigma2", lc.sigma2},
                 {"mean", mean},
                 {"mean_se", std::sqrt(variance / static_cast<double>(zs.size()))},
                 {"variance", variance},
                 {"variance_se", variance_se},
                 {"ks_vs_normal", ks},
                 {"ks_se", ks_se},
                 {"histogram_coverage", inside_w / total_w},
                 {"draws", config.num_samples}};
  res.runtime_seconds = now_seconds() - t0;
  return res;
}

ExperimentResult run_reverse_holder(const ExperimentConfig& config) {
  validate_basics(config);
  const double t0 = now_seconds();
  const auto pair = conjugate(config.p);
  const auto lc = limit_constants(pair);
  const double sqrt_n = std::sqrt(static_cast<double>(config.n));
  const std::vector<double> t_grid = config.t_grid.empty() ? std::vector<double>{0.0}
                                                           : config.t_grid;

  auto samples = collect_ratios(config.n, pair, config.model, config.num_samples, config.shards,
                                config.seed, 1);
  const auto& w = samples.weights;

  double sum_w = 0.0, sum_w2 = 0.0;
  for (std::size_t i = 0; i < samples.values.size(); ++i) {
    const double wi = w.empty() ? 1.0 : w[i];
    sum_w += wi;
    sum_w2 += wi * wi;
  }
  const double n_eff = sum_w * sum_w / sum_w2;

  ExperimentResult res;
  res.config = resolved_config("reverse-holder", config);
  res.table.columns = {"t", "threshold", "freq", "se"};
  for (double t : t_grid) {
    const double threshold = t / sqrt_n + lc.m;
    CompensatedSum hits;
    for (std::size_t i = 0; i < samples.values.size(); ++i) {
      if (samples.values[i] >= threshold) hits.add(w.empty() ? 1.0 : w[i]);
    }
    const double freq = hits.value() / sum_w;
    const double se = std::sqrt(std::max(freq * (1.0 - freq), 0.0) / n_eff);
    res.table.rows.push_back({t, threshold, freq, se});
  }
  res.summary = {{"m", lc.m}, {"sigma2", lc.sigma2}, {"effective_samples", n_eff}};
  res.runtime_seconds = now_seconds() - t0;
  return res;
}

ExperimentResult run_berry_esseen(const ExperimentConfig& config) {
  validate_basics(config);
  const double t0 = now_seconds();
  const auto pair = conjugate(config.p);
  const auto lc = limit_constants(pair);
  const std::vector<int> n_grid =
      config.n_grid.empty() ? std::vector<int>{50, 200, 1000, 10000} : config.n_grid;

  ExperimentResult res;
  res.config = resolved_config("berry-esseen", config);
  res.table.columns = {"n", "ks", "ks_se", "c_scaled"};
  double c_hat = 0.0;
  for (std::size_t idx = 0; idx < n_grid.size(); ++idx) {
    const int n = n_grid[idx];
    if (n < 2) throw ConfigError("berry-esseen: n_grid entries must be >= 2");
    const double sqrt_n = std::sqrt(static_cast<double>(n));
    auto samples = collect_ratios(n, pair, config.model, config.num_samples, config.shards,
                                  config.seed, 100 + idx);
    for (double& z : samples.values) z = sqrt_n * (z - lc.m);
    const auto& w = samples.weights;
    const double ks = kolmogorov_distance(EmpiricalDistribution(samples.values, w), lc.sigma2);
    const double ks_se = jackknife_se(samples.values.size(), [&](std::size_t lo, std::size_t hi) {
      const auto v = erase_block(samples.values, lo, hi);
      const auto ww = w.empty() ? w : erase_block(w, lo, hi);
      return kolmogorov_distance(EmpiricalDistribution(v, ww), lc.sigma2);
    });
    const double c_scaled = ks * sqrt_n / std::log(static_cast<double>(n));
    c_hat = std::max(c_hat, c_scaled);
    res.table.rows.push_back({static_cast<double>(n), ks, ks_se, c_scaled});
  }
  res.summary = {{"c_hat", c_hat}, {"m", lc.m}, {"sigma2", lc.sigma2}};
  res.runtime_seconds = now_seconds() - t0;
  return res;
}

ExperimentResult run_mdp(const ExperimentConfig& config) {
  validate_basics(config);
  if (!(config.beta > 0.0 && config.beta < 0.5)) {
    throw ConfigError("mdp: beta must lie in (0, 0.5)");
  }
  const double n_d = static_cast<double>(config.n);
  const double b_n = std::pow(n_d, config.beta);
  if (b_n < 3.0 * std::sqrt(std::log(n_d))) {
    throw ConfigError("mdp: speed window violated, need n^beta >= 3 sqrt(log n)");
  }
  const double t0 = now_seconds();
  const auto pair = conjugate(config.p);
  const auto lc = limit_constants(pair);
  const double sqrt_n = std::sqrt(n_d);
  const std::vector<double> t_grid =
      config.t_grid.empty() ? std::vector<double>{0.5 * std::sqrt(lc.sigma2)} : config.t_grid;

  // threshold on the raw ratio per t: R >= m + t b_n / sqrt(n) (upper),
  // R <= m - t b_n / sqrt(n) (lower); integer counts are shard-exact
  const std::size_t nt = t_grid.size();
  const int shards = std::max(1, config.shards);
  std::vector<std::vector<long>> upper(static_cast<std::size_t>(shards),
                                       std::vector<long>(nt, 0));
  std::vector<std::vector<long>> lower = upper;
  const long block = (config.num_samples + shards - 1) / shards;
  for_each_draw(config.num_samples, config.shards, config.seed, 1, [&] {
    return [&, kernel = RatioKernel(config.n, pair, config.model)](long j, CounterRng& rng) {
      const auto rd = kernel.draw(rng);
      auto& up = upper[static_cast<std::size_t>(j / block)];
      auto& lo = lower[static_cast<std::size_t>(j / block)];
      for (std::size_t k = 0; k < nt; ++k) {
        const double offset = t_grid[k] * b_n / sqrt_n;
        if (rd.ratio >= lc.m + offset) ++up[k];
        if (rd.ratio <= lc.m - offset) ++lo[k];
      }
    };
  });

  ExperimentResult res;
  res.config = resolved_config("mdp", config);
  res.table.columns = {"t",          "upper_hits", "upper_freq", "upper_rate",
                       "lower_hits", "lower_freq", "lower_rate", "theory",
                       "flagged"};
  const double b_n2 = b_n * b_n;
  const double N = static_cast<double>(config.num_samples);
  for (std::size_t k = 0; k < nt; ++k) {
    long up = 0, lo = 0;
    for (int s = 0; s < shards; ++s) {
      up += upper[static_cast<std::size_t>(s)][k];
      lo += lower[static_cast<std::size_t>(s)][k];
    }
    const double fu = up / N, fl = lo / N;
    const double ru = up > 0 ? std::log(fu) / b_n2 : -std::numeric_limits<double>::infinity();
    const double rl = lo > 0 ? std::log(fl) / b_n2 : -std::numeric_limits<double>::infinity();
    const double theory = -t_grid[k] * t_grid[k] / (2.0 * lc.sigma2);
    const double flagged = (up == 0 || lo == 0) ? 1.0 : 0.0;
    res.table.rows.push_back({t_grid[k], static_cast<double>(up), fu, ru,
                              static_cast<double>(lo), fl, rl, theory, flagged});
  }
  res.summary = {{"b_n", b_n}, {"beta", config.beta}, {"m", lc.m}, {"sigma2", lc.sigma2}};
  res.runtime_seconds = now_seconds() - t0;
  return res;
}

ExperimentResult run_ldp_tail(const ExperimentConfig& config) {
  validate_basics(config);
  if (config.x_grid.empty()) throw ConfigError("ldp-tail: x_grid must not be empty");
  const double t0 = now_seconds();
  const auto pair = conjugate(config.p);
  const std::vector<int> n_grid =
      config.n_grid.empty() ? std::vector<int>{20, 40, 80} : config.n_grid;

  const CgfEvaluator cgf(pair);
  std::vector<RateResult> rates;
  for (double x : config.x_grid) {
    if (!(x > 0.0)) throw ConfigError("ldp-tail: x levels must be > 0");
    rates.push_back(ldp_rate(x, cgf));
  }
  // hit-count guard: direct MC must be able to see the event at all
  for (std::size_t xi = 0; xi < config.x_grid.size(); ++xi) {
    if (config.x_grid[xi] > 1.0) continue;  // structurally empty event, reported as flagged
    for (int n : n_grid) {
      const double predicted =
          static_cast<double>(config.num_samples) * std::exp(-n * rates[xi].rate);
      if (predicted < 100.0) {
        throw ConfigError("ldp-tail: predicted hit count below 100 for x=" +
                          format_double(config.x_grid[xi]) + ", n=" + std::to_string(n) +
                          "; raise num_samples or lower x");
      }
    }
  }

  ExperimentResult res;
  res.config = resolved_config("ldp-tail", config);
  res.table.columns = {"x", "n", "hits", "p_hat", "log_p_over_n", "rate", "gap", "flagged"};
  for (std::size_t xi = 0; xi < config.x_grid.size(); ++xi) {
    const double x = config.x_grid[xi];
    for (std::size_t ni = 0; ni < n_grid.size(); ++ni) {
      const int n = n_grid[ni];
      const int shards = std::max(1, config.shards);
      std::vector<long> hits_by_shard(static_cast<std::size_t>(shards), 0);
      const long block = (config.num_samples + shards - 1) / shards;
      for_each_draw(config.num_samples, config.shards, config.seed, 1000 + xi * 64 + ni, [&] {
        return [&, kernel = RatioKernel(n, pair, config.model)](long j, CounterRng& rng) {
          if (kernel.draw(rng).ratio >= x) {
            ++hits_by_shard[static_cast<std::size_t>(j / block)];
          }
        };
      });
      long hits = 0;
      for (long h : hits_by_shard) hits += h;
      const double p_hat = static_cast<double>(hits) / static_cast<double>(config.num_samples);
      const double lp = hits > 0 ? std::log(p_hat) / n : -std::numeric_limits<double>::infinity();
      const double gap = hits > 0 && std::isfinite(rates[xi].rate)
                             ? lp + rates[xi].rate
                             : std::numeric_limits<double>::quiet_NaN();
      const double flagged = hits == 0 ? 1.0 : 0.0;
      res.table.rows.push_back({x, static_cast<double>(n), static_cast<double>(hits), p_hat, lp,
                                rates[xi].rate, gap, flagged});
    }
  }
  res.summary = {{"m", limit_constants(pair).m}};
  res.runtime_seconds = now_seconds() - t0;
  return res;
}

ExperimentResult run_measure_comparison(const ExperimentConfig& config) {
  validate_basics(config);
  const double t0 = now_seconds();
  const auto pair = conjugate(config.p);
  const std::vector<int> n_grid =
      config.n_grid.empty() ? std::vector<int>{25, 100, 400} : config.n_grid;

  const DistributionModel cone{ModelKind::ConeMeasure, SurfaceMethod::Rejection};
  const DistributionModel surf_rej{ModelKind::SurfaceMeasure, SurfaceMethod::Rejection};
  const DistributionModel surf_iw{ModelKind::SurfaceMeasure, SurfaceMethod::ImportanceWeight};

  ExperimentResult res;
  res.config = resolved_config("compare-measures", config);
  res.table.columns = {"n", "ks", "dkw_99"};
  std::vector<double> log_n, log_ks;
  for (std::size_t idx = 0; idx < n_grid.size(); ++idx) {
    const int n = n_grid[idx];
    auto a = collect_ratios(n, pair, cone, config.num_samples, config.shards, config.seed,
                            2000 + idx);
    auto b = collect_ratios(n, pair, surf_rej, config.num_samples, config.shards, config.seed,
                            3000 + idx);
    const double ks = two_sample_ks(EmpiricalDistribution(a.values),
                                    EmpiricalDistribution(b.values));
    const double dkw =
        std::sqrt(std::log(2.0 / 0.01) / static_cast<double>(config.num_samples));
    res.table.rows.push_back({static_cast<double>(n), ks, dkw});
    log_n.push_back(std::log(static_cast<double>(n)));
    log_ks.push_back(std::log(std::max(ks, 1e-12)));
  }

  // least-squares slope of log ks vs log n
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double cnt = static_cast<double>(log_n.size());
  for (std::size_t i = 0; i < log_n.size(); ++i) {
    sx += log_n[i];
    sy += log_ks[i];
    sxx += log_n[i] * log_n[i];
    sxy += log_n[i] * log_ks[i];
  }
  const double slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);

  // same target law, two estimators: importance weights vs rejection
  auto iw = collect_ratios(config.n, pair, surf_iw, config.num_samples, config.shards,
                           config.seed, 4000);
  auto rej = collect_ratios(config.n, pair, surf_rej, config.num_samples, config.shards,
                            config.seed, 4001);
  const double iw_ks = two_sample_ks(EmpiricalDistribution(iw.values, iw.weights),
                                     EmpiricalDistribution(rej.values));

  res.summary = {{"decay_exponent", slope},
                 {"iw_vs_reject_ks", iw_ks},
                 {"iw_vs_reject_n", config.n}};
  res.runtime_seconds = now_seconds() - t0;
  return res;
}

}  // namespace holdermc

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "holdermc/conjugate.hpp"
#include "holdermc/experiments.hpp"
#include "holdermc/rate_functions.hpp"
#include "holdermc/sample_io.hpp"
#include "holdermc/sampling.hpp"

namespace {

using namespace holdermc;

int default_shards() {
  if (const char* env = std::getenv("THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

nlohmann::json json_value(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

struct CommonFlags {
  double p = 2.0;
  std::string model = "cone";
  std::string surface_method = "reject";
  int n = 100;
  long num_samples = 10000;
  std::uint64_t seed = 0;
  int shards = default_shards();
  std::string out;
  std::vector<double> t_grid;
  std::vector<double> x_grid;
  std::vector<int> n_grid;
  double beta = 0.25;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool with_model = true) {
  cmd->add_option("--p", f.p, "Hoelder exponent p (q is always derived)")
      ->capture_default_str();
  if (with_model) {
    cmd->add_option("--model", f.model, "Distribution model: ball|cone|surface")
        ->capture_default_str();
    cmd->add_option("--surface-method", f.surface_method,
                    "Surface sampling method: reject|weight")
        ->capture_default_str();
  }
  cmd->add_option("--n", f.n, "Dimension")->capture_default_str();
  cmd->add_option("--num-samples", f.num_samples, "Monte Carlo sample count")
      ->capture_default_str();
  cmd->add_option("--seed", f.seed, "RNG seed")->capture_default_str();
  cmd->add_option("--shards", f.shards, "Worker shards (default: cores, THREADS overrides)")
      ->capture_default_str();
  cmd->add_option("--out", f.out, "Write CSV to this path (JSON envelope goes to <out>.json)");
}

ExperimentConfig to_config(const CommonFlags& f) {
  ExperimentConfig c;
  c.p = f.p;
  c.model.kind = parse_model(f.model);
  c.model.surface_method = parse_surface_method(f.surface_method);
  c.n = f.n;
  c.num_samples = f.num_samples;
  c.seed = f.seed;
  c.shards = f.shards;
  c.t_grid = f.t_grid;
  c.x_grid = f.x_grid;
  c.n_grid = f.n_grid;
  c.beta = f.beta;
  return c;
}

void emit(const ExperimentResult& result, const std::string& out) {
  if (out.empty()) {
    std::cout << envelope(result).dump(2) << "\n";
    return;
  }
  {
    std::ofstream csv(out, std::ios::binary);
    if (!csv) throw std::runtime_error("cannot open " + out);
    csv << to_csv(result.table);
  }
  std::ofstream js(out + ".json", std::ios::binary);
  js << envelope(result).dump(2) << "\n";
  std::cerr << "wrote " << out << " and " << out << ".json\n";
}

using Runner = ExperimentResult (*)(const ExperimentConfig&);

void run_experiment(const CommonFlags& f, Runner runner, const char* name) {
  const ExperimentConfig config = to_config(f);
  // fully-resolved config goes to stderr before any sampling starts
  std::cerr << resolved_config(name, config).dump() << "\n";
  emit(runner(config), f.out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo toolkit for Hoelder-ratio limit theorems on lp balls"};
  app.require_subcommand(1);

  CommonFlags f;
  double x_level = 0.5;
  std::uint64_t stream_id = 0;
  Runner runner = nullptr;
  const char* runner_name = nullptr;

  auto* constants = app.add_subcommand("constants", "Closed-form limit constants for given p");
  constants->add_option("--p", f.p, "Hoelder exponent p")->required();

  auto* sample = app.add_subcommand("sample", "Draw pair samples and write a binary dump");
  add_common(sample, f);
  sample->add_option("--stream-id", stream_id, "RNG stream id")->capture_default_str();

  auto* clt = app.add_subcommand("clt", "CLT experiment: sqrt(n)(R - m) vs N(0, sigma^2)");
  add_common(clt, f);

  auto* rev = app.add_subcommand("reverse-holder",
                                 "Frequency of sum |x_i y_i| >= (t/sqrt(n) + m) |x|_p |y|_q");
  add_common(rev, f);
  rev->add_option("--t-grid", f.t_grid, "Threshold grid (comma separated)")->delimiter(',');

  auto* be = app.add_subcommand("berry-esseen", "Kolmogorov distance decay over an n-grid");
  add_common(be, f);
  be->add_option("--n-grid", f.n_grid, "Dimension grid")->delimiter(',');

  auto* ldp_rate_cmd = app.add_subcommand("ldp-rate", "Numerical large-deviation rate I(x)");
  ldp_rate_cmd->add_option("--p", f.p, "Hoelder exponent p")->capture_default_str();
  ldp_rate_cmd->add_option("--x", x_level, "Single level x");
  ldp_rate_cmd->add_option("--x-grid", f.x_grid, "Level grid (emits CSV)")->delimiter(',');
  ldp_rate_cmd->add_option("--out", f.out, "Write rate-curve CSV here");

  auto* ldp_tail = app.add_subcommand("ldp-tail", "Direct MC tail probabilities vs -I(x)");
  add_common(ldp_tail, f);
  ldp_tail->add_option("--x-grid", f.x_grid, "Levels x > 0")->delimiter(',')->required();
  ldp_tail->add_option("--n-grid", f.n_grid, "Dimension grid")->delimiter(',');

  auto* mdp = app.add_subcommand("mdp", "Moderate-deviation tail rates at speed b_n = n^beta");
  add_common(mdp, f);
  mdp->add_option("--t-grid", f.t_grid, "Threshold grid")->delimiter(',');
  mdp->add_option("--beta", f.beta, "Speed exponent in (0, 0.5)")->capture_default_str();

  auto* cmp = app.add_subcommand("compare-measures",
                                 "Cone vs surface ratio laws across dimensions");
  add_common(cmp, f);
  cmp->add_option("--n-grid", f.n_grid, "Dimension grid")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);  // prints the usage message
    return 1;
  }

  try {
    if (constants->parsed()) {
      const auto pair = conjugate(f.p);
      const auto lc = limit_constants(pair);
      nlohmann::json j = {{"p", pair.p},
                          {"q", pair.q},
                          {"m", lc.m},
                          {"sigma2", lc.sigma2},
                          {"c_norm", lc.c_norm},
                          {"d", {lc.d[0], lc.d[1], lc.d[2]}}};
      for (int r = 0; r < 3; ++r) {
        j["cov"].push_back({lc.cov(r, 0), lc.cov(r, 1), lc.cov(r, 2)});
      }
      std::cout << j.dump(2) << "\n";
      return 0;
    }

    if (sample->parsed()) {
      if (f.out.empty()) throw ConfigError("sample: --out is required");
      const auto pair = conjugate(f.p);
      DistributionModel model{parse_model(f.model), parse_surface_method(f.surface_method)};
      CounterRng rng(RngStream{f.seed, stream_id});
      std::vector<PairSample> samples;
      samples.reserve(static_cast<std::size_t>(f.num_samples));
      for (long i = 0; i < f.num_samples; ++i) {
        samples.push_back(sample_pair(f.n, pair, model, rng));
      }
      std::ofstream os(f.out, std::ios::binary);
      if (!os) throw std::runtime_error("cannot open " + f.out);
      write_sample_dump(os, {f.n, f.p, to_string(model.kind), f.seed, stream_id}, samples);
      std::cerr << "wrote " << samples.size() << " samples to " << f.out << "\n";
      return 0;
    }

    if (ldp_rate_cmd->parsed()) {
      const CgfEvaluator cgf(conjugate(f.p));
      const std::vector<double> xs = f.x_grid.empty() ? std::vector<double>{x_level} : f.x_grid;
      Table table;
      table.columns = {"x", "rate", "converged", "residual"};
      bool all_converged = true;
      for (double x : xs) {
        const auto r = ldp_rate(x, cgf);
        all_converged = all_converged && r.converged;
        table.rows.push_back({x, r.rate, r.converged ? 1.0 : 0.0, r.residual});
      }
      if (f.x_grid.empty() && f.out.empty()) {
        const auto& row = table.rows.front();
        std::cout << nlohmann::json{{"x", row[0]},
                                    {"rate", json_value(row[1])},
                                    {"converged", row[2] != 0.0},
                                    {"residual", json_value(row[3])}}
                         .dump(2)
                  << "\n";
      } else if (f.out.empty()) {
        std::cout << to_csv(table);
      } else {
        std::ofstream csv(f.out, std::ios::binary);
        if (!csv) throw std::runtime_error("cannot open " + f.out);
        csv << to_csv(table);
      }
      return all_converged ? 0 : 3;
    }

    if (clt->parsed()) { runner = run_clt; runner_name = "clt"; }
    if (rev->parsed()) { runner = run_reverse_holder; runner_name = "reverse-holder"; }
    if (be->parsed()) { runner = run_berry_esseen; runner_name = "berry-esseen"; }
    if (ldp_tail->parsed()) { runner = run_ldp_tail; runner_name = "ldp-tail"; }
    if (mdp->parsed()) { runner = run_mdp; runner_name = "mdp"; }
    if (cmp->parsed()) { runner = run_measure_comparison; runner_name = "compare-measures"; }
    if (runner) {
      run_experiment(f, runner, runner_name);
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ConvergenceError& e) {
    std::cerr << "convergence error: " << e.what() << "\n";
    return 3;
  } catch (const QuadratureError& e) {
    std::cerr << "convergence error: " << e.what() << "\n";
    return 3;
  } catch (const std::domain_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

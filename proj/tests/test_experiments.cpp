#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <string>

#include "holdermc/experiments.hpp"

using namespace holdermc;

TEST_CASE("double formatting round-trips and spells infinities") {
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(-3.0) == "-3");
  CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
  CHECK(format_double(std::nan("")) == "nan");
  const double v = 0.18943053086129777;
  CHECK(std::stod(format_double(v)) == v);
}

TEST_CASE("csv layout") {
  Table t;
  t.columns = {"a", "b"};
  t.rows = {{1.0, 2.5}, {3.0, std::numeric_limits<double>::infinity()}};
  CHECK(to_csv(t) == "a,b\r\n1,2.5\r\n3,inf\r\n");
}

TEST_CASE("result file stem") {
  ExperimentConfig c;
  c.p = 2.5;
  c.model.kind = ModelKind::SurfaceMeasure;
  c.model.surface_method = SurfaceMethod::ImportanceWeight;
  c.n = 32;
  c.num_samples = 500;
  c.seed = 9;
  CHECK(result_file_stem("clt", c) == "clt_p2.5_surface-weight_n32_N500_seed9");
  c.model.kind = ModelKind::ConeMeasure;
  CHECK(result_file_stem("mdp", c) == "mdp_p2.5_cone_n32_N500_seed9");
}

TEST_CASE("resolved config materializes every default") {
  ExperimentConfig c;
  c.p = 3.0;
  const auto j = resolved_config("clt", c);
  CHECK(j["experiment"] == "clt");
  CHECK(j["p"] == 3.0);
  CHECK(j["q"].get<double>() == doctest::Approx(1.5));
  CHECK(j["model"] == "cone");
  CHECK_FALSE(j.contains("surface_method"));  // only meaningful for surface draws
  CHECK(j["library_version"] == kLibraryVersion);
  c.model.kind = ModelKind::SurfaceMeasure;
  CHECK(resolved_config("clt", c)["surface_method"] == "reject");
  c.beta = 0.3;
  CHECK(resolved_config("mdp", c)["beta"] == 0.3);
}

TEST_CASE("config validation") {
  ExperimentConfig c;
  c.p = 1.0;
  CHECK_THROWS_AS(run_clt(c), std::domain_error);
  c.p = 2.0;
  c.n = 0;
  CHECK_THROWS_AS(run_clt(c), ConfigError);
  c.n = 10;
  c.num_samples = 0;
  CHECK_THROWS_AS(run_reverse_holder(c), ConfigError);
  c.num_samples = 100;
  c.shards = 0;
  CHECK_THROWS_AS(run_clt(c), ConfigError);
}

static ExperimentConfig small_config() {
  ExperimentConfig c;
  c.p = 2.0;
  c.n = 100;
  c.num_samples = 4000;
  c.seed = 11;
  c.shards = 1;
  return c;
}

TEST_CASE("clt experiment output sanity") {
  const auto res = run_clt(small_config());
  CHECK(res.table.columns == std::vector<std::string>{"bin_lo", "bin_hi", "weight", "freq"});
  CHECK(res.table.rows.size() == 80);
  const double mean = res.summary["mean"].get<double>();
  const double variance = res.summary["variance"].get<double>();
  const double sigma2 = res.summary["sigma2"].get<double>();
  CHECK(std::abs(mean) < 0.05);
  CHECK(variance == doctest::Approx(sigma2).epsilon(0.25));
  CHECK(res.summary["histogram_coverage"].get<double>() > 0.999);
  CHECK(res.summary["ks_vs_normal"].get<double>() < 0.05);
  CHECK(res.runtime_seconds > 0.0);
  // frequencies integrate to the coverage
  double freq = 0.0;
  for (const auto& row : res.table.rows) freq += row[3];
  CHECK(freq == doctest::Approx(res.summary["histogram_coverage"].get<double>()).epsilon(1e-9));
}

TEST_CASE("clt runs under every model") {
  for (auto kind : {ModelKind::BallUniform, ModelKind::SurfaceMeasure}) {
    auto c = small_config();
    c.n = 20;
    c.num_samples = 1500;
    c.model.kind = kind;
    c.model.surface_method = SurfaceMethod::ImportanceWeight;
    const auto res = run_clt(c);
    CHECK(std::abs(res.summary["mean"].get<double>()) < 0.3);
  }
}

TEST_CASE("determinism: identical configs give byte-identical tables") {
  const auto a = run_clt(small_config());
  const auto b = run_clt(small_config());
  CHECK(to_csv(a.table) == to_csv(b.table));
  auto ja = envelope(a), jb = envelope(b);
  ja.erase("runtime_seconds");
  jb.erase("runtime_seconds");
  CHECK(ja == jb);
}

TEST_CASE("shard invariance") {
  auto c1 = small_config();
  auto c8 = small_config();
  c8.shards = 8;
  const auto a = run_clt(c1);
  const auto b = run_clt(c8);
  CHECK(a.summary["mean"].get<double>() ==
        doctest::Approx(b.summary["mean"].get<double>()).epsilon(1e-12));
  CHECK(a.summary["variance"].get<double>() ==
        doctest::Approx(b.summary["variance"].get<double>()).epsilon(1e-12));
  CHECK(to_csv(a.table) == to_csv(b.table));

  auto r1 = c1, r8 = c8;
  r1.t_grid = r8.t_grid = {0.0, 1.0};
  const auto ra = run_reverse_holder(r1);
  const auto rb = run_reverse_holder(r8);
  CHECK(to_csv(ra.table) == to_csv(rb.table));
}

TEST_CASE("reverse Hoelder frequencies") {
  auto c = small_config();
  c.t_grid = {-1e10, 0.0, 1e10};
  const auto res = run_reverse_holder(c);
  CHECK(res.table.columns == std::vector<std::string>{"t", "threshold", "freq", "se"});
  REQUIRE(res.table.rows.size() == 3);
  CHECK(res.table.rows[0][2] == 1.0);           // any ratio clears -1e10
  const double f0 = res.table.rows[1][2];
  CHECK(f0 > 0.3);
  CHECK(f0 < 0.7);
  CHECK(res.table.rows[2][2] == 0.0);           // threshold above 1 is unreachable
  CHECK(res.summary["effective_samples"].get<double>() ==
        doctest::Approx(4000.0).epsilon(1e-12));
}

TEST_CASE("berry-esseen table and c_hat") {
  auto c = small_config();
  c.num_samples = 3000;
  c.n_grid = {25, 100};
  const auto res = run_berry_esseen(c);
  CHECK(res.table.columns == std::vector<std::string>{"n", "ks", "ks_se", "c_scaled"});
  REQUIRE(res.table.rows.size() == 2);
  double c_max = 0.0;
  for (const auto& row : res.table.rows) {
    CHECK(row[3] ==
          doctest::Approx(row[1] * std::sqrt(row[0]) / std::log(row[0])).epsilon(1e-12));
    c_max = std::max(c_max, row[3]);
  }
  CHECK(res.summary["c_hat"].get<double>() == doctest::Approx(c_max).epsilon(1e-12));
  c.n_grid = {1};
  CHECK_THROWS_AS(run_berry_esseen(c), ConfigError);
}

TEST_CASE("mdp window validation") {
  auto c = small_config();
  c.beta = 0.7;
  CHECK_THROWS_AS(run_mdp(c), ConfigError);
  c.beta = 0.0;
  CHECK_THROWS_AS(run_mdp(c), ConfigError);
  // n^beta below the 3 sqrt(log n) floor
  c.beta = 0.25;
  c.n = 10;
  CHECK_THROWS_AS(run_mdp(c), ConfigError);
}

TEST_CASE("mdp counts and rates") {
  ExperimentConfig c;
  c.p = 2.0;
  c.n = 10000;
  c.num_samples = 2000;
  c.seed = 4;
  c.beta = 0.45;  // b_n = 10^{1.8} ~ 63, well above the window floor
  c.t_grid = {0.0};
  const auto res = run_mdp(c);
  REQUIRE(res.table.rows.size() == 1);
  const auto& row = res.table.rows[0];
  // columns: t, upper_hits, upper_freq, upper_rate, lower_hits, lower_freq,
  // lower_rate, theory, flagged
  CHECK(row[1] + row[4] == doctest::Approx(2000.0));  // t = 0 splits the sample
  CHECK(row[2] > 0.4);
  CHECK(row[2] < 0.6);
  CHECK(row[7] == 0.0);
  CHECK(row[8] == 0.0);
  CHECK(res.summary["b_n"].get<double>() == doctest::Approx(std::pow(10000.0, 0.45)));
}

TEST_CASE("ldp tail configuration guards") {
  auto c = small_config();
  CHECK_THROWS_AS(run_ldp_tail(c), ConfigError);  // empty x_grid
  c.x_grid = {-0.1};
  CHECK_THROWS_AS(run_ldp_tail(c), ConfigError);
  // x = 1 has an infinite rate, so the predicted hit count collapses
  c.x_grid = {1.0};
  c.n_grid = {20};
  CHECK_THROWS_AS(run_ldp_tail(c), ConfigError);
}

TEST_CASE("ldp tail flags structurally empty levels above one") {
  auto c = small_config();
  c.n = 5;
  c.num_samples = 200;
  c.x_grid = {1.5};
  c.n_grid = {5};
  const auto res = run_ldp_tail(c);
  REQUIRE(res.table.rows.size() == 1);
  const auto& row = res.table.rows[0];
  CHECK(row[2] == 0.0);                 // hits
  CHECK(std::isinf(row[5]));            // rate
  CHECK(row[7] == 1.0);                 // flagged
}

TEST_CASE("measure comparison at p = 2 sits inside DKW noise") {
  ExperimentConfig c;
  c.p = 2.0;
  c.n = 30;
  c.num_samples = 3000;
  c.seed = 2;
  c.n_grid = {10, 30};
  const auto res = run_measure_comparison(c);
  CHECK(res.table.columns == std::vector<std::string>{"n", "ks", "dkw_99"});
  for (const auto& row : res.table.rows) {
    CHECK(row[1] <= 2.0 * row[2]);  // sigma_2 = mu_2: only sampling noise remains
  }
  CHECK(res.summary.contains("decay_exponent"));
  CHECK(res.summary["iw_vs_reject_ks"].get<double>() <=
        2.0 * std::sqrt(std::log(2.0 / 0.01) / 3000.0));
}

TEST_CASE("envelope carries the full result") {
  const auto res = run_reverse_holder(small_config());
  const auto j = envelope(res);
  CHECK(j.contains("config"));
  CHECK(j.contains("rows"));
  CHECK(j.contains("summary"));
  CHECK(j.contains("runtime_seconds"));
  CHECK(j["library_version"] == kLibraryVersion);
  REQUIRE(j["rows"].size() == res.table.rows.size());
  CHECK(j["rows"][0]["t"] == 0.0);
  CHECK(j["config"]["experiment"] == "reverse-holder");
}

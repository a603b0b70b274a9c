#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "holdermc/sample_io.hpp"

#ifndef HOLDER_CLI_PATH
#error "HOLDER_CLI_PATH must point at the built holder binary"
#endif

namespace {

struct RunResult {
  int exit_code;
  std::string out;
};

RunResult run_cli(const std::string& args) {
  const std::string cmd = std::string(HOLDER_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  std::array<char, 4096> buf;
  std::size_t got;
  while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), got);
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, std::move(out)};
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("holdermc_test_" + name);
}

}  // namespace

TEST_CASE("constants subcommand emits the closed forms") {
  const auto res = run_cli("constants --p 2");
  REQUIRE(res.exit_code == 0);
  const auto j = nlohmann::json::parse(res.out);
  CHECK(j["p"] == 2.0);
  CHECK(j["q"] == 2.0);
  CHECK(j["m"].get<double>() == doctest::Approx(0.6366197723).epsilon(1e-9));
  CHECK(j["sigma2"].get<double>() == doctest::Approx(0.1894305308).epsilon(1e-9));
  REQUIRE(j["cov"].size() == 3);
  REQUIRE(j["cov"][0].size() == 3);
  CHECK(j["cov"][1][1].get<double>() == doctest::Approx(2.0));
  CHECK(j["d"][0] == 1.0);
}

TEST_CASE("missing subcommand and bad flags exit 1") {
  CHECK(run_cli("").exit_code == 1);
  CHECK(run_cli("frobnicate").exit_code == 1);
  CHECK(run_cli("constants").exit_code == 1);  // --p is required
  CHECK(run_cli("clt --num-samples notanumber").exit_code == 1);
}

TEST_CASE("help snapshots list every flag with its default") {
  const auto top = run_cli("--help");
  CHECK(top.exit_code == 0);
  for (const char* sub : {"constants", "sample", "clt", "reverse-holder", "berry-esseen",
                          "ldp-rate", "ldp-tail", "mdp", "compare-measures"}) {
    CHECK(top.out.find(sub) != std::string::npos);
  }
  const auto clt = run_cli("clt --help");
  CHECK(clt.exit_code == 0);
  for (const char* flag : {"--p", "--model", "--surface-method", "--n ", "--num-samples",
                           "--seed", "--shards", "--out"}) {
    CHECK(clt.out.find(flag) != std::string::npos);
  }
  CHECK(clt.out.find("cone") != std::string::npos);    // model default is visible
  CHECK(clt.out.find("10000") != std::string::npos);   // num-samples default is visible
  const auto mdp = run_cli("mdp --help");
  CHECK(mdp.out.find("--beta") != std::string::npos);
  CHECK(mdp.out.find("--t-grid") != std::string::npos);
  CHECK(run_cli("ldp-rate --help").out.find("--x-grid") != std::string::npos);
}

TEST_CASE("invalid configuration exits 2") {
  CHECK(run_cli("constants --p 1.0").exit_code == 2);
  CHECK(run_cli("constants --p -2").exit_code == 2);
  CHECK(run_cli("clt --p 2 --n 0 --num-samples 10").exit_code == 2);
  CHECK(run_cli("clt --p 2 --model pyramid").exit_code == 2);
  CHECK(run_cli("ldp-tail --p 2 --x-grid -1 --num-samples 100").exit_code == 2);
}

TEST_CASE("ldp-rate at x = 0 reports an infinite rate") {
  const auto res = run_cli("ldp-rate --p 2 --x 0");
  REQUIRE(res.exit_code == 0);
  const auto j = nlohmann::json::parse(res.out);
  CHECK(j["rate"] == "inf");
  CHECK(j["converged"] == true);
}

TEST_CASE("ldp-rate grid mode emits CSV") {
  const auto res = run_cli("ldp-rate --p 2 --x-grid -1,0,1.2");
  REQUIRE(res.exit_code == 0);
  CHECK(res.out.rfind("x,rate,converged,residual\r\n", 0) == 0);
  CHECK(res.out.find("-1,inf,1,") != std::string::npos);
  CHECK(res.out.find("1.2,inf,1,") != std::string::npos);
}

TEST_CASE("clt run is deterministic on stdout") {
  const std::string args = "clt --p 2 --n 50 --num-samples 500 --seed 7 --model cone";
  const auto a = run_cli(args);
  const auto b = run_cli(args);
  REQUIRE(a.exit_code == 0);
  auto ja = nlohmann::json::parse(a.out);
  auto jb = nlohmann::json::parse(b.out);
  ja.erase("runtime_seconds");
  jb.erase("runtime_seconds");
  CHECK(ja == jb);
  CHECK(ja["config"]["experiment"] == "clt");
  CHECK(ja["config"]["seed"] == 7);
  CHECK(ja["rows"].size() == 80);
}

TEST_CASE("shard flag leaves results unchanged") {
  const std::string base = "reverse-holder --p 2 --n 50 --num-samples 500 --seed 3 --t-grid 0,1";
  auto a = nlohmann::json::parse(run_cli(base + " --shards 1").out);
  auto b = nlohmann::json::parse(run_cli(base + " --shards 8").out);
  a.erase("runtime_seconds");
  b.erase("runtime_seconds");
  a["config"].erase("shards");
  b["config"].erase("shards");
  CHECK(a == b);
}

TEST_CASE("--out writes CSV plus JSON envelope") {
  const auto csv_path = temp_file("out.csv");
  std::filesystem::remove(csv_path);
  std::filesystem::remove(csv_path.string() + ".json");
  const auto res = run_cli("berry-esseen --p 2 --num-samples 300 --n-grid 10,20 --seed 1 --out " +
                           csv_path.string());
  REQUIRE(res.exit_code == 0);
  CHECK(res.out.empty());  // table goes to the file, not stdout

  std::ifstream csv(csv_path, std::ios::binary);
  REQUIRE(csv.good());
  std::string header;
  std::getline(csv, header);
  CHECK(header == "n,ks,ks_se,c_scaled\r");

  std::ifstream js(csv_path.string() + ".json");
  REQUIRE(js.good());
  nlohmann::json j;
  js >> j;
  CHECK(j["config"]["n_grid"] == nlohmann::json({10, 20}));
  CHECK(j["rows"].size() == 2);
  std::filesystem::remove(csv_path);
  std::filesystem::remove(csv_path.string() + ".json");
}

TEST_CASE("sample dump round trip") {
  const auto path = temp_file("dump.bin");
  std::filesystem::remove(path);
  const auto res = run_cli("sample --p 3 --model cone --n 8 --num-samples 5 --seed 12 "
                           "--stream-id 4 --out " +
                           path.string());
  REQUIRE(res.exit_code == 0);

  std::ifstream is(path, std::ios::binary);
  REQUIRE(is.good());
  const auto dump = holdermc::read_sample_dump(is);
  CHECK(dump.meta.n == 8);
  CHECK(dump.meta.p == 3.0);
  CHECK(dump.meta.model == "cone");
  CHECK(dump.meta.seed == 12);
  CHECK(dump.meta.stream_id == 4);
  REQUIRE(dump.samples.size() == 5);
  for (const auto& s : dump.samples) {
    CHECK(s.x.size() == 8);
    CHECK(s.x.array().abs().pow(3.0).sum() == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(s.weight == 1.0);
  }
  // sample without --out is a configuration error
  CHECK(run_cli("sample --p 3 --n 8 --num-samples 5").exit_code == 2);
  std::filesystem::remove(path);
}

TEST_CASE("mdp window violation surfaces as exit 2") {
  CHECK(run_cli("mdp --p 2 --n 10 --num-samples 100 --beta 0.25").exit_code == 2);
  CHECK(run_cli("mdp --p 2 --n 100 --num-samples 100 --beta 0.9").exit_code == 2);
}

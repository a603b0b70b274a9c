#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "holdermc/sampling.hpp"

namespace holdermc {

inline constexpr const char* kLibraryVersion = "0.1.0";

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  double p = 2.0;
  DistributionModel model;
  int n = 100;
  long num_samples = 10000;
  std::uint64_t seed = 0;
  int shards = 1;
  std::vector<double> t_grid;  // reverse-hoelder / mdp thresholds
  std::vector<double> x_grid;  // ldp tail levels
  std::vector<int> n_grid;     // berry-esseen / ldp / measure-comparison dims
  double beta = 0.25;          // mdp speed: b_n = n^beta
};

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct ExperimentResult {
  nlohmann::json config;
  Table table;
  nlohmann::json summary;
  double runtime_seconds = 0.0;
};

// RFC-4180 CSV; shortest round-trip decimals, infinities spelled "inf".
std::string format_double(double v);
std::string to_csv(const Table& table);

// {config, rows, summary, runtime_seconds, library_version}
nlohmann::json envelope(const ExperimentResult& result);

// Config echo with every default materialized; also stored in the envelope.
nlohmann::json resolved_config(const std::string& experiment, const ExperimentConfig& config);

ExperimentResult run_clt(const ExperimentConfig& config);
ExperimentResult run_reverse_holder(const ExperimentConfig& config);
ExperimentResult run_berry_esseen(const ExperimentConfig& config);
ExperimentResult run_mdp(const ExperimentConfig& config);
ExperimentResult run_ldp_tail(const ExperimentConfig& config);
ExperimentResult run_measure_comparison(const ExperimentConfig& config);

// File name stem experiment_p<...>_<model>_n<...>_N<...>_seed<...>.
std::string result_file_stem(const std::string& experiment, const ExperimentConfig& config);

}  // namespace holdermc

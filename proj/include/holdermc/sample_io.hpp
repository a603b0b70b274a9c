#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "holdermc/sampling.hpp"

namespace holdermc {

static_assert(std::endian::native == std::endian::little,
              "sample dumps are defined little-endian");

// Dump layout: 32-byte header (8-byte magic, u64 JSON length, 16 reserved
// bytes), then the JSON metadata {n, p, model, seed, stream_id}, then
// row-major f64 rows [x_1..x_n y_1..y_n weight].
struct SampleDumpMeta {
  int n;
  double p;
  std::string model;
  std::uint64_t seed;
  std::uint64_t stream_id;
};

inline constexpr char kSampleDumpMagic[8] = {'H', 'M', 'C', 'S', 'A', 'M', 'P', '\0'};

inline void write_sample_dump(std::ostream& os, const SampleDumpMeta& meta,
                              const std::vector<PairSample>& samples) {
  const nlohmann::json j = {{"n", meta.n},
                            {"p", meta.p},
                            {"model", meta.model},
                            {"seed", meta.seed},
                            {"stream_id", meta.stream_id}};
  const std::string json = j.dump();
  char header[32] = {};
  std::memcpy(header, kSampleDumpMagic, 8);
  const std::uint64_t len = json.size();
  std::memcpy(header + 8, &len, 8);
  os.write(header, 32);
  os.write(json.data(), static_cast<std::streamsize>(json.size()));
  for (const auto& s : samples) {
    os.write(reinterpret_cast<const char*>(s.x.data()),
             static_cast<std::streamsize>(sizeof(double)) * s.x.size());
    os.write(reinterpret_cast<const char*>(s.y.data()),
             static_cast<std::streamsize>(sizeof(double)) * s.y.size());
    os.write(reinterpret_cast<const char*>(&s.weight), sizeof(double));
  }
}

struct SampleDump {
  SampleDumpMeta meta;
  std::vector<PairSample> samples;
};

inline SampleDump read_sample_dump(std::istream& is) {
  char header[32];
  is.read(header, 32);
  if (!is || std::memcmp(header, kSampleDumpMagic, 8) != 0) {
    throw std::runtime_error("sample dump: bad magic");
  }
  std::uint64_t len;
  std::memcpy(&len, header + 8, 8);
  std::string json(len, '\0');
  is.read(json.data(), static_cast<std::streamsize>(len));
  const auto j = nlohmann::json::parse(json);
  SampleDump dump;
  dump.meta = {j.at("n").get<int>(), j.at("p").get<double>(),
               j.at("model").get<std::string>(), j.at("seed").get<std::uint64_t>(),
               j.at("stream_id").get<std::uint64_t>()};
  const int n = dump.meta.n;
  for (;;) {
    PairSample s;
    s.x.resize(n);
    s.y.resize(n);
    is.read(reinterpret_cast<char*>(s.x.data()),
            static_cast<std::streamsize>(sizeof(double)) * n);
    if (!is) break;
    is.read(reinterpret_cast<char*>(s.y.data()),
            static_cast<std::streamsize>(sizeof(double)) * n);
    is.read(reinterpret_cast<char*>(&s.weight), sizeof(double));
    if (!is) throw std::runtime_error("sample dump: truncated row");
    dump.samples.push_back(std::move(s));
  }
  return dump;
}

}  // namespace holdermc

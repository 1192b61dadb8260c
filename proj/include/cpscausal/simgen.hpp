#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "cpscausal/data_ingest.hpp"
#include "cpscausal/estimation.hpp"

namespace cpscausal {

// Counter-based generator: draw i of stream `seed` is
// splitmix64_mix(seed + (i + 1) * 0x9E3779B97F4A7C15), so any draw can be
// recomputed without replaying the ones before it.
std::uint64_t splitmix64_mix(std::uint64_t z);

class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}
  std::uint64_t bits(std::uint64_t counter) const;
  // Uniform on [0, 1) from the top 53 bits.
  double uniform(std::uint64_t counter) const;

 private:
  std::uint64_t seed_;
};

// Record r, topological position k uses counter r * num_nodes + k.
DiscreteDataset forward_sample(const BayesNet& net, std::size_t n, std::uint64_t seed);
// Clamped nodes keep the given state in every record; their counter slots go unused.
DiscreteDataset sample_with_clamp(const BayesNet& net, std::size_t n, std::uint64_t seed,
                                  const std::map<std::string, int>& clamp);

// Turns discrete records back into a numeric historian log. Sensor values fall
// uniformly inside their bin (outer bins are widened by the span of the cut
// points), actuators emit their code. The Timestamp column holds the record index.
RawLog render_log(const DiscreteDataset& ds, std::uint64_t seed);

struct FixtureNet {
  std::string name;
  BayesNet net;
  std::map<std::string, int> stage_of;
};

std::vector<std::string> fixture_names();
FixtureNet fixture(std::string_view name);  // throws InvalidArgument for unknown names

}  // namespace cpscausal

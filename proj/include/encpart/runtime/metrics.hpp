#pragma once

#include <cstdint>
#include <string>

namespace encpart::runtime {

struct MetricCounters {
  std::uint64_t ecalls = 0;
  std::uint64_t ocalls = 0;
  std::uint64_t bytes_serialized = 0;
  std::uint64_t allocations = 0;
  std::uint64_t gc_runs = 0;
  std::uint64_t gc_cycles = 0;
  std::uint64_t mirror_registry_size = 0;
  std::uint64_t live_proxies = 0;
  std::uint64_t simulated_cycles = 0;

  bool operator==(const MetricCounters&) const = default;
};

// Where each isolate's simulated cycles went. Sums to simulated_cycles.
struct CostBreakdown {
  std::uint64_t transition = 0;
  std::uint64_t serialization = 0;
  std::uint64_t alloc = 0;
  std::uint64_t field = 0;
  std::uint64_t compute = 0;
  std::uint64_t io = 0;
  std::uint64_t gc = 0;

  std::uint64_t total() const { return transition + serialization + alloc + field + compute + io + gc; }
  bool operator==(const CostBreakdown&) const = default;
};

// `[trusted]` and `[untrusted]` blocks of `key = value` lines.
std::string metrics_report(const MetricCounters& trusted, const MetricCounters& untrusted);

}  // namespace encpart::runtime

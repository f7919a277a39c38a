#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "encpart/dsl/ast.hpp"
#include "encpart/runtime/cost_model.hpp"

namespace encpart::bench {

enum class Workload : std::uint8_t { Cpu, Io };

std::string_view to_string(Workload w);
std::optional<Workload> parse_workload(std::string_view s);

struct SyntheticSpec {
  int n_classes = 100;
  int pct_untrusted = 0;  // 0..100
  Workload workload = Workload::Cpu;
  std::int64_t cpu_units = 100000;  // compute() units per method call
  std::int64_t io_bytes = 4096;     // bytes written per method call
  std::uint64_t seed = 1;

  // Throws std::invalid_argument when out of range.
  void check() const;
};

// round(n * pct / 100), rounding halves up.
int untrusted_count(const SyntheticSpec& spec);

// One worker class per index plus a neutral Main that constructs every
// worker and calls its method once. Which workers are untrusted is a
// seeded choice; for a fixed seed a higher pct only adds untrusted classes.
std::string synthetic_source(const SyntheticSpec& spec);
dsl::Program generate_synthetic(const SyntheticSpec& spec);

// A random valid program mixing trusted, untrusted and neutral classes,
// calls in both directions, lists, file I/O and explicit collections.
// Programs always terminate and never fail at runtime.
std::string random_program(std::uint64_t seed);

struct BenchRow {
  std::string config;
  std::int64_t param = 0;
  std::vector<std::uint64_t> values;  // parallel to BenchReport::columns
};

struct BenchReport {
  std::string suite;
  std::string param_name;
  std::vector<std::string> columns;
  std::vector<BenchRow> rows;

  // Header `config,<param_name>,<columns...>` then one line per row.
  std::string to_csv() const;
  const BenchRow* find(std::string_view config, std::int64_t param) const;
  // Throws std::out_of_range for an unknown row or column.
  std::uint64_t value(std::string_view config, std::int64_t param, std::string_view column) const;
};

enum class Suite : std::uint8_t { ProxyCreation, Rmi, RmiSerialization, GcPerf, GcConsistency, ClassSweep };

std::string_view to_string(Suite s);
std::optional<Suite> parse_suite(std::string_view s);
const std::vector<Suite>& all_suites();

struct SuiteParams {
  std::uint64_t invocations = 10000;
  std::vector<int> payload_sizes = {16, 256, 1024};  // list lengths of 16-byte strings
  int gc_cycles = 1000;
  int gc_objects = 2000;
  SyntheticSpec sweep;  // pct and workload are overridden per row
  std::vector<int> steps = {0, 10, 20, 30, 40, 50, 60, 70, 80, 90, 100};
  std::uint64_t seed = 1;
};

// The four placements, as labelled in the reports.
inline constexpr std::string_view kConcreteIn = "concrete-in";
inline constexpr std::string_view kConcreteOut = "concrete-out";
inline constexpr std::string_view kProxyInOut = "proxy-in->out";
inline constexpr std::string_view kProxyOutIn = "proxy-out->in";

BenchReport run_suite(Suite suite, const SuiteParams& params, const runtime::CostModel& model = {});

// Partitioned cycle totals of the synthetic program for each pct in steps.
BenchReport sweep_partition_ratio(const SyntheticSpec& base, const std::vector<int>& steps,
                                  const runtime::CostModel& model = {});

}  // namespace encpart::bench

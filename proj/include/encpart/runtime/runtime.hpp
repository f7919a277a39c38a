#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "encpart/dsl/ast.hpp"
#include "encpart/partitioner/plan.hpp"
#include "encpart/runtime/cost_model.hpp"
#include "encpart/runtime/errors.hpp"
#include "encpart/runtime/heap.hpp"
#include "encpart/runtime/metrics.hpp"
#include "encpart/runtime/wire.hpp"

namespace encpart::runtime {

using partitioner::Direction;
using partitioner::MarshalKind;
using partitioner::Side;

enum class GcMode : std::uint8_t { Deterministic, Live };

struct RuntimeOptions {
  std::uint64_t gc_threshold_bytes = 64 * 1024;  // heap growth that triggers a collection; 0 disables
  int transition_limit = 256;
  GcMode gc_mode = GcMode::Deterministic;
  // Deterministic mode: run the GC helper scan after every k-th collection
  // of an isolate. 0 means scans happen only when stepped explicitly.
  int scan_every_k = 1;
  std::chrono::milliseconds live_period{1000};
  bool trace = false;
  std::uint64_t step_limit = 0;  // executed statements; 0 means unlimited
};

struct ExecutionResult {
  std::string transcript;
  std::map<std::string, std::string> vfs;
  MetricCounters trusted;
  MetricCounters untrusted;
  CostBreakdown trusted_costs;
  CostBreakdown untrusted_costs;
  std::uint64_t shim_calls = 0;
  int exit_status = 0;
  std::string error;               // empty on success
  std::vector<std::string> trace;  // transition lines when tracing is on

  std::uint64_t ecalls() const { return trusted.ecalls + untrusted.ecalls; }
  std::uint64_t ocalls() const { return trusted.ocalls + untrusted.ocalls; }
  std::uint64_t total_cycles() const { return trusted.simulated_cycles + untrusted.simulated_cycles; }
};

// Two isolates in one process joined by a synchronous transition channel.
class DualRuntime {
 public:
  // Throws InterfaceMismatch if an image stub or relay has no matching
  // descriptor record, ConfigError for an invalid model.
  DualRuntime(partitioner::PartitionPlan plan, CostModel model = {}, RuntimeOptions options = {});
  static DualRuntime load(const std::filesystem::path& plan_dir, CostModel model = {},
                          RuntimeOptions options = {});

  DualRuntime(DualRuntime&&) noexcept;
  DualRuntime& operator=(DualRuntime&&) noexcept;
  ~DualRuntime();

  // Runs `main` in the isolate whose image holds it (untrusted when both do).
  // DSL failures are reported through exit_status/error, not thrown.
  ExecutionResult run_main(const std::vector<std::string>& argv = {});

  // Host API: drives the runtime without a DSL `main`. Objects returned by
  // host_new/host_call stay rooted in that isolate until host_drop.
  Value host_new(Side where, std::string_view class_name, std::vector<Value> args = {});
  Value host_call(Side where, const Value& receiver, std::string_view method, std::vector<Value> args = {});
  void host_drop(Side where, const Value& v);

  GcStats gc_collect(Side side);
  // Scans `side`'s weak proxy list and removes dead proxies' mirrors from
  // the opposite registry. Returns the removed hashes in list order.
  std::vector<std::uint64_t> gc_helper_scan(Side side);

  wire::Bytes marshal(Side side, const Value& v, MarshalKind kind);
  Value unmarshal(Side side, std::span<const std::uint8_t> bytes, MarshalKind kind);

  std::size_t registry_size(Side side) const;
  std::size_t live_proxies(Side side) const;
  std::size_t weak_list_size(Side side) const;
  std::size_t cleared_weak_entries(Side side) const;
  std::size_t indexed_records(Direction d) const;
  MetricCounters metrics(Side side) const;
  CostBreakdown costs(Side side) const;
  std::uint64_t shim_calls() const;
  const std::string& transcript() const;
  const std::map<std::string, std::string>& vfs() const;
  const std::vector<std::string>& trace_lines() const;
  const Heap& heap(Side side) const;
  // Field values of every live concrete instance of `class_name`.
  std::vector<std::vector<Value>> instances_of(Side side, std::string_view class_name) const;

  struct Impl;

 private:
  std::unique_ptr<Impl> impl_;
};

// Plans that place the whole program in one isolate: the trusted one for
// unpartitioned enclave mode, the untrusted one for the reference run.
partitioner::PartitionPlan single_isolate_plan(const dsl::Program& program, Side where);

// Whole program in the trusted isolate; I/O builtins go through the shim.
ExecutionResult run_unpartitioned(const dsl::Program& program, CostModel model = {}, RuntimeOptions options = {});

// Whole program outside the enclave with no shim: the equivalence oracle
// and the no-enclave baseline.
ExecutionResult run_reference(const dsl::Program& program, CostModel model = {}, RuntimeOptions options = {});

std::string display(const Value& v);

}  // namespace encpart::runtime

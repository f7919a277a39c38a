// Runs every acceptance criterion and prints one PASS/FAIL line each.
#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "../support/fixtures.hpp"
#include "../support/wire_gen.hpp"
#include "encpart/bench/bench.hpp"
#include "encpart/cli/cli.hpp"
#include "encpart/dsl/parser.hpp"
#include "encpart/dsl/validate.hpp"
#include "encpart/partitioner/partition.hpp"
#include "encpart/runtime/runtime.hpp"
#include "encpart/runtime/wire.hpp"

namespace fs = std::filesystem;
using namespace encpart;
using bench::BenchReport;
using bench::Suite;
using bench::SuiteParams;
using runtime::CostModel;
using runtime::ExecutionResult;

namespace {

// Pinned tolerances.
constexpr int kRandomPrograms = 200;
constexpr int kWireValues = 10000;
constexpr int kGcCycles = 1000;
const double kProxyInLow = std::pow(10.0, 2.5);
const double kProxyInHigh = std::pow(10.0, 4.5);
constexpr double kProxyOutLow = 1e3;
constexpr double kProxyOutHigh = 1e5;
constexpr double kSerialLow = 5.0;
constexpr double kSerialHigh = 20.0;

struct Check {
  bool ok = true;
  std::string detail;
  void require(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    }
  }
};

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(4);
  s << v;
  return s.str();
}

struct CliRun {
  int code;
  std::string out;
  std::string err;
  bool operator==(const CliRun&) const = default;
};

CliRun cli(std::vector<std::string> args) {
  args.insert(args.begin(), "encpart");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

ExecutionResult partitioned(const dsl::Program& p, runtime::RuntimeOptions opts = {}) {
  return runtime::DualRuntime(partitioner::compute_images(p), {}, opts).run_main();
}

Check oracle_equivalence() {
  Check c;
  int programs = 0;
  auto compare = [&](const std::string& name, const std::string& src) {
    const dsl::Program program = dsl::parse_program(src);
    c.require(dsl::validate(program).ok(), name + " does not validate");
    const ExecutionResult ref = runtime::run_reference(program);
    c.require(ref.exit_status == 0, name + " reference failed: " + ref.error);
    for (std::uint64_t threshold : {std::uint64_t{65536}, std::uint64_t{256}}) {
      runtime::RuntimeOptions opts;
      opts.gc_threshold_bytes = threshold;
      const ExecutionResult part = partitioned(program, opts);
      c.require(part.exit_status == 0, name + " partitioned failed: " + part.error);
      c.require(part.transcript == ref.transcript, name + " transcript differs");
      c.require(part.vfs == ref.vfs, name + " vfs differs");
    }
    ++programs;
  };
  for (const char* f : {"listing1.ep", "listing1_verbose.ep", "trusted_calls_untrusted.ep", "all_neutral.ep"}) {
    compare(f, testing::read_fixture(f));
  }
  for (int seed = 1; seed <= kRandomPrograms; ++seed) {
    compare("seed " + std::to_string(seed), bench::random_program(static_cast<std::uint64_t>(seed)));
  }
  if (c.ok) c.detail = std::to_string(programs) + " programs byte-identical at two gc thresholds";
  return c;
}

Check transition_counts() {
  Check c;
  const ExecutionResult l1 = partitioned(dsl::parse_program(testing::read_fixture("listing1.ep")));
  c.require(l1.exit_status == 0, l1.error);
  c.require(l1.ecalls() == 6, "listing1 ecalls " + std::to_string(l1.ecalls()) + " != 6");
  c.require(l1.ocalls() == 0, "listing1 ocalls " + std::to_string(l1.ocalls()) + " != 0");
  c.require(l1.shim_calls == 0, "listing1 shim calls " + std::to_string(l1.shim_calls) + " != 0");

  bench::SyntheticSpec spec;
  spec.workload = bench::Workload::Io;
  spec.pct_untrusted = 0;
  const ExecutionResult io = partitioned(bench::generate_synthetic(spec));
  // Each trusted class costs one constructor ecall, one work ecall and one file_write shim ocall.
  const auto n = static_cast<std::uint64_t>(spec.n_classes);
  c.require(io.ecalls() == 2 * n, "io ecalls " + std::to_string(io.ecalls()) + " != 200");
  c.require(io.shim_calls == n, "io shim calls " + std::to_string(io.shim_calls) + " != 100");
  c.require(io.ocalls() == n, "io ocalls " + std::to_string(io.ocalls()) + " != 100");
  if (c.ok) c.detail = "listing1 6/0/0, synthetic io 200 ecalls / 100 shim ocalls";
  return c;
}

Check proxy_pruning(const fs::path& scratch) {
  Check c;
  const std::string dir = (scratch / "pruning").string();
  const CliRun p = cli({"partition", testing::fixture_path("listing1.ep"), "-o", dir});
  c.require(p.code == 0, "partition failed: " + p.err);
  const CliRun t = cli({"inspect", dir, "--image", "trusted"});
  c.require(t.code == 0, "inspect failed: " + t.err);
  c.require(t.out.find("  Person proxy: pruned (unreachable)\n") != std::string::npos, "no pruned Person proxy line");
  c.require(t.out.find("Person [") == std::string::npos, "Person class present in trusted image");
  c.require(t.out.find("  Account [trusted]") != std::string::npos, "Account missing");
  c.require(t.out.find("  AccountRegistry [trusted]") != std::string::npos, "AccountRegistry missing");
  if (c.ok) c.detail = "trusted image lists Account, AccountRegistry; Person proxy pruned";
  return c;
}

Check proxy_overhead() {
  Check c;
  const CostModel m;
  const SuiteParams p;
  const BenchReport r = bench::run_suite(Suite::ProxyCreation, p, m);
  const auto n = p.invocations;
  const auto epc = static_cast<std::uint64_t>(std::llround(m.epc_penalty));
  const auto at = [&](std::string_view label) { return r.value(label, static_cast<std::int64_t>(n), "simulated_cycles"); };
  c.require(at(bench::kConcreteOut) == n * m.alloc_cost, "concrete-out cycles");
  c.require(at(bench::kConcreteIn) == n * m.alloc_cost * epc, "concrete-in cycles");
  c.require(at(bench::kProxyOutIn) == n * (m.ecall_cost + m.alloc_cost + m.alloc_cost * epc), "proxy-out->in cycles");
  c.require(at(bench::kProxyInOut) == n * (m.ocall_cost + m.alloc_cost * epc + m.alloc_cost), "proxy-in->out cycles");
  const double in = double(at(bench::kProxyInOut)) / double(at(bench::kConcreteIn));
  const double out = double(at(bench::kProxyOutIn)) / double(at(bench::kConcreteOut));
  c.require(in >= kProxyInLow && in <= kProxyInHigh, "in ratio " + fmt(in) + " outside [10^2.5, 10^4.5]");
  c.require(out >= kProxyOutLow && out < kProxyOutHigh, "out ratio " + fmt(out) + " outside [10^3, 10^5)");
  if (c.ok) c.detail = "in->out/concrete-in " + fmt(in) + ", out->in/concrete-out " + fmt(out) + ", cycles exact";
  return c;
}

Check serialization_impact() {
  Check c;
  const CostModel m;
  SuiteParams p;
  p.payload_sizes = {16, 256, 1024};
  const BenchReport r = bench::run_suite(Suite::RmiSerialization, p, m);
  for (int size : p.payload_sizes) {
    // Tag and u32 count, then per 16-byte string a tag, a u32 length and the bytes.
    const std::uint64_t encoded = 1 + 4 + static_cast<std::uint64_t>(size) * (1 + 4 + 16);
    for (std::string label : {std::string(bench::kProxyOutIn), std::string(bench::kProxyInOut)}) {
      const auto bare = r.value(label, size, "simulated_cycles");
      const auto with = r.value(label + "+s", size, "simulated_cycles");
      c.require(with - bare == p.invocations * m.serialize_per_byte * encoded,
                label + " payload " + std::to_string(size) + " cost difference is not exact");
    }
  }
  const double ratio = double(r.value(std::string(bench::kProxyInOut) + "+s", 1024, "simulated_cycles")) /
                       double(r.value(bench::kProxyInOut, 1024, "simulated_cycles"));
  c.require(ratio >= kSerialLow && ratio <= kSerialHigh, "ratio " + fmt(ratio) + " outside [5, 20]");
  if (c.ok) c.detail = "exact differences for m in {16,256,1024}, N=10000; in-enclave ratio at 1024 = " + fmt(ratio);
  return c;
}

Check gc_consistency() {
  Check c;
  SuiteParams p;
  p.gc_cycles = kGcCycles;
  const BenchReport r = bench::run_suite(Suite::GcConsistency, p);
  std::uint64_t violations = 0, scans = 0;
  for (const auto& row : r.rows) {
    const auto registry = r.value(row.config, row.param, "registry_size");
    const auto live = r.value(row.config, row.param, "live_proxies");
    violations += r.value(row.config, row.param, "violations");
    if (registry < live) ++violations;
    if (row.config.ends_with("/scan")) {
      ++scans;
      if (registry != live) ++violations;
    }
  }
  c.require(scans == 2 * kGcCycles, "expected 2000 scan steps, saw " + std::to_string(scans));
  c.require(violations == 0, std::to_string(violations) + " violations");
  if (c.ok) c.detail = "0 violations over 1000 cycles in both directions";
  return c;
}

Check gc_overhead() {
  Check c;
  const CostModel m;
  const SuiteParams p;
  const BenchReport r = bench::run_suite(Suite::GcPerf, p, m);
  const auto n = static_cast<std::int64_t>(p.gc_objects);
  const auto in = r.value("gc-in", n, "gc_cycles");
  const auto out = r.value("gc-out", n, "gc_cycles");
  c.require(r.value("gc-in", n, "live_bytes") == r.value("gc-out", n, "live_bytes"), "heaps differ");
  c.require(out > 0, "no gc work measured");
  c.require(in == static_cast<std::uint64_t>(std::llround(m.epc_penalty)) * out,
            "ratio " + fmt(double(in) / double(out)) + " != epc_penalty " + fmt(m.epc_penalty));
  if (c.ok) c.detail = "gc_cycles in/out = " + fmt(double(in) / double(out)) + " = epc_penalty";
  return c;
}

Check sweep_trend() {
  Check c;
  const std::vector<int> steps = {0, 10, 20, 30, 40, 50, 60, 70, 80, 90, 100};
  SuiteParams p;
  p.steps = steps;
  const BenchReport r = bench::run_suite(Suite::ClassSweep, p);
  for (const char* w : {"io", "cpu"}) {
    const std::string wl(w);
    const bool strict = wl == "io";
    for (std::size_t i = 1; i < steps.size(); ++i) {
      const auto prev = r.value("partitioned-" + wl, steps[i - 1], "simulated_cycles");
      const auto cur = r.value("partitioned-" + wl, steps[i], "simulated_cycles");
      c.require(strict ? cur < prev : cur <= prev, wl + " not " + (strict ? "strictly decreasing" : "non-increasing") +
                                                       " at " + std::to_string(steps[i]));
    }
    c.require(r.value("partitioned-" + wl, 100, "simulated_cycles") == r.value("no-enclave-" + wl, 100, "simulated_cycles"),
              wl + " pct=100 differs from the no-enclave baseline");
  }
  if (c.ok) c.detail = "io strictly decreasing, cpu non-increasing, pct=100 equals no-enclave";
  return c;
}

Check marshal_round_trip() {
  Check c;
  std::mt19937_64 rng(0xacce97);
  int mutants_decoded = 0;
  for (int i = 0; i < kWireValues && c.ok; ++i) {
    const wire::Value v = testing::random_wire_value(rng);
    const wire::Bytes b = wire::encode(v);
    const wire::Value back = wire::decode(b);
    c.require(back == v, "decode(encode(v)) != v at value " + std::to_string(i));
    c.require(wire::encode(back) == b, "re-encoding differs at value " + std::to_string(i));
    c.require(wire::encoded_size(v) == b.size(), "encoded_size mismatch at value " + std::to_string(i));
    // Any other byte string that decodes must be the canonical encoding of a different value.
    wire::Bytes m = b;
    m[rng() % m.size()] ^= static_cast<std::uint8_t>(1u << (rng() % 8));
    try {
      const wire::Value w = wire::decode(m);
      ++mutants_decoded;
      c.require(wire::encode(w) == m, "non-canonical mutant accepted at value " + std::to_string(i));
      c.require(!(w == v), "two encodings for one value at " + std::to_string(i));
    } catch (const wire::WireError&) {
    }
  }
  if (c.ok) {
    c.detail = std::to_string(kWireValues) + " values round-trip; " + std::to_string(mutants_decoded) +
               " decodable mutants all canonical and distinct";
  }
  return c;
}

Check determinism(const fs::path& scratch) {
  Check c;
  const std::string listing = testing::fixture_path("listing1_verbose.ep");
  std::vector<std::vector<std::string>> commands;
  for (const char* run : {"a", "b"}) {
    const std::string dir = (scratch / "det" / run).string();
    const CliRun p = cli({"partition", listing, "-o", dir + "/plan"});
    c.require(p.code == 0, "partition failed");
    const CliRun r = cli({"run", dir + "/plan", "--trace", "transitions", "--metrics", dir + "/metrics.txt",
                          "--dump-fs", dir + "/fs"});
    c.require(r.code == 0, "run failed: " + r.err);
    const CliRun b = cli({"bench", "all", "--invocations", "200", "--gc-cycles", "50", "--classes", "20", "--out",
                          dir + "/bench.csv"});
    c.require(b.code == 0, "bench failed: " + b.err);
  }
  const fs::path a = scratch / "det" / "a";
  const fs::path b = scratch / "det" / "b";
  for (const char* f : {"plan/trusted.img", "plan/untrusted.img", "plan/interface.edl.txt", "metrics.txt",
                        "fs/accounts.txt", "bench.csv"}) {
    c.require(fs::exists(a / f), std::string(f) + " missing");
    c.require(slurp(a / f) == slurp(b / f), std::string(f) + " differs between runs");
  }
  const std::string plan = (a / "plan").string();
  const std::vector<std::vector<std::string>> twice = {
      {"partition", listing, "-o", (scratch / "det" / "c").string()},
      {"run", plan, "--trace", "transitions"},
      {"run", plan, "--trace", "transitions", "--gc-scan", "every-k=1", "--gc-threshold", "256"},
      {"run-unpartitioned", listing, "--trace", "transitions"},
      {"run-unpartitioned", listing, "--reference"},
      {"compare", listing},
      {"compare", listing, "--plan", plan},
      {"inspect", plan, "--image", "trusted"},
      {"inspect", plan, "--image", "untrusted"},
      {"bench", "rmi", "--invocations", "100", "--seed", "3"},
      {"bench", "gc_consistency", "--gc-cycles", "40", "--seed", "3"},
  };
  for (const auto& cmd : twice) {
    const CliRun first = cli(cmd);
    c.require(first.code == 0, cmd[0] + " failed: " + first.err);
    c.require(cli(cmd) == first, cmd[0] + " output differs between runs");
  }
  if (c.ok) c.detail = "images, descriptors, traces, metrics, vfs, inspect and bench csv byte-identical on rerun";
  return c;
}

}  // namespace

int main() {
  const fs::path scratch = fs::temp_directory_path() / ("encpart_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(scratch);
  fs::create_directories(scratch);

  const std::vector<std::pair<std::string, std::function<Check()>>> criteria = {
      {"oracle equivalence", oracle_equivalence},
      {"transition count exactness", transition_counts},
      {"proxy pruning", [&] { return proxy_pruning(scratch); }},
      {"proxy overhead bands", proxy_overhead},
      {"serialization impact", serialization_impact},
      {"gc consistency", gc_consistency},
      {"gc-in-enclave overhead", gc_overhead},
      {"partition sweep trend", sweep_trend},
      {"marshal round-trip", marshal_round_trip},
      {"determinism", [&] { return determinism(scratch); }},
  };

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Check result;
    try {
      result = criteria[i].second();
    } catch (const std::exception& e) {
      result.ok = false;
      result.detail = std::string("exception: ") + e.what();
    }
    if (!result.ok) ++failed;
    std::cout << (result.ok ? "PASS" : "FAIL") << "  criterion " << (i + 1) << ": " << criteria[i].first << " -- "
              << result.detail << std::endl;
  }
  fs::remove_all(scratch);
  std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size() << " criteria passed"
            << std::endl;
  return failed == 0 ? 0 : 1;
}

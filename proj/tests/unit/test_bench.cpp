#include <doctest.h>

#include <cmath>

#include "encpart/bench/bench.hpp"
#include "encpart/dsl/parser.hpp"
#include "encpart/dsl/validate.hpp"
#include "encpart/partitioner/partition.hpp"
#include "encpart/runtime/runtime.hpp"

using namespace encpart::bench;
using encpart::runtime::CostModel;
using encpart::runtime::DualRuntime;
using encpart::runtime::ExecutionResult;
using encpart::runtime::RuntimeOptions;

namespace {

int count_of(const std::string& text, const std::string& needle) {
  int n = 0;
  for (auto at = text.find(needle); at != std::string::npos; at = text.find(needle, at + 1)) ++n;
  return n;
}

ExecutionResult partitioned(const encpart::dsl::Program& p, RuntimeOptions opts = {}) {
  return DualRuntime(encpart::partitioner::compute_images(p), {}, opts).run_main();
}

}  // namespace

TEST_CASE("synthetic programs: annotation counts, validity, determinism") {
  for (int n : {1, 7, 20, 100}) {
    for (int pct : {0, 10, 33, 50, 67, 100}) {
      SyntheticSpec spec;
      spec.n_classes = n;
      spec.pct_untrusted = pct;
      spec.seed = static_cast<std::uint64_t>(n * 1000 + pct);
      const std::string src = synthetic_source(spec);
      const int expected_u = static_cast<int>(std::floor(n * pct / 100.0 + 0.5));
      CHECK(count_of(src, "@Untrusted") == expected_u);
      CHECK(count_of(src, "@Trusted") == n - expected_u);
      CHECK(encpart::dsl::validate(generate_synthetic(spec)).ok());
      CHECK(synthetic_source(spec) == src);
    }
  }
  // A higher pct keeps every class that was already untrusted.
  SyntheticSpec a;
  a.n_classes = 30;
  a.pct_untrusted = 30;
  SyntheticSpec b = a;
  b.pct_untrusted = 60;
  const auto pa = generate_synthetic(a);
  const auto pb = generate_synthetic(b);
  for (std::size_t i = 0; i < pa.classes.size(); ++i) {
    if (pa.classes[i].annotation == encpart::dsl::Annotation::Untrusted) {
      CHECK(pb.classes[i].annotation == encpart::dsl::Annotation::Untrusted);
    }
  }
  SyntheticSpec bad;
  bad.pct_untrusted = 101;
  CHECK_THROWS(synthetic_source(bad));
}

TEST_CASE("synthetic io transitions follow the analytic counts") {
  for (int pct : {0, 10, 25, 50, 90, 100}) {
    SyntheticSpec spec;
    spec.workload = Workload::Io;
    spec.pct_untrusted = pct;
    spec.io_bytes = 64;
    const int n_trusted = spec.n_classes - untrusted_count(spec);
    const auto program = generate_synthetic(spec);
    ExecutionResult r = partitioned(program);
    REQUIRE_MESSAGE(r.exit_status == 0, r.error);
    CHECK(r.ecalls() == static_cast<std::uint64_t>(2 * n_trusted));
    CHECK(r.shim_calls == static_cast<std::uint64_t>(n_trusted));
    CHECK(r.ocalls() == static_cast<std::uint64_t>(n_trusted));
    ExecutionResult ref = encpart::runtime::run_reference(program);
    CHECK(r.transcript == ref.transcript);
    CHECK(r.vfs == ref.vfs);
    CHECK(r.vfs.size() == 100);
  }
}

TEST_CASE("random programs validate, partition and match the reference") {
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    const std::string src = random_program(seed);
    CAPTURE(seed);
    CHECK(random_program(seed) == src);
    const auto program = encpart::dsl::parse_program(src);
    const auto report = encpart::dsl::validate(program);
    REQUIRE_MESSAGE(report.ok(), src);
    ExecutionResult ref = encpart::runtime::run_reference(program);
    REQUIRE_MESSAGE(ref.exit_status == 0, ref.error);
    for (std::uint64_t threshold : {std::uint64_t{65536}, std::uint64_t{256}}) {
      RuntimeOptions opts;
      opts.gc_threshold_bytes = threshold;
      ExecutionResult part = partitioned(program, opts);
      REQUIRE_MESSAGE(part.exit_status == 0, part.error);
      CHECK(part.transcript == ref.transcript);
      CHECK(part.vfs == ref.vfs);
    }
  }
}

TEST_CASE("proxy creation costs follow the model") {
  SuiteParams p;
  p.invocations = 500;
  const CostModel m;
  BenchReport r = run_suite(Suite::ProxyCreation, p, m);
  const auto n = static_cast<std::uint64_t>(p.invocations);
  const auto epc = static_cast<std::uint64_t>(m.epc_penalty);
  const std::uint64_t out = m.alloc_cost;
  const std::uint64_t in = m.alloc_cost * epc;
  CHECK(r.value(kConcreteOut, 500, "simulated_cycles") == n * out);
  CHECK(r.value(kConcreteIn, 500, "simulated_cycles") == n * in);
  CHECK(r.value(kProxyOutIn, 500, "simulated_cycles") == n * (m.ecall_cost + out + in));
  CHECK(r.value(kProxyInOut, 500, "simulated_cycles") == n * (m.ocall_cost + in + out));
  CHECK(r.value(kProxyOutIn, 500, "ecalls") == n);
  CHECK(r.value(kProxyInOut, 500, "ocalls") == n);
  const double ratio_out = double(r.value(kProxyOutIn, 500, "simulated_cycles")) /
                           double(r.value(kConcreteOut, 500, "simulated_cycles"));
  const double ratio_in = double(r.value(kProxyInOut, 500, "simulated_cycles")) /
                          double(r.value(kConcreteIn, 500, "simulated_cycles"));
  CHECK(ratio_out >= 1e3);
  CHECK(ratio_out < 1e5);
  CHECK(ratio_in >= std::pow(10.0, 2.5));
  CHECK(ratio_in <= std::pow(10.0, 4.5));
}

TEST_CASE("rmi costs follow the model") {
  SuiteParams p;
  p.invocations = 300;
  const CostModel m;
  BenchReport r = run_suite(Suite::Rmi, p, m);
  const auto n = p.invocations;
  const auto epc = static_cast<std::uint64_t>(m.epc_penalty);
  const std::uint64_t int_bytes = 9;
  CHECK(r.value(kConcreteOut, 300, "simulated_cycles") == n * m.field_access_cost);
  CHECK(r.value(kConcreteIn, 300, "simulated_cycles") == n * m.field_access_cost * epc);
  CHECK(r.value(kProxyOutIn, 300, "simulated_cycles") ==
        n * (m.ecall_cost + int_bytes * m.serialize_per_byte + m.field_access_cost * epc));
  CHECK(r.value(kProxyInOut, 300, "simulated_cycles") ==
        n * (m.ocall_cost + int_bytes * m.serialize_per_byte + m.field_access_cost));
  CHECK(r.value(kProxyOutIn, 300, "bytes") == n * int_bytes);
}

TEST_CASE("serialized payloads add exactly their encoded size") {
  SuiteParams p;
  p.invocations = 400;
  p.payload_sizes = {0, 3, 64, 1024};
  const CostModel m;
  BenchReport r = run_suite(Suite::RmiSerialization, p, m);
  for (int size : p.payload_sizes) {
    const std::uint64_t encoded = 5 + 21 * static_cast<std::uint64_t>(size);
    for (auto label : {kProxyOutIn, kProxyInOut}) {
      const std::string l(label);
      const auto bare = r.value(l, size, "simulated_cycles");
      const auto with = r.value(l + "+s", size, "simulated_cycles");
      CHECK(with - bare == p.invocations * m.serialize_per_byte * encoded);
      CHECK(r.value(l + "+s", size, "bytes") == p.invocations * encoded);
    }
    // Local calls never marshal.
    CHECK(r.value(std::string(kConcreteOut) + "+s", size, "simulated_cycles") ==
          r.value(kConcreteOut, size, "simulated_cycles"));
  }
  const double ratio = double(r.value(std::string(kProxyInOut) + "+s", 1024, "simulated_cycles")) /
                       double(r.value(kProxyInOut, 1024, "simulated_cycles"));
  CHECK(ratio >= 5.0);
  CHECK(ratio <= 20.0);
}

TEST_CASE("gc in the enclave costs epc_penalty times more") {
  for (double epc : {1.0, 4.0, 10.0}) {
    CostModel m;
    m.epc_penalty = epc;
    SuiteParams p;
    p.gc_objects = 501;
    BenchReport r = run_suite(Suite::GcPerf, p, m);
    CHECK(r.value("gc-in", 501, "live_bytes") == r.value("gc-out", 501, "live_bytes"));
    CHECK(r.value("gc-in", 501, "swept_objects") == 250);
    CHECK(r.value("gc-in", 501, "gc_cycles") ==
          static_cast<std::uint64_t>(epc) * r.value("gc-out", 501, "gc_cycles"));
  }
}

TEST_CASE("gc consistency suite records no violations") {
  SuiteParams p;
  p.gc_cycles = 200;
  BenchReport r = run_suite(Suite::GcConsistency, p);
  CHECK(r.rows.size() == 200 * 2 * 4);
  for (const auto& row : r.rows) {
    CHECK(row.values[0] >= row.values[1]);
    CHECK(row.values[2] == 0);
    if (row.config.find("/scan") != std::string::npos) CHECK(row.values[0] == row.values[1]);
  }
}

TEST_CASE("partition sweep trends") {
  SyntheticSpec spec;
  spec.n_classes = 40;
  const std::vector<int> steps = {0, 10, 20, 30, 40, 50, 60, 70, 80, 90, 100};
  spec.workload = Workload::Io;
  BenchReport io = sweep_partition_ratio(spec, steps);
  spec.workload = Workload::Cpu;
  BenchReport cpu = sweep_partition_ratio(spec, steps);
  REQUIRE(io.rows.size() == steps.size());
  for (std::size_t i = 1; i < steps.size(); ++i) {
    CHECK(io.rows[i].values[3] < io.rows[i - 1].values[3]);
    CHECK(cpu.rows[i].values[3] <= cpu.rows[i - 1].values[3]);
  }
  SuiteParams p;
  p.sweep = spec;
  p.steps = {0, 50, 100};
  BenchReport sweep = run_suite(Suite::ClassSweep, p);
  for (const char* w : {"io", "cpu"}) {
    const std::string suffix(w);
    CHECK(sweep.value("partitioned-" + suffix, 100, "simulated_cycles") ==
          sweep.value("no-enclave-" + suffix, 100, "simulated_cycles"));
    CHECK(sweep.value("unpartitioned-" + suffix, 0, "ecalls") == 0);
  }
}

TEST_CASE("reports are deterministic csv") {
  SuiteParams p;
  p.invocations = 50;
  p.gc_cycles = 20;
  p.payload_sizes = {4};
  for (Suite s : {Suite::ProxyCreation, Suite::Rmi, Suite::RmiSerialization, Suite::GcPerf, Suite::GcConsistency}) {
    const std::string a = run_suite(s, p).to_csv();
    CHECK(a == run_suite(s, p).to_csv());
  }
  BenchReport r = run_suite(Suite::Rmi, p);
  const std::string csv = r.to_csv();
  CHECK(csv.rfind("config,invocations,ecalls,ocalls,bytes,simulated_cycles\n", 0) == 0);
  CHECK(count_of(csv, "\n") == 5);
  CHECK(parse_suite("gc_perf") == Suite::GcPerf);
  CHECK_FALSE(parse_suite("nope"));
  CHECK_THROWS_AS(r.value("missing", 0, "ecalls"), std::out_of_range);
}

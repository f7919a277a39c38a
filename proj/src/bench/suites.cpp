#include <random>
#include <sstream>
#include <stdexcept>

#include "encpart/bench/bench.hpp"
#include "encpart/dsl/parser.hpp"
#include "encpart/partitioner/partition.hpp"
#include "encpart/runtime/runtime.hpp"

namespace encpart::bench {

using runtime::CostModel;
using runtime::DualRuntime;
using runtime::ExecutionResult;
using runtime::MetricCounters;
using runtime::RuntimeOptions;
using runtime::Side;
using runtime::Value;

std::string_view to_string(Suite s) {
  switch (s) {
    case Suite::ProxyCreation: return "proxy_creation";
    case Suite::Rmi: return "rmi";
    case Suite::RmiSerialization: return "rmi_serialization";
    case Suite::GcPerf: return "gc_perf";
    case Suite::GcConsistency: return "gc_consistency";
    case Suite::ClassSweep: return "class_sweep";
  }
  return "?";
}

const std::vector<Suite>& all_suites() {
  static const std::vector<Suite> suites = {Suite::ProxyCreation, Suite::Rmi,           Suite::RmiSerialization,
                                            Suite::GcPerf,        Suite::GcConsistency, Suite::ClassSweep};
  return suites;
}

std::optional<Suite> parse_suite(std::string_view s) {
  for (Suite x : all_suites()) {
    if (to_string(x) == s) return x;
  }
  return std::nullopt;
}

std::string BenchReport::to_csv() const {
  std::ostringstream out;
  out << "config," << param_name;
  for (const auto& c : columns) out << ',' << c;
  out << '\n';
  for (const auto& r : rows) {
    out << r.config << ',' << r.param;
    for (auto v : r.values) out << ',' << v;
    out << '\n';
  }
  return out.str();
}

const BenchRow* BenchReport::find(std::string_view config, std::int64_t param) const {
  for (const auto& r : rows) {
    if (r.config == config && r.param == param) return &r;
  }
  return nullptr;
}

std::uint64_t BenchReport::value(std::string_view config, std::int64_t param, std::string_view column) const {
  const BenchRow* r = find(config, param);
  if (!r) throw std::out_of_range("no row " + std::string(config) + "/" + std::to_string(param));
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == column) return r->values.at(i);
  }
  throw std::out_of_range("no column " + std::string(column));
}

namespace {

// `In` lives in the enclave, `Out` outside. Trusted code touches every
// `Out` member so that the enclave image keeps the matching ocall proxy.
constexpr const char* kMicroSource = R"(
public class Node {
  private int v;
  private Node next;

  public Node(int v0) {
    this.v = v0;
  }

  public void link(Node n) {
    this.next = n;
  }
}

@Trusted
public class In {
  private int v;

  public In() {}

  public void set(int x) {
    this.v = x;
  }

  public void ping() {}

  public void take(list<str> payload) {}

  public void reach(Out o, list<str> payload) {
    Out fresh = new Out();
    o.set(1);
    o.ping();
    o.take(payload);
    Node n = new Node(1);
    n.link(n);
  }
}

@Untrusted
public class Out {
  private int v;

  public Out() {}

  public void set(int x) {
    this.v = x;
  }

  public void ping() {}

  public void take(list<str> payload) {}
}

public class Main {
  public static void main() {
    Out o = new Out();
    In i = new In();
    i.set(1);
    i.ping();
    i.take([]);
    i.reach(o, []);
    Node n = new Node(1);
    n.link(n);
  }
}
)";

struct Placement {
  std::string_view label;
  Side caller;
  const char* cls;
};

// Who runs the code and which class it touches.
const Placement kPlacements[] = {
    {kConcreteIn, Side::Trusted, "In"},
    {kConcreteOut, Side::Untrusted, "Out"},
    {kProxyInOut, Side::Trusted, "Out"},
    {kProxyOutIn, Side::Untrusted, "In"},
};

const std::vector<std::string> kCountColumns = {"ecalls", "ocalls", "bytes", "simulated_cycles"};

DualRuntime micro_runtime(const CostModel& model) {
  RuntimeOptions opts;
  opts.gc_threshold_bytes = 0;
  opts.scan_every_k = 0;
  return DualRuntime(partitioner::compute_images(dsl::parse_program(kMicroSource)), model, opts);
}

struct Totals {
  std::uint64_t ecalls = 0, ocalls = 0, bytes = 0, cycles = 0;
};

Totals totals(const DualRuntime& rt) {
  const MetricCounters t = rt.metrics(Side::Trusted);
  const MetricCounters u = rt.metrics(Side::Untrusted);
  return {t.ecalls + u.ecalls, t.ocalls + u.ocalls, t.bytes_serialized + u.bytes_serialized,
          t.simulated_cycles + u.simulated_cycles};
}

// Accumulates metric deltas over measured windows only, so that the
// housekeeping collections between windows stay out of the numbers.
struct Meter {
  const DualRuntime& rt;
  Totals sum;
  Totals start;

  void begin() { start = totals(rt); }
  void end() {
    const Totals now = totals(rt);
    sum.ecalls += now.ecalls - start.ecalls;
    sum.ocalls += now.ocalls - start.ocalls;
    sum.bytes += now.bytes - start.bytes;
    sum.cycles += now.cycles - start.cycles;
  }
  BenchRow row(std::string config, std::int64_t param) const {
    return {std::move(config), param, {sum.ecalls, sum.ocalls, sum.bytes, sum.cycles}};
  }
};

void housekeeping(DualRuntime& rt) {
  for (Side s : {Side::Trusted, Side::Untrusted}) {
    rt.gc_collect(s);
    rt.gc_helper_scan(s);
  }
}

constexpr std::uint64_t kHousekeepingEvery = 256;

BenchReport proxy_creation(const SuiteParams& p, const CostModel& model) {
  BenchReport rep{"proxy_creation", "invocations", kCountColumns, {}};
  for (const auto& pl : kPlacements) {
    DualRuntime rt = micro_runtime(model);
    Meter m{rt, {}, {}};
    for (std::uint64_t i = 0; i < p.invocations; ++i) {
      m.begin();
      Value v = rt.host_new(pl.caller, pl.cls);
      m.end();
      rt.host_drop(pl.caller, v);
      if ((i + 1) % kHousekeepingEvery == 0) housekeeping(rt);
    }
    rep.rows.push_back(m.row(std::string(pl.label), static_cast<std::int64_t>(p.invocations)));
  }
  return rep;
}

BenchReport rmi(const SuiteParams& p, const CostModel& model) {
  BenchReport rep{"rmi", "invocations", kCountColumns, {}};
  for (const auto& pl : kPlacements) {
    DualRuntime rt = micro_runtime(model);
    Value target = rt.host_new(pl.caller, pl.cls);
    Meter m{rt, {}, {}};
    for (std::uint64_t i = 0; i < p.invocations; ++i) {
      m.begin();
      rt.host_call(pl.caller, target, "set", {Value(static_cast<std::int64_t>(i))});
      m.end();
    }
    rep.rows.push_back(m.row(std::string(pl.label), static_cast<std::int64_t>(p.invocations)));
  }
  return rep;
}

Value payload_list(DualRuntime& rt, Side side, int length) {
  wire::List l;
  for (int i = 0; i < length; ++i) {
    std::string s = "item-" + std::to_string(i);
    s.resize(16, '.');
    l.items.emplace_back(std::move(s));
  }
  return rt.unmarshal(side, wire::encode(wire::Value(std::move(l))), runtime::MarshalKind::Serialized);
}

BenchReport rmi_serialization(const SuiteParams& p, const CostModel& model) {
  BenchReport rep{"rmi_serialization", "payload_strings", kCountColumns, {}};
  for (const auto& pl : kPlacements) {
    for (int size : p.payload_sizes) {
      for (bool with_payload : {false, true}) {
        DualRuntime rt = micro_runtime(model);
        Value target = rt.host_new(pl.caller, pl.cls);
        Value payload = payload_list(rt, pl.caller, size);
        Meter m{rt, {}, {}};
        for (std::uint64_t i = 0; i < p.invocations; ++i) {
          m.begin();
          if (with_payload) {
            rt.host_call(pl.caller, target, "take", {payload});
          } else {
            rt.host_call(pl.caller, target, "ping");
          }
          m.end();
          if ((i + 1) % kHousekeepingEvery == 0) housekeeping(rt);
        }
        rep.rows.push_back(m.row(std::string(pl.label) + (with_payload ? "+s" : ""), size));
      }
    }
  }
  return rep;
}

// Identical heaps in both isolates: a chain of nodes of which every other
// one is unreachable.
BenchReport gc_perf(const SuiteParams& p, const CostModel& model) {
  BenchReport rep{"gc_perf", "objects", {"swept_objects", "live_bytes", "swept_bytes", "gc_cycles"}, {}};
  for (Side side : {Side::Trusted, Side::Untrusted}) {
    DualRuntime rt = micro_runtime(model);
    Value prev;
    for (int i = 0; i < p.gc_objects; ++i) {
      Value n = rt.host_new(side, "Node", {Value(i)});
      if (i % 2 == 1) {
        rt.host_drop(side, n);
        continue;
      }
      if (prev.is_ref()) {
        rt.host_call(side, n, "link", {prev});
        rt.host_drop(side, prev);
      }
      prev = n;
    }
    const auto before = rt.metrics(side).gc_cycles;
    runtime::GcStats s = rt.gc_collect(side);
    const auto cycles = rt.metrics(side).gc_cycles - before;
    rep.rows.push_back({side == Side::Trusted ? "gc-in" : "gc-out", p.gc_objects,
                        {s.swept_objects, s.live_bytes, s.swept_bytes, cycles}});
  }
  return rep;
}

// Create/drop/collect cycles with proxies on both sides; census sampled
// after every phase.
BenchReport gc_consistency(const SuiteParams& p, const CostModel& model) {
  BenchReport rep{"gc_consistency", "cycle", {"registry_size", "live_proxies", "violations"}, {}};
  DualRuntime rt = micro_runtime(model);
  std::mt19937_64 rng(p.seed);
  struct Lane {
    Side proxy_side;
    const char* cls;
    std::string label;
    std::vector<Value> held;
    std::uint64_t violations = 0;
  };
  Lane lanes[] = {{Side::Untrusted, "In", "out->in", {}, 0}, {Side::Trusted, "Out", "in->out", {}, 0}};
  for (int c = 0; c < p.gc_cycles; ++c) {
    for (auto& lane : lanes) {
      const Side mirror_side = partitioner::opposite(lane.proxy_side);
      auto census = [&](const std::string& phase, bool must_equal) {
        const auto reg = rt.registry_size(mirror_side);
        const auto live = rt.live_proxies(lane.proxy_side);
        if (reg < live || (must_equal && reg != live)) ++lane.violations;
        rep.rows.push_back({lane.label + "/" + phase, c, {reg, live, lane.violations}});
      };
      const auto creates = 1 + rng() % 4;
      for (std::uint64_t i = 0; i < creates; ++i) lane.held.push_back(rt.host_new(lane.proxy_side, lane.cls));
      census("create", false);
      const auto drops = rng() % (lane.held.size() + 1);
      for (std::uint64_t i = 0; i < drops && !lane.held.empty(); ++i) {
        const auto at = rng() % lane.held.size();
        rt.host_drop(lane.proxy_side, lane.held[at]);
        lane.held.erase(lane.held.begin() + static_cast<std::ptrdiff_t>(at));
      }
      census("drop", false);
      rt.gc_collect(lane.proxy_side);
      census("collect", false);
      rt.gc_helper_scan(lane.proxy_side);
      census("scan", true);
      rt.gc_collect(mirror_side);
    }
  }
  return rep;
}

ExecutionResult run_partitioned(const dsl::Program& program, const CostModel& model) {
  return DualRuntime(partitioner::compute_images(program), model).run_main();
}

BenchRow count_row(std::string config, std::int64_t param, const ExecutionResult& r) {
  return {std::move(config), param, {r.ecalls(), r.ocalls(), r.trusted.bytes_serialized + r.untrusted.bytes_serialized,
                                     r.total_cycles()}};
}

BenchReport class_sweep(const SuiteParams& p, const CostModel& model) {
  BenchReport rep{"class_sweep", "pct_untrusted", kCountColumns, {}};
  for (Workload w : {Workload::Cpu, Workload::Io}) {
    SyntheticSpec spec = p.sweep;
    spec.workload = w;
    BenchReport part = sweep_partition_ratio(spec, p.steps, model);
    for (auto& r : part.rows) rep.rows.push_back(std::move(r));
    spec.pct_untrusted = 0;
    const dsl::Program program = generate_synthetic(spec);
    rep.rows.push_back(count_row("unpartitioned-" + std::string(to_string(w)), 0,
                                 runtime::run_unpartitioned(program, model)));
    rep.rows.push_back(count_row("no-enclave-" + std::string(to_string(w)), 100,
                                 runtime::run_reference(program, model)));
  }
  return rep;
}

}  // namespace

BenchReport sweep_partition_ratio(const SyntheticSpec& base, const std::vector<int>& steps, const CostModel& model) {
  BenchReport rep{"sweep", "pct_untrusted", kCountColumns, {}};
  for (int pct : steps) {
    SyntheticSpec spec = base;
    spec.pct_untrusted = pct;
    ExecutionResult r = run_partitioned(generate_synthetic(spec), model);
    if (r.exit_status != 0) throw std::runtime_error("synthetic program failed: " + r.error);
    rep.rows.push_back(count_row("partitioned-" + std::string(to_string(base.workload)), pct, r));
  }
  return rep;
}

BenchReport run_suite(Suite suite, const SuiteParams& params, const CostModel& model) {
  switch (suite) {
    case Suite::ProxyCreation: return proxy_creation(params, model);
    case Suite::Rmi: return rmi(params, model);
    case Suite::RmiSerialization: return rmi_serialization(params, model);
    case Suite::GcPerf: return gc_perf(params, model);
    case Suite::GcConsistency: return gc_consistency(params, model);
    case Suite::ClassSweep: return class_sweep(params, model);
  }
  throw std::invalid_argument("unknown suite");
}

}  // namespace encpart::bench

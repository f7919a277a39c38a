#include "encpart/cli/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "encpart/bench/bench.hpp"
#include "encpart/dsl/parser.hpp"
#include "encpart/dsl/validate.hpp"
#include "encpart/partitioner/image_io.hpp"
#include "encpart/partitioner/partition.hpp"
#include "encpart/runtime/runtime.hpp"

namespace encpart::cli {

namespace fs = std::filesystem;
using partitioner::PartitionPlan;
using runtime::CostModel;
using runtime::ExecutionResult;
using runtime::RuntimeOptions;

namespace {

// Carries an exit code out of a command.
struct Failure {
  int code;
  std::string message;
};

std::string read_input(const std::string& path) {
  try {
    return partitioner::read_file(path);
  } catch (const std::exception& e) {
    throw Failure{kIoError, e.what()};
  }
}

dsl::Program load_program(const std::string& path, std::ostream& err) {
  const std::string source = read_input(path);
  dsl::Program program;
  try {
    program = dsl::parse_program(source);
  } catch (const dsl::ParseError& e) {
    throw Failure{kInvalidInput, path + ": " + e.what()};
  }
  const dsl::ValidationReport report = dsl::validate(program);
  if (!report.ok()) {
    for (const auto& v : report.violations) err << path << ": " << dsl::format_violation(v) << "\n";
    throw Failure{kInvalidInput, path + ": " + std::to_string(report.violations.size()) + " violation(s)"};
  }
  return program;
}

PartitionPlan plan_of(const dsl::Program& program) {
  try {
    return partitioner::compute_images(program);
  } catch (const std::exception& e) {
    throw Failure{kInvalidInput, std::string("partitioning failed: ") + e.what()};
  }
}

PartitionPlan load_plan_dir(const std::string& dir) {
  try {
    return partitioner::load_plan(dir);
  } catch (const partitioner::FormatError& e) {
    throw Failure{kIoError, std::string("format error: ") + e.what()};
  } catch (const std::exception& e) {
    throw Failure{kIoError, e.what()};
  }
}

CostModel load_model(const std::string& path) {
  if (path.empty()) return {};
  try {
    return CostModel::load(path);
  } catch (const std::exception& e) {
    throw Failure{kInvalidInput, std::string("cost model: ") + e.what()};
  }
}

void write_output(const std::string& path, std::string_view data) {
  try {
    partitioner::write_file(path, data);
  } catch (const std::exception& e) {
    throw Failure{kIoError, e.what()};
  }
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : ", ") + s;
  return out.empty() ? "-" : out;
}

struct RunFlags {
  std::string model;
  std::string trace;
  bool deterministic = false;
  bool live = false;
  std::string gc_scan;
  std::string dump_fs;
  std::string metrics;
  std::uint64_t gc_threshold = RuntimeOptions{}.gc_threshold_bytes;
  std::uint64_t step_limit = 0;
  int live_period_ms = 1000;
  std::vector<std::string> args;

  void attach(CLI::App* cmd) {
    cmd->add_option("--model", model, "Cost model file (key = value)");
    cmd->add_option("--trace", trace, "Trace kind; only `transitions` is supported")->check(CLI::IsMember({"transitions"}));
    cmd->add_flag("--deterministic-gc", deterministic, "Scan weak proxy lists after collections (default)");
    cmd->add_flag("--live-gc", live, "Run GC helper threads on a timer instead");
    cmd->add_option("--gc-scan", gc_scan, "Deterministic scan schedule: every-k=<n> or manual");
    cmd->add_option("--gc-threshold", gc_threshold, "Heap growth in bytes that triggers a collection; 0 disables");
    cmd->add_option("--live-period-ms", live_period_ms, "Helper scan period in live mode")->check(CLI::Range(1, 3600000));
    cmd->add_option("--step-limit", step_limit, "Stop after this many statements; 0 means no limit");
    cmd->add_option("--dump-fs", dump_fs, "Write the virtual file system into this directory");
    cmd->add_option("--metrics", metrics, "Write the metrics report to this file");
  }

  RuntimeOptions options() const {
    if (deterministic && live) throw Failure{kInvalidInput, "--deterministic-gc and --live-gc are exclusive"};
    RuntimeOptions o;
    o.trace = !trace.empty();
    o.gc_mode = live ? runtime::GcMode::Live : runtime::GcMode::Deterministic;
    o.gc_threshold_bytes = gc_threshold;
    o.step_limit = step_limit;
    o.live_period = std::chrono::milliseconds(live_period_ms);
    if (!gc_scan.empty()) {
      if (gc_scan == "manual") {
        o.scan_every_k = 0;
      } else if (gc_scan.rfind("every-k=", 0) == 0) {
        try {
          std::size_t used = 0;
          o.scan_every_k = std::stoi(gc_scan.substr(8), &used);
          if (used != gc_scan.size() - 8 || o.scan_every_k < 1) throw std::invalid_argument("k");
        } catch (const std::exception&) {
          throw Failure{kInvalidInput, "--gc-scan: expected every-k=<positive integer>"};
        }
      } else {
        throw Failure{kInvalidInput, "--gc-scan: expected every-k=<n> or manual"};
      }
    }
    return o;
  }
};

void dump_fs(const std::string& dir, const std::map<std::string, std::string>& vfs) {
  for (const auto& [path, data] : vfs) {
    const fs::path rel(path);
    bool safe = !rel.is_absolute() && !rel.empty();
    for (const auto& part : rel) safe = safe && part != ".." && part != "." && !part.empty();
    if (!safe) throw Failure{kIoError, "refusing to dump virtual file `" + path + "` outside " + dir};
    const fs::path target = fs::path(dir) / rel;
    std::error_code ec;
    fs::create_directories(target.parent_path(), ec);
    if (ec) throw Failure{kIoError, "cannot create " + target.parent_path().string() + ": " + ec.message()};
    write_output(target.string(), data);
  }
}

int finish_run(const ExecutionResult& r, const RunFlags& flags, std::ostream& out, std::ostream& err) {
  out << r.transcript;
  for (const auto& line : r.trace) err << line << "\n";
  if (!flags.metrics.empty()) write_output(flags.metrics, runtime::metrics_report(r.trusted, r.untrusted));
  if (!flags.dump_fs.empty()) dump_fs(flags.dump_fs, r.vfs);
  if (r.exit_status != 0) {
    err << "error: " << r.error << "\n";
    return kProgramError;
  }
  return kOk;
}

int cmd_partition(const std::string& file, const std::string& out_dir, std::ostream& out, std::ostream& err) {
  const dsl::Program program = load_program(file, err);
  const PartitionPlan plan = plan_of(program);
  try {
    partitioner::emit(plan, out_dir);
  } catch (const std::exception& e) {
    throw Failure{kIoError, e.what()};
  }
  out << "trusted (T): " << plan.sets.trusted.size() << " [" << join(plan.sets.trusted) << "]\n";
  out << "untrusted (U): " << plan.sets.untrusted.size() << " [" << join(plan.sets.untrusted) << "]\n";
  out << "neutral (N): " << plan.sets.neutral.size() << " [" << join(plan.sets.neutral) << "]\n";
  out << "interface: " << plan.interface.count(partitioner::Direction::Ecall) << " ecall, "
      << plan.interface.count(partitioner::Direction::Ocall) << " ocall\n";
  for (const char* name : {partitioner::kTrustedImageFile, partitioner::kUntrustedImageFile, partitioner::kInterfaceFile}) {
    out << "wrote " << (fs::path(out_dir) / name).string() << "\n";
  }
  return kOk;
}

int cmd_run(const std::string& plan_dir, const RunFlags& flags, std::ostream& out, std::ostream& err) {
  PartitionPlan plan = load_plan_dir(plan_dir);
  const CostModel model = load_model(flags.model);
  std::optional<runtime::DualRuntime> rt;
  try {
    rt.emplace(std::move(plan), model, flags.options());
  } catch (const runtime::InterfaceMismatch& e) {
    throw Failure{kIoError, std::string("interface mismatch: ") + e.what()};
  }
  return finish_run(rt->run_main(flags.args), flags, out, err);
}

int cmd_run_unpartitioned(const std::string& file, bool reference, const RunFlags& flags, std::ostream& out,
                          std::ostream& err) {
  const dsl::Program program = load_program(file, err);
  const CostModel model = load_model(flags.model);
  const auto side = reference ? partitioner::Side::Untrusted : partitioner::Side::Trusted;
  runtime::DualRuntime rt(runtime::single_isolate_plan(program, side), model, flags.options());
  return finish_run(rt.run_main(flags.args), flags, out, err);
}

std::string first_divergence(const ExecutionResult& ref, const ExecutionResult& part) {
  if (ref.transcript != part.transcript) {
    std::size_t i = 0;
    while (i < ref.transcript.size() && i < part.transcript.size() && ref.transcript[i] == part.transcript[i]) ++i;
    return "transcript differs at byte " + std::to_string(i);
  }
  for (const auto& [path, data] : ref.vfs) {
    auto it = part.vfs.find(path);
    if (it == part.vfs.end()) return "vfs path `" + path + "` missing from partitioned run";
    if (it->second != data) return "vfs path `" + path + "` differs";
  }
  for (const auto& [path, data] : part.vfs) {
    if (!ref.vfs.count(path)) return "vfs path `" + path + "` only in partitioned run";
  }
  if (ref.exit_status != part.exit_status) return "exit status differs";
  return {};
}

int cmd_compare(const std::string& file, const std::string& plan_dir, const std::string& model_path, std::ostream& out,
                std::ostream& err) {
  const dsl::Program program = load_program(file, err);
  const CostModel model = load_model(model_path);
  PartitionPlan plan = plan_dir.empty() ? plan_of(program) : load_plan_dir(plan_dir);
  const ExecutionResult ref = runtime::run_reference(program, model);
  ExecutionResult part;
  try {
    part = runtime::DualRuntime(std::move(plan), model).run_main();
  } catch (const runtime::InterfaceMismatch& e) {
    throw Failure{kIoError, std::string("interface mismatch: ") + e.what()};
  }
  const std::string diff = first_divergence(ref, part);
  out << (diff.empty() ? "PASS " : "FAIL ") << file << "\n";
  if (!diff.empty()) out << "  " << diff << "\n";
  out << "  transcript: " << ref.transcript.size() << " bytes, vfs: " << ref.vfs.size() << " file(s)\n";
  out << "  partitioned: ecalls=" << part.ecalls() << " ocalls=" << part.ocalls() << " shim=" << part.shim_calls
      << " cycles=" << part.total_cycles() << "\n";
  out << "  reference: cycles=" << ref.total_cycles() << "\n";
  if (part.exit_status != 0) err << "partitioned run failed: " << part.error << "\n";
  if (ref.exit_status != 0) err << "reference run failed: " << ref.error << "\n";
  return diff.empty() ? kOk : kMismatch;
}

std::string kinds(const std::vector<partitioner::MarshalKind>& ks) {
  std::string out;
  for (std::size_t i = 0; i < ks.size(); ++i) out += (i ? "," : "") + std::string(partitioner::to_string(ks[i]));
  return out;
}

std::string signature(const dsl::MethodSig& s) {
  std::string out = s.name + "(";
  for (std::size_t i = 0; i < s.params.size(); ++i) out += (i ? ", " : "") + dsl::to_string(s.params[i].type);
  return out + ") -> " + dsl::to_string(s.ret);
}

int cmd_inspect(const std::string& plan_dir, const std::string& which, std::ostream& out) {
  const PartitionPlan plan = load_plan_dir(plan_dir);
  const auto side = which == "trusted" ? partitioner::Side::Trusted : partitioner::Side::Untrusted;
  const auto& image = plan.image(side);
  out << "image " << which << "\n";
  out << "classes:\n";
  for (const auto& c : image.classes) {
    out << "  " << c.decl.name;
    switch (c.decl.annotation) {
      case dsl::Annotation::Trusted: out << " [trusted]"; break;
      case dsl::Annotation::Untrusted: out << " [untrusted]"; break;
      case dsl::Annotation::Neutral: out << " [neutral]"; break;
    }
    out << "\n";
    for (const auto& m : c.decl.constructors) out << "    " << signature(dsl::signature_of(m)) << "\n";
    for (const auto& m : c.decl.methods) out << "    " << signature(dsl::signature_of(m)) << "\n";
    for (const auto& r : c.relays) out << "    relay " << r.method << "(" << kinds(r.params) << ") -> " << to_string(r.ret) << "\n";
  }
  out << "proxies:\n";
  if (image.proxies.empty() && image.pruned_proxies.empty()) out << "  (none)\n";
  for (const auto& p : image.proxies) {
    out << "  " << p.class_name << " proxy (" << (p.direction == partitioner::Direction::Ecall ? "ecall" : "ocall") << ")\n";
    for (const auto& s : p.stubs) out << "    stub " << signature(s) << "\n";
  }
  for (const auto& name : image.pruned_proxies) out << "  " << name << " proxy: pruned (unreachable)\n";
  out << "entry points:\n";
  if (image.entry_points.empty()) out << "  (none)\n";
  for (const auto& e : image.entry_points) out << "  " << e.str() << "\n";
  out << "interface:\n";
  const auto dir = side == partitioner::Side::Trusted ? partitioner::Direction::Ecall : partitioner::Direction::Ocall;
  for (const auto& r : plan.interface.records) {
    if (r.direction != dir) continue;
    out << "  " << to_string(r.direction) << " " << r.class_name << "." << r.method << "(" << kinds(r.params) << ") -> "
        << to_string(r.ret) << "\n";
  }
  return kOk;
}

struct BenchFlags {
  std::string suite = "all";
  std::uint64_t seed = 1;
  std::string model;
  std::string out;
  std::uint64_t invocations = bench::SuiteParams{}.invocations;
  std::vector<int> payload_sizes = bench::SuiteParams{}.payload_sizes;
  int gc_cycles = bench::SuiteParams{}.gc_cycles;
  int gc_objects = bench::SuiteParams{}.gc_objects;
  int classes = bench::SyntheticSpec{}.n_classes;
  std::int64_t cpu_units = bench::SyntheticSpec{}.cpu_units;
  std::int64_t io_bytes = bench::SyntheticSpec{}.io_bytes;
  std::vector<int> steps = bench::SuiteParams{}.steps;
};

int cmd_bench(const BenchFlags& f, std::ostream& out) {
  std::vector<bench::Suite> suites;
  if (f.suite == "all") {
    suites = bench::all_suites();
  } else if (auto s = bench::parse_suite(f.suite)) {
    suites.push_back(*s);
  } else {
    throw Failure{kInvalidInput, "unknown suite `" + f.suite + "`"};
  }
  for (int s : f.steps) {
    if (s < 0 || s > 100) throw Failure{kInvalidInput, "--steps values must be in 0..100"};
  }
  const CostModel model = load_model(f.model);
  bench::SuiteParams p;
  p.invocations = f.invocations;
  p.payload_sizes = f.payload_sizes;
  p.gc_cycles = f.gc_cycles;
  p.gc_objects = f.gc_objects;
  p.seed = f.seed;
  p.steps = f.steps;
  p.sweep.n_classes = f.classes;
  p.sweep.cpu_units = f.cpu_units;
  p.sweep.io_bytes = f.io_bytes;
  p.sweep.seed = f.seed;
  try {
    p.sweep.check();
  } catch (const std::invalid_argument& e) {
    throw Failure{kInvalidInput, e.what()};
  }

  std::string csv;
  for (bench::Suite s : suites) {
    bench::BenchReport r = bench::run_suite(s, p, model);
    if (suites.size() > 1) csv += "# " + r.suite + "\n";
    csv += r.to_csv();
  }
  if (f.out.empty()) {
    out << csv;
  } else {
    write_output(f.out, csv);
  }
  return kOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Partition annotated programs into enclave and host images and run them."};
  app.name("encpart");
  app.require_subcommand(1);

  std::string file, out_dir, plan_dir, image = "trusted", model_path;
  auto* partition = app.add_subcommand("partition", "Validate a program and emit its two images and interface");
  partition->add_option("file", file, "Source program")->required();
  partition->add_option("-o,--out", out_dir, "Output directory")->required();

  RunFlags run_flags;
  auto* run = app.add_subcommand("run", "Run an emitted plan in two isolates");
  run->add_option("plan_dir", plan_dir, "Directory written by `partition`")->required();
  run_flags.attach(run);
  run->add_option("args", run_flags.args, "Arguments passed to main");

  RunFlags unpart_flags;
  bool reference = false;
  auto* unpart = app.add_subcommand("run-unpartitioned", "Run a whole program inside the enclave isolate");
  unpart->add_option("file", file, "Source program")->required();
  unpart->add_flag("--reference", reference, "Run outside the enclave with no shim (the reference interpreter)");
  unpart_flags.attach(unpart);
  unpart->add_option("args", unpart_flags.args, "Arguments passed to main");

  auto* compare = app.add_subcommand("compare", "Check the partitioned run against the reference interpreter");
  compare->add_option("file", file, "Source program")->required();
  compare->add_option("--plan", plan_dir, "Use an emitted plan instead of partitioning in memory");
  compare->add_option("--model", model_path, "Cost model file");

  BenchFlags bench_flags;
  auto* benchmark = app.add_subcommand("bench", "Run benchmark suites and print CSV");
  benchmark->add_option("suite", bench_flags.suite, "Suite name or `all`");
  benchmark->add_option("--seed", bench_flags.seed, "Seed for generated programs and drop schedules");
  benchmark->add_option("--model", bench_flags.model, "Cost model file");
  benchmark->add_option("--out", bench_flags.out, "Write CSV here instead of stdout");
  benchmark->add_option("--invocations", bench_flags.invocations, "Operations per micro-benchmark row")
      ->check(CLI::Range(std::uint64_t{1}, std::uint64_t{10000000}));
  benchmark->add_option("--payload-sizes", bench_flags.payload_sizes, "List lengths for rmi_serialization")
      ->delimiter(',')
      ->check(CLI::Range(0, 1000000));
  benchmark->add_option("--gc-cycles", bench_flags.gc_cycles, "Create/drop/collect cycles")->check(CLI::Range(1, 1000000));
  benchmark->add_option("--gc-objects", bench_flags.gc_objects, "Heap objects for gc_perf")->check(CLI::Range(1, 10000000));
  benchmark->add_option("--classes", bench_flags.classes, "Classes in the synthetic sweep program");
  benchmark->add_option("--cpu-units", bench_flags.cpu_units, "compute() units per synthetic method");
  benchmark->add_option("--io-bytes", bench_flags.io_bytes, "Bytes written per synthetic method");
  benchmark->add_option("--steps", bench_flags.steps, "Untrusted percentages for the sweep")->delimiter(',');

  auto* inspect = app.add_subcommand("inspect", "List the contents of one image of an emitted plan");
  inspect->add_option("plan_dir", plan_dir, "Directory written by `partition`")->required();
  inspect->add_option("--image", image, "trusted or untrusted")->check(CLI::IsMember({"trusted", "untrusted"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInvalidInput;
  }

  try {
    if (*partition) return cmd_partition(file, out_dir, out, err);
    if (*run) return cmd_run(plan_dir, run_flags, out, err);
    if (*unpart) return cmd_run_unpartitioned(file, reference, unpart_flags, out, err);
    if (*compare) return cmd_compare(file, plan_dir, model_path, out, err);
    if (*benchmark) return cmd_bench(bench_flags, out);
    if (*inspect) return cmd_inspect(plan_dir, image, out);
  } catch (const Failure& f) {
    err << "encpart: " << f.message << "\n";
    return f.code;
  } catch (const runtime::ConfigError& e) {
    err << "encpart: " << e.what() << "\n";
    return kInvalidInput;
  } catch (const std::exception& e) {
    err << "encpart: " << e.what() << "\n";
    return kIoError;
  }
  return kInvalidInput;
}

}  // namespace encpart::cli

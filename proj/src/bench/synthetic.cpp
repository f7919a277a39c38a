#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "encpart/bench/bench.hpp"
#include "encpart/dsl/parser.hpp"

namespace encpart::bench {

std::string_view to_string(Workload w) { return w == Workload::Cpu ? "cpu" : "io"; }

std::optional<Workload> parse_workload(std::string_view s) {
  if (s == "cpu") return Workload::Cpu;
  if (s == "io") return Workload::Io;
  return std::nullopt;
}

void SyntheticSpec::check() const {
  if (n_classes < 1 || n_classes > 10000) throw std::invalid_argument("n_classes must be in 1..10000");
  if (pct_untrusted < 0 || pct_untrusted > 100) throw std::invalid_argument("pct_untrusted must be in 0..100");
  if (cpu_units < 0) throw std::invalid_argument("cpu_units must be non-negative");
  if (io_bytes < 0 || io_bytes > (1 << 24)) throw std::invalid_argument("io_bytes must be in 0..16777216");
}

int untrusted_count(const SyntheticSpec& spec) { return (spec.n_classes * spec.pct_untrusted + 50) / 100; }

std::string synthetic_source(const SyntheticSpec& spec) {
  spec.check();
  const int n = spec.n_classes;
  // Fisher-Yates with raw engine output so the order is the same everywhere.
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(spec.seed);
  for (int i = n - 1; i > 0; --i) {
    const auto j = static_cast<int>(rng() % static_cast<std::uint64_t>(i + 1));
    std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
  }
  std::vector<bool> untrusted(static_cast<std::size_t>(n), false);
  for (int k = 0; k < untrusted_count(spec); ++k) untrusted[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])] = true;

  std::ostringstream out;
  out << "# synthetic " << to_string(spec.workload) << " program: " << n << " classes, " << spec.pct_untrusted
      << "% untrusted, seed " << spec.seed << "\n";
  for (int i = 0; i < n; ++i) {
    out << "\n" << (untrusted[static_cast<std::size_t>(i)] ? "@Untrusted" : "@Trusted") << "\n";
    out << "public class W" << i << " {\n";
    out << "  private int calls;\n\n";
    out << "  public W" << i << "() {}\n\n";
    out << "  public void work() {\n";
    out << "    this.calls += 1;\n";
    if (spec.workload == Workload::Cpu) {
      out << "    compute(" << spec.cpu_units << ");\n";
    } else {
      out << "    file_write(\"w" << i << ".dat\", repeat(\"x\", " << spec.io_bytes << "));\n";
    }
    out << "  }\n}\n";
  }
  out << "\npublic class Main {\n  public static void main(list<str> args) {\n";
  for (int i = 0; i < n; ++i) {
    out << "    W" << i << " w" << i << " = new W" << i << "();\n";
    out << "    w" << i << ".work();\n";
  }
  out << "  }\n}\n";
  return out.str();
}

dsl::Program generate_synthetic(const SyntheticSpec& spec) { return dsl::parse_program(synthetic_source(spec)); }

}  // namespace encpart::bench

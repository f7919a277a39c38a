#include "encpart/runtime/metrics.hpp"

namespace encpart::runtime {

namespace {

void block(std::string& out, const char* name, const MetricCounters& m) {
  auto line = [&](const char* key, std::uint64_t v) { out += std::string(key) + " = " + std::to_string(v) + "\n"; };
  out += std::string("[") + name + "]\n";
  line("ecalls", m.ecalls);
  line("ocalls", m.ocalls);
  line("bytes_serialized", m.bytes_serialized);
  line("allocations", m.allocations);
  line("gc_runs", m.gc_runs);
  line("gc_cycles", m.gc_cycles);
  line("mirror_registry_size", m.mirror_registry_size);
  line("live_proxies", m.live_proxies);
  line("simulated_cycles", m.simulated_cycles);
}

}  // namespace

std::string metrics_report(const MetricCounters& trusted, const MetricCounters& untrusted) {
  std::string out;
  block(out, "trusted", trusted);
  out += "\n";
  block(out, "untrusted", untrusted);
  return out;
}

}  // namespace encpart::runtime

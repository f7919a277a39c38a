#include "encpart/runtime/cost_model.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace encpart::runtime {

void CostModel::check() const {
  if (!std::isfinite(epc_penalty) || epc_penalty < 1.0) {
    throw ConfigError("epc_penalty must be a finite number >= 1");
  }
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::uint64_t parse_count(std::string_view key, std::string_view v, int line) {
  std::uint64_t out = 0;
  auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || end != v.data() + v.size() || v.empty()) {
    throw ConfigError("line " + std::to_string(line) + ": `" + std::string(key) +
                      "` needs a non-negative integer, got `" + std::string(v) + "`");
  }
  return out;
}

}  // namespace

CostModel CostModel::parse(std::string_view text) {
  CostModel m;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string_view s = trim(raw);
    if (s.empty() || s.front() == '#') continue;
    auto eq = s.find('=');
    if (eq == std::string_view::npos) throw ConfigError("line " + std::to_string(line) + ": expected `key = value`");
    std::string_view key = trim(s.substr(0, eq));
    std::string_view value = trim(s.substr(eq + 1));
    if (key == "ecall_cost") {
      m.ecall_cost = parse_count(key, value, line);
    } else if (key == "ocall_cost") {
      m.ocall_cost = parse_count(key, value, line);
    } else if (key == "alloc_cost") {
      m.alloc_cost = parse_count(key, value, line);
    } else if (key == "field_access_cost") {
      m.field_access_cost = parse_count(key, value, line);
    } else if (key == "serialize_per_byte") {
      m.serialize_per_byte = parse_count(key, value, line);
    } else if (key == "compute_unit_cost") {
      m.compute_unit_cost = parse_count(key, value, line);
    } else if (key == "io_write_cost") {
      m.io_write_cost = parse_count(key, value, line);
    } else if (key == "epc_penalty") {
      std::string v(value);
      std::size_t used = 0;
      try {
        m.epc_penalty = std::stod(v, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != v.size() || v.empty()) {
        throw ConfigError("line " + std::to_string(line) + ": `epc_penalty` needs a number, got `" + v + "`");
      }
    } else {
      throw ConfigError("line " + std::to_string(line) + ": unknown key `" + std::string(key) + "`");
    }
  }
  m.check();
  return m;
}

CostModel CostModel::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read cost model " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string CostModel::to_text() const {
  std::ostringstream out;
  out << "ecall_cost = " << ecall_cost << "\n"
      << "ocall_cost = " << ocall_cost << "\n"
      << "alloc_cost = " << alloc_cost << "\n"
      << "field_access_cost = " << field_access_cost << "\n"
      << "serialize_per_byte = " << serialize_per_byte << "\n"
      << "epc_penalty = " << epc_penalty << "\n"
      << "compute_unit_cost = " << compute_unit_cost << "\n"
      << "io_write_cost = " << io_write_cost << "\n";
  return out.str();
}

}  // namespace encpart::runtime

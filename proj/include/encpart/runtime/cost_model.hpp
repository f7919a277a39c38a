#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

namespace encpart::runtime {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Prices in abstract cycles. Only the transition cost comes from a
// measurement; the rest are calibration knobs.
struct CostModel {
  std::uint64_t ecall_cost = 13100;
  std::uint64_t ocall_cost = 13100;
  std::uint64_t alloc_cost = 10;
  std::uint64_t field_access_cost = 2;
  std::uint64_t serialize_per_byte = 5;
  double epc_penalty = 4.0;  // multiplier on alloc/field/compute/gc work inside the enclave
  std::uint64_t compute_unit_cost = 1;
  std::uint64_t io_write_cost = 2000;  // per file_write, paid by the untrusted side

  // Throws ConfigError if epc_penalty < 1 or is not finite.
  void check() const;

  // `key = value` lines with exactly the field names above; `#` comments
  // and blank lines allowed. Unknown keys and malformed values are errors.
  static CostModel parse(std::string_view text);
  static CostModel load(const std::filesystem::path& path);
  std::string to_text() const;
};

}  // namespace encpart::runtime

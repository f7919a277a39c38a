#pragma once

#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>

#include "encpart/partitioner/plan.hpp"
#include "encpart/runtime/wire.hpp"

namespace encpart::partitioner {

inline constexpr std::string_view kImageMagic{"EPIMG\x01", 6};
inline constexpr const char* kTrustedImageFile = "trusted.img";
inline constexpr const char* kUntrustedImageFile = "untrusted.img";
inline constexpr const char* kInterfaceFile = "interface.edl.txt";

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Image file: magic, u64 little-endian payload length, then one wire value
// holding the whole image. Throws FormatError on anything malformed.
wire::Bytes encode_image(const ImageSpec& image);
ImageSpec decode_image(std::span<const std::uint8_t> bytes);

// Writes the three plan files into `dir`, creating it if needed.
void emit(const PartitionPlan& plan, const std::filesystem::path& dir);

// Reads a plan back; class sets are recovered from the class table.
PartitionPlan load_plan(const std::filesystem::path& dir);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view data);

}  // namespace encpart::partitioner

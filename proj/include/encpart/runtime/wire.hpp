#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

// Canonical byte encoding shared by transition messages and image files.
//
//   0x00 Unit
//   0x01 Int            i64 little-endian
//   0x02 Bool           one byte, 0 or 1
//   0x03 Str            u32 length + UTF-8 bytes
//   0x04 List           u32 count + elements
//   0x05 HashRef        u64 hash + u32 class id
//   0x06 NeutralObject  u32 class id + u32 field count + fields
//
// Every value has exactly one valid encoding; the decoder rejects anything
// else (non-0/1 bools, unknown tags, truncation, trailing bytes).
namespace encpart::wire {

enum class Tag : std::uint8_t {
  Unit = 0x00,
  Int = 0x01,
  Bool = 0x02,
  Str = 0x03,
  List = 0x04,
  HashRef = 0x05,
  NeutralObject = 0x06,
};

struct Value;

struct List {
  std::vector<Value> items;
  bool operator==(const List&) const;
};

struct HashRef {
  std::uint64_t hash = 0;
  std::uint32_t class_id = 0;
  bool operator==(const HashRef&) const = default;
};

struct NeutralObject {
  std::uint32_t class_id = 0;
  std::vector<Value> fields;
  bool operator==(const NeutralObject&) const;
};

struct Value {
  std::variant<std::monostate, std::int64_t, bool, std::string, List, HashRef, NeutralObject> data;

  Value() = default;
  Value(std::int64_t i) : data(i) {}
  Value(int i) : data(std::int64_t{i}) {}
  Value(bool b) : data(b) {}
  Value(std::string s) : data(std::move(s)) {}
  Value(const char* s) : data(std::string(s)) {}
  Value(List l) : data(std::move(l)) {}
  Value(HashRef h) : data(h) {}
  Value(NeutralObject o) : data(std::move(o)) {}

  Tag tag() const { return static_cast<Tag>(data.index()); }
  bool is_unit() const { return data.index() == 0; }

  bool operator==(const Value&) const;
};

class WireError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Bytes = std::vector<std::uint8_t>;

void encode(const Value& v, Bytes& out);
Bytes encode(const Value& v);
std::size_t encoded_size(const Value& v);

// Decodes exactly one value spanning all of `bytes`.
Value decode(std::span<const std::uint8_t> bytes);

// Streaming reader for callers that concatenate several values.
class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  Value read();
  bool at_end() const { return pos_ == bytes_.size(); }
  std::size_t position() const { return pos_; }

 private:
  Value read_at_depth(int depth);
  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  void need(std::size_t n) const;

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

// Little-endian helpers, also used by the image container.
void put_u32(Bytes& out, std::uint32_t v);
void put_u64(Bytes& out, std::uint64_t v);
std::uint32_t get_u32(std::span<const std::uint8_t> bytes, std::size_t at);
std::uint64_t get_u64(std::span<const std::uint8_t> bytes, std::size_t at);

// Accessors that throw WireError on a type mismatch; used by decoders of
// structured payloads (images, shim calls).
std::int64_t as_int(const Value& v);
bool as_bool(const Value& v);
const std::string& as_str(const Value& v);
const std::vector<Value>& as_list(const Value& v);

std::string to_debug_string(const Value& v);

}  // namespace encpart::wire

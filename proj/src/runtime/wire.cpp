#include "encpart/runtime/wire.hpp"

#include <limits>
#include <sstream>

namespace encpart::wire {

namespace {

constexpr int kMaxDepth = 512;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::uint32_t checked_u32(std::size_t n, const char* what) {
  if (n > std::numeric_limits<std::uint32_t>::max()) {
    throw WireError(std::string(what) + " exceeds u32 range");
  }
  return static_cast<std::uint32_t>(n);
}

}  // namespace

bool List::operator==(const List& o) const { return items == o.items; }
bool NeutralObject::operator==(const NeutralObject& o) const {
  return class_id == o.class_id && fields == o.fields;
}
bool Value::operator==(const Value& o) const { return data == o.data; }

void put_u32(Bytes& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(Bytes& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> bytes, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[at + i]) << (8 * i);
  return v;
}

std::uint64_t get_u64(std::span<const std::uint8_t> bytes, std::size_t at) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[at + i]) << (8 * i);
  return v;
}

void encode(const Value& v, Bytes& out) {
  out.push_back(static_cast<std::uint8_t>(v.tag()));
  std::visit(Overloaded{
                 [](std::monostate) {},
                 [&](std::int64_t i) { put_u64(out, static_cast<std::uint64_t>(i)); },
                 [&](bool b) { out.push_back(b ? 1 : 0); },
                 [&](const std::string& s) {
                   put_u32(out, checked_u32(s.size(), "string length"));
                   out.insert(out.end(), s.begin(), s.end());
                 },
                 [&](const List& l) {
                   put_u32(out, checked_u32(l.items.size(), "list count"));
                   for (const auto& item : l.items) encode(item, out);
                 },
                 [&](const HashRef& h) {
                   put_u64(out, h.hash);
                   put_u32(out, h.class_id);
                 },
                 [&](const NeutralObject& o) {
                   put_u32(out, o.class_id);
                   put_u32(out, checked_u32(o.fields.size(), "field count"));
                   for (const auto& f : o.fields) encode(f, out);
                 },
             },
             v.data);
}

Bytes encode(const Value& v) {
  Bytes out;
  out.reserve(encoded_size(v));
  encode(v, out);
  return out;
}

std::size_t encoded_size(const Value& v) {
  return 1 + std::visit(Overloaded{
                            [](std::monostate) -> std::size_t { return 0; },
                            [](std::int64_t) -> std::size_t { return 8; },
                            [](bool) -> std::size_t { return 1; },
                            [](const std::string& s) -> std::size_t { return 4 + s.size(); },
                            [](const List& l) -> std::size_t {
                              std::size_t n = 4;
                              for (const auto& item : l.items) n += encoded_size(item);
                              return n;
                            },
                            [](const HashRef&) -> std::size_t { return 12; },
                            [](const NeutralObject& o) -> std::size_t {
                              std::size_t n = 8;
                              for (const auto& f : o.fields) n += encoded_size(f);
                              return n;
                            },
                        },
                        v.data);
}

void Reader::need(std::size_t n) const {
  if (bytes_.size() - pos_ < n) {
    std::ostringstream msg;
    msg << "truncated value at offset " << pos_ << " (need " << n << " bytes, have "
        << bytes_.size() - pos_ << ")";
    throw WireError(msg.str());
  }
}

std::uint8_t Reader::u8() {
  need(1);
  return bytes_[pos_++];
}

std::uint32_t Reader::u32() {
  need(4);
  auto v = get_u32(bytes_, pos_);
  pos_ += 4;
  return v;
}

std::uint64_t Reader::u64() {
  need(8);
  auto v = get_u64(bytes_, pos_);
  pos_ += 8;
  return v;
}

Value Reader::read() { return read_at_depth(0); }

Value Reader::read_at_depth(int depth) {
  if (depth > kMaxDepth) throw WireError("value nesting too deep");
  const std::size_t start = pos_;
  const std::uint8_t tag = u8();
  switch (static_cast<Tag>(tag)) {
    case Tag::Unit:
      return Value{};
    case Tag::Int:
      return Value{static_cast<std::int64_t>(u64())};
    case Tag::Bool: {
      const std::uint8_t b = u8();
      if (b > 1) throw WireError("non-canonical bool byte at offset " + std::to_string(start + 1));
      return Value{b == 1};
    }
    case Tag::Str: {
      const std::uint32_t len = u32();
      need(len);
      std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), len);
      pos_ += len;
      return Value{std::move(s)};
    }
    case Tag::List: {
      const std::uint32_t count = u32();
      // Each element takes at least one byte; reject counts that cannot fit.
      need(count);
      List l;
      l.items.reserve(count);
      for (std::uint32_t i = 0; i < count; ++i) l.items.push_back(read_at_depth(depth + 1));
      return Value{std::move(l)};
    }
    case Tag::HashRef: {
      HashRef h;
      h.hash = u64();
      h.class_id = u32();
      return Value{h};
    }
    case Tag::NeutralObject: {
      NeutralObject o;
      o.class_id = u32();
      const std::uint32_t count = u32();
      need(count);
      o.fields.reserve(count);
      for (std::uint32_t i = 0; i < count; ++i) o.fields.push_back(read_at_depth(depth + 1));
      return Value{std::move(o)};
    }
  }
  throw WireError("unknown tag 0x" + [&] {
    std::ostringstream s;
    s << std::hex << static_cast<int>(tag);
    return s.str();
  }() + " at offset " + std::to_string(start));
}

Value decode(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  Value v = r.read();
  if (!r.at_end()) {
    throw WireError("trailing bytes after value (" + std::to_string(bytes.size() - r.position()) +
                    " left)");
  }
  return v;
}

std::int64_t as_int(const Value& v) {
  if (auto p = std::get_if<std::int64_t>(&v.data)) return *p;
  throw WireError("expected Int, found " + to_debug_string(v));
}

bool as_bool(const Value& v) {
  if (auto p = std::get_if<bool>(&v.data)) return *p;
  throw WireError("expected Bool, found " + to_debug_string(v));
}

const std::string& as_str(const Value& v) {
  if (auto p = std::get_if<std::string>(&v.data)) return *p;
  throw WireError("expected Str, found " + to_debug_string(v));
}

const std::vector<Value>& as_list(const Value& v) {
  if (auto p = std::get_if<List>(&v.data)) return p->items;
  throw WireError("expected List, found " + to_debug_string(v));
}

std::string to_debug_string(const Value& v) {
  std::ostringstream out;
  std::visit(Overloaded{
                 [&](std::monostate) { out << "unit"; },
                 [&](std::int64_t i) { out << i; },
                 [&](bool b) { out << (b ? "true" : "false"); },
                 [&](const std::string& s) { out << '"' << s << '"'; },
                 [&](const List& l) {
                   out << '[';
                   for (std::size_t i = 0; i < l.items.size(); ++i) {
                     if (i) out << ", ";
                     out << to_debug_string(l.items[i]);
                   }
                   out << ']';
                 },
                 [&](const HashRef& h) { out << "href(" << std::hex << h.hash << std::dec << ", #" << h.class_id << ')'; },
                 [&](const NeutralObject& o) {
                   out << "obj#" << o.class_id << '{';
                   for (std::size_t i = 0; i < o.fields.size(); ++i) {
                     if (i) out << ", ";
                     out << to_debug_string(o.fields[i]);
                   }
                   out << '}';
                 },
             },
             v.data);
  return out.str();
}

}  // namespace encpart::wire

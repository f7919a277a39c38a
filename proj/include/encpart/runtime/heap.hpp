#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace encpart::runtime {

using ObjId = std::uint64_t;

struct Null {
  bool operator==(const Null&) const = default;
};

struct Ref {
  ObjId id = 0;
  bool operator==(const Ref&) const = default;
};

// A DSL value. Strings are immutable values; objects, proxies and lists
// live on a heap and are reached through Ref.
struct Value {
  std::variant<std::monostate, Null, std::int64_t, bool, std::string, Ref> v;

  Value() = default;
  Value(Null n) : v(n) {}
  Value(std::int64_t i) : v(i) {}
  Value(int i) : v(std::int64_t{i}) {}
  Value(bool b) : v(b) {}
  Value(std::string s) : v(std::move(s)) {}
  Value(const char* s) : v(std::string(s)) {}
  Value(Ref r) : v(r) {}

  bool is_unit() const { return v.index() == 0; }
  bool is_null() const { return v.index() == 1; }
  bool is_int() const { return v.index() == 2; }
  bool is_bool() const { return v.index() == 3; }
  bool is_str() const { return v.index() == 4; }
  bool is_ref() const { return v.index() == 5; }

  std::int64_t as_int() const { return std::get<std::int64_t>(v); }
  bool as_bool() const { return std::get<bool>(v); }
  const std::string& as_str() const { return std::get<std::string>(v); }
  Ref as_ref() const { return std::get<Ref>(v); }

  bool operator==(const Value&) const = default;
};

enum class ObjKind : std::uint8_t { Instance, Proxy, List };

struct HeapObject {
  ObjKind kind = ObjKind::Instance;
  std::string class_name;    // Instance and Proxy
  std::vector<Value> slots;  // fields or list elements
  std::uint64_t hash = 0;    // Proxy only
  bool marked = false;
};

// Bytes an object is billed for: a 16-byte header, 8 per slot, plus the
// characters of any string held in a slot.
std::uint64_t object_size(const HeapObject& o);

struct GcStats {
  std::uint64_t live_objects = 0;
  std::uint64_t live_bytes = 0;
  std::uint64_t swept_objects = 0;
  std::uint64_t swept_bytes = 0;
  std::vector<ObjId> swept;  // ids in ascending order
};

// One isolate's object store. Ids are never reused, so a weak reference is
// simply an id whose object may since have been swept.
class Heap {
 public:
  ObjId allocate(HeapObject o);
  bool contains(ObjId id) const { return objects_.count(id) != 0; }
  HeapObject& at(ObjId id);
  const HeapObject& at(ObjId id) const;
  const std::map<ObjId, HeapObject>& objects() const { return objects_; }
  std::size_t size() const { return objects_.size(); }

  // Bytes allocated (or grown by list appends) since the last collection.
  std::uint64_t pressure() const { return pressure_; }
  void add_pressure(std::uint64_t bytes) { pressure_ += bytes; }

  // Mark from `roots`, sweep everything unmarked.
  GcStats collect(const std::vector<ObjId>& roots);

  std::size_t count(ObjKind kind) const;

 private:
  std::map<ObjId, HeapObject> objects_;
  ObjId next_ = 1;
  std::uint64_t pressure_ = 0;
};

}  // namespace encpart::runtime

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "encpart/dsl/ast.hpp"
#include "encpart/dsl/check.hpp"

namespace encpart::partitioner {

enum class Side : std::uint8_t { Trusted, Untrusted };

std::string_view to_string(Side s);
Side opposite(Side s);

// How a value crosses the boundary.
enum class MarshalKind : std::uint8_t { Primitive, Serialized, HashRef, Unit };

// "prim", "ser", "href", "unit"
std::string_view to_string(MarshalKind k);
std::optional<MarshalKind> parse_marshal_kind(std::string_view s);

// EcallProxy lives in the untrusted image and calls into the enclave;
// OcallProxy lives in the trusted image and calls out.
enum class Direction : std::uint8_t { Ecall, Ocall };

std::string_view to_string(Direction d);

struct MethodRef {
  std::string class_name;
  std::string method;

  std::string str() const { return class_name + "." + method; }
  auto operator<=>(const MethodRef&) const = default;
};

struct ProxyClassDef {
  std::string class_name;
  Direction direction = Direction::Ecall;
  std::vector<dsl::MethodSig> stubs;  // constructor stub is named kCtorName

  const dsl::MethodSig* find_stub(std::string_view name) const;
};

enum class RelayKind : std::uint8_t { Constructor, Instance };

// Entry wrapper around one public constructor or instance method. The
// isolate context and the proxy hash are implicit leading parameters.
struct RelayMethodDef {
  std::string owner;
  std::string method;  // kCtorName for constructors
  RelayKind kind = RelayKind::Instance;
  std::vector<MarshalKind> params;
  MarshalKind ret = MarshalKind::Unit;

  MethodRef ref() const { return {owner, method}; }
  bool operator==(const RelayMethodDef&) const = default;
};

struct ConcreteClass {
  dsl::ClassDecl decl;
  std::vector<RelayMethodDef> relays;

  const RelayMethodDef* find_relay(std::string_view method) const;
};

struct ImageSpec {
  Side side = Side::Trusted;
  // Every class of the source program, in source order. Shared by both
  // images so that class ids on the wire agree.
  std::vector<std::string> class_table;
  std::vector<dsl::Annotation> class_annotations;  // parallel to class_table
  std::vector<ConcreteClass> classes;
  std::vector<ProxyClassDef> proxies;
  std::vector<MethodRef> entry_points;
  // Proxies generated for this side and removed as unreachable.
  std::vector<std::string> pruned_proxies;

  const ConcreteClass* find_class(std::string_view name) const;
  const ProxyClassDef* find_proxy(std::string_view name) const;
  std::optional<std::uint32_t> class_id(std::string_view name) const;
  const std::string& class_name(std::uint32_t id) const;
  dsl::Annotation annotation_of(std::string_view name) const;
};

struct InterfaceRecord {
  Direction direction = Direction::Ecall;
  std::string class_name;
  std::string method;
  std::vector<MarshalKind> params;
  MarshalKind ret = MarshalKind::Unit;

  bool operator==(const InterfaceRecord&) const = default;
};

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct InterfaceDescriptor {
  std::vector<InterfaceRecord> records;  // sorted by (direction, class, method)

  const InterfaceRecord* find(Direction d, std::string_view cls, std::string_view method) const;
  std::size_t count(Direction d) const;

  std::string to_text() const;
  // Throws FormatError on malformed text.
  static InterfaceDescriptor from_text(std::string_view text);
};

// The program's classes split by annotation.
struct ClassSets {
  std::vector<std::string> trusted;
  std::vector<std::string> untrusted;
  std::vector<std::string> neutral;
};

struct PartitionPlan {
  ImageSpec trusted;
  ImageSpec untrusted;
  InterfaceDescriptor interface;
  ClassSets sets;

  const ImageSpec& image(Side s) const { return s == Side::Trusted ? trusted : untrusted; }
};

inline constexpr std::string_view kToolVersion = "1";

}  // namespace encpart::partitioner

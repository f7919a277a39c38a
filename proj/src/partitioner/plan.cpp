#include "encpart/partitioner/plan.hpp"

#include <algorithm>
#include <sstream>

namespace encpart::partitioner {

std::string_view to_string(Side s) { return s == Side::Trusted ? "trusted" : "untrusted"; }

Side opposite(Side s) { return s == Side::Trusted ? Side::Untrusted : Side::Trusted; }

std::string_view to_string(MarshalKind k) {
  switch (k) {
    case MarshalKind::Primitive: return "prim";
    case MarshalKind::Serialized: return "ser";
    case MarshalKind::HashRef: return "href";
    case MarshalKind::Unit: return "unit";
  }
  return "?";
}

std::optional<MarshalKind> parse_marshal_kind(std::string_view s) {
  for (auto k : {MarshalKind::Primitive, MarshalKind::Serialized, MarshalKind::HashRef, MarshalKind::Unit}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

std::string_view to_string(Direction d) { return d == Direction::Ecall ? "ecall" : "ocall"; }

const dsl::MethodSig* ProxyClassDef::find_stub(std::string_view name) const {
  for (const auto& s : stubs) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

const RelayMethodDef* ConcreteClass::find_relay(std::string_view method) const {
  for (const auto& r : relays) {
    if (r.method == method) return &r;
  }
  return nullptr;
}

const ConcreteClass* ImageSpec::find_class(std::string_view name) const {
  for (const auto& c : classes) {
    if (c.decl.name == name) return &c;
  }
  return nullptr;
}

const ProxyClassDef* ImageSpec::find_proxy(std::string_view name) const {
  for (const auto& p : proxies) {
    if (p.class_name == name) return &p;
  }
  return nullptr;
}

std::optional<std::uint32_t> ImageSpec::class_id(std::string_view name) const {
  auto it = std::find(class_table.begin(), class_table.end(), name);
  if (it == class_table.end()) return std::nullopt;
  return static_cast<std::uint32_t>(it - class_table.begin());
}

const std::string& ImageSpec::class_name(std::uint32_t id) const {
  if (id >= class_table.size()) throw FormatError("class id " + std::to_string(id) + " out of range");
  return class_table[id];
}

dsl::Annotation ImageSpec::annotation_of(std::string_view name) const {
  auto id = class_id(name);
  if (!id || *id >= class_annotations.size()) throw FormatError("unknown class `" + std::string(name) + "`");
  return class_annotations[*id];
}

const InterfaceRecord* InterfaceDescriptor::find(Direction d, std::string_view cls,
                                                 std::string_view method) const {
  for (const auto& r : records) {
    if (r.direction == d && r.class_name == cls && r.method == method) return &r;
  }
  return nullptr;
}

std::size_t InterfaceDescriptor::count(Direction d) const {
  return static_cast<std::size_t>(
      std::count_if(records.begin(), records.end(), [d](const auto& r) { return r.direction == d; }));
}

std::string InterfaceDescriptor::to_text() const {
  std::string out = "# encpart-interface " + std::string(kToolVersion) + "\n";
  for (const auto& r : records) {
    out += std::string(to_string(r.direction)) + " " + r.class_name + "." + r.method + "(";
    for (std::size_t i = 0; i < r.params.size(); ++i) {
      if (i) out += ",";
      out += to_string(r.params[i]);
    }
    out += ") -> " + std::string(to_string(r.ret)) + "\n";
  }
  return out;
}

namespace {

MarshalKind kind_or_throw(std::string_view s, int line) {
  auto k = parse_marshal_kind(s);
  if (!k) throw FormatError("interface line " + std::to_string(line) + ": unknown kind `" + std::string(s) + "`");
  return *k;
}

}  // namespace

InterfaceDescriptor InterfaceDescriptor::from_text(std::string_view text) {
  InterfaceDescriptor d;
  std::istringstream in{std::string(text)};
  std::string line;
  int n = 0;
  const std::string header = "# encpart-interface ";
  while (std::getline(in, line)) {
    ++n;
    if (n == 1) {
      if (line.rfind(header, 0) != 0) throw FormatError("interface descriptor: missing header line");
      if (line.substr(header.size()) != kToolVersion) {
        throw FormatError("interface descriptor: unsupported version `" + line.substr(header.size()) + "`");
      }
      continue;
    }
    auto bad = [&](const char* why) {
      return FormatError("interface line " + std::to_string(n) + ": " + why);
    };
    InterfaceRecord r;
    if (line.rfind("ecall ", 0) == 0) {
      r.direction = Direction::Ecall;
    } else if (line.rfind("ocall ", 0) == 0) {
      r.direction = Direction::Ocall;
    } else {
      throw bad("expected `ecall` or `ocall`");
    }
    const std::size_t open = line.find('(');
    const std::size_t close = line.find(')');
    const std::size_t dot = line.find('.');
    if (open == std::string::npos || close == std::string::npos || dot == std::string::npos || dot > open ||
        close < open) {
      throw bad("malformed record");
    }
    r.class_name = line.substr(6, dot - 6);
    r.method = line.substr(dot + 1, open - dot - 1);
    if (r.class_name.empty() || r.method.empty()) throw bad("empty class or method name");
    std::string args = line.substr(open + 1, close - open - 1);
    if (!args.empty()) {
      std::size_t start = 0;
      while (true) {
        std::size_t comma = args.find(',', start);
        r.params.push_back(kind_or_throw(args.substr(start, comma - start), n));
        if (comma == std::string::npos) break;
        start = comma + 1;
      }
    }
    const std::string arrow = ") -> ";
    if (line.compare(close, arrow.size(), arrow) != 0) throw bad("expected `-> kind`");
    r.ret = kind_or_throw(std::string_view(line).substr(close + arrow.size()), n);
    d.records.push_back(std::move(r));
  }
  if (n == 0) throw FormatError("interface descriptor is empty");
  return d;
}

}  // namespace encpart::partitioner

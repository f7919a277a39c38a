#include "encpart/dsl/ast.hpp"

namespace encpart::dsl {

std::string_view to_string(Annotation a) {
  switch (a) {
    case Annotation::Neutral: return "Neutral";
    case Annotation::Trusted: return "Trusted";
    case Annotation::Untrusted: return "Untrusted";
  }
  return "?";
}

std::string_view to_string(Visibility v) {
  return v == Visibility::Public ? "public" : "private";
}

std::string to_string(const TypeRef& t) {
  std::string base;
  switch (t.base) {
    case TypeRef::Base::Unit: base = "void"; break;
    case TypeRef::Base::Int: base = "int"; break;
    case TypeRef::Base::Bool: base = "bool"; break;
    case TypeRef::Base::Str: base = "str"; break;
    case TypeRef::Base::Class: base = t.class_name; break;
    case TypeRef::Base::Null: base = "null"; break;
    case TypeRef::Base::Any: base = "?"; break;
  }
  std::string out;
  for (int i = 0; i < t.list_depth; ++i) out += "list<";
  out += base;
  for (int i = 0; i < t.list_depth; ++i) out += '>';
  return out;
}

std::string_view op_symbol(Op op) {
  switch (op) {
    case Op::None: return "";
    case Op::Add: return "+";
    case Op::Sub: return "-";
    case Op::Mul: return "*";
    case Op::Div: return "/";
    case Op::Mod: return "%";
    case Op::Eq: return "==";
    case Op::Ne: return "!=";
    case Op::Lt: return "<";
    case Op::Le: return "<=";
    case Op::Gt: return ">";
    case Op::Ge: return ">=";
    case Op::And: return "&&";
    case Op::Or: return "||";
    case Op::Not: return "!";
    case Op::Neg: return "-";
  }
  return "";
}

const MethodDecl* ClassDecl::find_method(std::string_view n) const {
  for (const auto& m : methods) {
    if (m.name == n) return &m;
  }
  return nullptr;
}

const FieldDecl* ClassDecl::find_field(std::string_view n) const {
  for (const auto& f : fields) {
    if (f.name == n) return &f;
  }
  return nullptr;
}

int ClassDecl::field_index(std::string_view n) const {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (fields[i].name == n) return static_cast<int>(i);
  }
  return -1;
}

const ClassDecl* Program::find_class(std::string_view n) const {
  for (const auto& c : classes) {
    if (c.name == n) return &c;
  }
  return nullptr;
}

}  // namespace encpart::dsl

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace encpart::dsl {

enum class Annotation : std::uint8_t { Neutral, Trusted, Untrusted };
enum class Visibility : std::uint8_t { Public, Private };

std::string_view to_string(Annotation a);
std::string_view to_string(Visibility v);

struct SourceLoc {
  int line = 0;
  int col = 0;
  bool operator==(const SourceLoc&) const = default;
};

// A type is a base plus a list nesting depth: list<list<int>> is {Int, 2}.
// Null and Any never appear in source; the checker uses them for `null`,
// empty list literals, and error recovery.
struct TypeRef {
  enum class Base : std::uint8_t { Unit, Int, Bool, Str, Class, Null, Any };

  Base base = Base::Unit;
  std::string class_name;
  int list_depth = 0;

  static TypeRef unit() { return {Base::Unit, {}, 0}; }
  static TypeRef int_() { return {Base::Int, {}, 0}; }
  static TypeRef bool_() { return {Base::Bool, {}, 0}; }
  static TypeRef str() { return {Base::Str, {}, 0}; }
  static TypeRef null() { return {Base::Null, {}, 0}; }
  static TypeRef any(int depth = 0) { return {Base::Any, {}, depth}; }
  static TypeRef klass(std::string name) { return {Base::Class, std::move(name), 0}; }
  static TypeRef list_of(TypeRef elem) {
    elem.list_depth += 1;
    return elem;
  }

  bool is_list() const { return list_depth > 0; }
  bool is_class() const { return base == Base::Class && list_depth == 0; }
  bool is_unit() const { return base == Base::Unit && list_depth == 0; }
  bool is_primitive() const { return list_depth == 0 && (base == Base::Int || base == Base::Bool); }
  TypeRef element() const {
    TypeRef t = *this;
    t.list_depth -= 1;
    return t;
  }

  bool operator==(const TypeRef&) const = default;
};

std::string to_string(const TypeRef& t);

enum class Op : std::uint8_t {
  None,
  Add, Sub, Mul, Div, Mod,
  Eq, Ne, Lt, Le, Gt, Ge,
  And, Or,
  Not, Neg,
};

std::string_view op_symbol(Op op);

enum class ExprKind : std::uint8_t {
  IntLit,
  BoolLit,
  StrLit,
  NullLit,
  ListLit,     // args = elements
  Var,         // name
  This,
  FieldGet,    // target.name
  Unary,       // op target
  Binary,      // target op args[0]
  New,         // new class_name(args)
  Call,        // target.name(args)
  StaticCall,  // class_name.name(args)
  Builtin,     // name(args)
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  ExprKind kind = ExprKind::NullLit;
  SourceLoc loc;
  Op op = Op::None;
  std::int64_t int_value = 0;
  bool bool_value = false;
  std::string text;  // string literal contents, or variable/field/method/builtin name
  std::string class_name;
  ExprPtr target;
  std::vector<ExprPtr> args;
};

enum class StmtKind : std::uint8_t { Local, Assign, FieldAssign, ExprStmt, Return, If, While };
enum class AssignOp : std::uint8_t { Set, Add, Sub };

struct Stmt;
using StmtPtr = std::shared_ptr<const Stmt>;

struct Stmt {
  StmtKind kind = StmtKind::ExprStmt;
  SourceLoc loc;
  std::string name;                     // local or field name
  std::optional<TypeRef> declared_type; // Local only; nullopt means `var`
  AssignOp op = AssignOp::Set;
  ExprPtr target;                       // FieldAssign receiver
  ExprPtr value;                        // initializer, assigned value, expression, return value
  ExprPtr cond;                         // If / While
  std::vector<StmtPtr> body;
  std::vector<StmtPtr> else_body;
};

struct FieldDecl {
  std::string name;
  TypeRef type;
  Visibility visibility = Visibility::Private;
  ExprPtr init;
  SourceLoc loc;
};

struct Param {
  std::string name;
  TypeRef type;
  bool operator==(const Param&) const = default;
};

struct MethodDecl {
  std::string name;  // class name for constructors
  std::vector<Param> params;
  TypeRef ret = TypeRef::unit();
  std::vector<StmtPtr> body;
  bool is_constructor = false;
  bool is_static = false;
  Visibility visibility = Visibility::Public;
  SourceLoc loc;
};

struct ClassDecl {
  std::string name;
  Annotation annotation = Annotation::Neutral;
  std::vector<FieldDecl> fields;
  std::vector<MethodDecl> constructors;
  std::vector<MethodDecl> methods;
  SourceLoc loc;

  const MethodDecl* find_method(std::string_view n) const;
  const FieldDecl* find_field(std::string_view n) const;
  const MethodDecl* constructor() const {
    return constructors.empty() ? nullptr : &constructors.front();
  }
  int field_index(std::string_view n) const;
};

struct Program {
  std::vector<ClassDecl> classes;
  std::size_t main_class = 0;  // index into classes; main is its static `main`

  const ClassDecl* find_class(std::string_view n) const;
  const ClassDecl& entry_class() const { return classes.at(main_class); }
  const MethodDecl& entry() const { return *entry_class().find_method("main"); }
};

// The synthetic name used for constructors in call graphs, relays and the
// interface descriptor.
inline constexpr std::string_view kCtorName = "<init>";

}  // namespace encpart::dsl

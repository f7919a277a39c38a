#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "encpart/dsl/ast.hpp"

namespace encpart::dsl {

enum class Rule {
  Encapsulation,
  MainPlacement,
  MainSignature,
  UnresolvedType,
  TypeError,
  ForeignFieldAccess,
  StaticInAnnotated,
  Visibility,
  DuplicateParam,
};

std::string_view to_string(Rule r);

struct MethodSig {
  std::string name;
  std::vector<Param> params;
  TypeRef ret = TypeRef::unit();
  bool is_constructor = false;
  bool is_static = false;
  Visibility visibility = Visibility::Public;
};

MethodSig signature_of(const MethodDecl& m);

// What a body may legally see of a class: fields only when the class body
// is present in the current image, methods always.
struct ClassSig {
  std::string name;
  Annotation annotation = Annotation::Neutral;
  std::vector<FieldDecl> fields;
  std::vector<MethodSig> methods;
  MethodSig ctor;  // implicit public no-arg constructor when none is declared

  const MethodSig* find_method(std::string_view n) const;
  const FieldDecl* find_field(std::string_view n) const;
};

class SignatureTable {
 public:
  static SignatureTable from_program(const Program& p);

  void add(ClassSig sig);
  const ClassSig* find(std::string_view name) const;
  const std::map<std::string, ClassSig, std::less<>>& classes() const { return classes_; }

 private:
  std::map<std::string, ClassSig, std::less<>> classes_;
};

ClassSig class_sig_of(const ClassDecl& c);

struct CallSite {
  enum class Kind { Instance, Constructor, Static };
  Kind kind = Kind::Instance;
  std::string class_name;
  std::string method;  // kCtorName for constructors
  SourceLoc loc;
};

struct Diagnostic {
  Rule rule = Rule::TypeError;
  SourceLoc loc;
  std::string message;
};

// Everything one pass over a body learns: its diagnostics, the call sites it
// resolves statically, and every class type it mentions.
struct BodyFacts {
  std::vector<Diagnostic> diagnostics;
  std::vector<CallSite> calls;
  std::vector<std::string> class_refs;
};

// Analyzes `method` of class `cls` against `sigs`.
BodyFacts analyze_method(const SignatureTable& sigs, const ClassDecl& cls, const MethodDecl& method);

// Analyzes the implicit `<init>` of `cls`: field initializers followed by
// the declared constructor body, if any.
BodyFacts analyze_constructor(const SignatureTable& sigs, const ClassDecl& cls);

// Resolves a type mentioned in a body or signature; Any/Null are compatible
// in the directions the checker allows.
bool assignable(const TypeRef& to, const TypeRef& from);

}  // namespace encpart::dsl

#include "encpart/dsl/validate.hpp"

#include <set>

namespace encpart::dsl {

std::string format_violation(const Violation& v) {
  std::string where = v.class_name;
  if (!v.method.empty()) where += "." + v.method;
  return std::string(to_string(v.rule)) + " " + where + " at " + std::to_string(v.loc.line) + ":" +
         std::to_string(v.loc.col) + ": " + v.message;
}

bool ValidationReport::has(Rule rule) const {
  for (const auto& v : violations) {
    if (v.rule == rule) return true;
  }
  return false;
}

namespace {

class Validator {
 public:
  explicit Validator(const Program& p) : program_(p), sigs_(SignatureTable::from_program(p)) {}

  ValidationReport run() {
    for (const auto& c : program_.classes) klass(c);
    return std::move(report_);
  }

 private:
  void add(Rule rule, const ClassDecl& c, const std::string& method, SourceLoc loc, std::string msg) {
    report_.violations.push_back({rule, c.name, method, loc, std::move(msg)});
  }

  void klass(const ClassDecl& c) {
    const bool annotated = c.annotation != Annotation::Neutral;
    for (const auto& f : c.fields) {
      if (annotated && f.visibility != Visibility::Private) {
        add(Rule::Encapsulation, c, "", f.loc,
            "field `" + f.name + "` of " + std::string(to_string(c.annotation)) +
                " class must be private");
      }
    }
    for (const auto& ctor : c.constructors) {
      signature(c, ctor);
      if (ctor.visibility == Visibility::Private) {
        add(Rule::Visibility, c, std::string(kCtorName), ctor.loc, "constructors must be public");
      }
    }
    for (const auto& m : c.methods) {
      signature(c, m);
      if (m.name == "main") {
        entry(c, m);
      } else if (m.is_static && annotated) {
        add(Rule::StaticInAnnotated, c, m.name, m.loc,
            "static method in " + std::string(to_string(c.annotation)) + " class");
      }
    }
    body(c, std::string(kCtorName), analyze_constructor(sigs_, c));
    for (const auto& m : c.methods) body(c, m.name, analyze_method(sigs_, c, m));
  }

  void signature(const ClassDecl& c, const MethodDecl& m) {
    const std::string name = m.is_constructor ? std::string(kCtorName) : m.name;
    std::set<std::string> seen;
    for (const auto& p : m.params) {
      if (!seen.insert(p.name).second) {
        add(Rule::DuplicateParam, c, name, m.loc, "parameter `" + p.name + "` declared twice");
      }
    }
  }

  void entry(const ClassDecl& c, const MethodDecl& m) {
    if (c.annotation == Annotation::Trusted) {
      add(Rule::MainPlacement, c, m.name, m.loc, "`main` may not live in a Trusted class");
    }
    const bool params_ok =
        m.params.empty() ||
        (m.params.size() == 1 && m.params[0].type == TypeRef::list_of(TypeRef::str()));
    if (!m.is_static || !m.ret.is_unit() || !params_ok) {
      add(Rule::MainSignature, c, m.name, m.loc,
          "`main` must be `static void main()` or `static void main(list<str> args)`");
    }
  }

  void body(const ClassDecl& c, const std::string& method, const BodyFacts& facts) {
    for (const auto& d : facts.diagnostics) add(d.rule, c, method, d.loc, d.message);
  }

  const Program& program_;
  SignatureTable sigs_;
  ValidationReport report_;
};

}  // namespace

ValidationReport validate(const Program& program) { return Validator(program).run(); }

}  // namespace encpart::dsl

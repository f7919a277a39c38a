#include "encpart/dsl/check.hpp"

#include <algorithm>

namespace encpart::dsl {

std::string_view to_string(Rule r) {
  switch (r) {
    case Rule::Encapsulation: return "ENCAPSULATION";
    case Rule::MainPlacement: return "MAIN_PLACEMENT";
    case Rule::MainSignature: return "MAIN_SIGNATURE";
    case Rule::UnresolvedType: return "UNRESOLVED_TYPE";
    case Rule::TypeError: return "TYPE_ERROR";
    case Rule::ForeignFieldAccess: return "FOREIGN_FIELD_ACCESS";
    case Rule::StaticInAnnotated: return "STATIC_IN_ANNOTATED";
    case Rule::Visibility: return "VISIBILITY";
    case Rule::DuplicateParam: return "DUPLICATE_PARAM";
  }
  return "?";
}

MethodSig signature_of(const MethodDecl& m) {
  MethodSig s;
  s.name = m.is_constructor ? std::string(kCtorName) : m.name;
  s.params = m.params;
  s.ret = m.ret;
  s.is_constructor = m.is_constructor;
  s.is_static = m.is_static;
  s.visibility = m.visibility;
  return s;
}

const MethodSig* ClassSig::find_method(std::string_view n) const {
  for (const auto& m : methods) {
    if (m.name == n) return &m;
  }
  return nullptr;
}

const FieldDecl* ClassSig::find_field(std::string_view n) const {
  for (const auto& f : fields) {
    if (f.name == n) return &f;
  }
  return nullptr;
}

ClassSig class_sig_of(const ClassDecl& c) {
  ClassSig s;
  s.name = c.name;
  s.annotation = c.annotation;
  s.fields = c.fields;
  for (const auto& m : c.methods) s.methods.push_back(signature_of(m));
  if (const MethodDecl* ctor = c.constructor()) {
    s.ctor = signature_of(*ctor);
  } else {
    s.ctor.name = std::string(kCtorName);
    s.ctor.is_constructor = true;
  }
  return s;
}

SignatureTable SignatureTable::from_program(const Program& p) {
  SignatureTable t;
  for (const auto& c : p.classes) t.add(class_sig_of(c));
  return t;
}

void SignatureTable::add(ClassSig sig) {
  auto name = sig.name;
  classes_.insert_or_assign(std::move(name), std::move(sig));
}

const ClassSig* SignatureTable::find(std::string_view name) const {
  auto it = classes_.find(name);
  return it == classes_.end() ? nullptr : &it->second;
}

bool assignable(const TypeRef& to, const TypeRef& from) {
  using B = TypeRef::Base;
  if (from.base == B::Any && from.list_depth == 0) return true;
  if (to.base == B::Any && to.list_depth == 0) return true;
  if (from.base == B::Any) return to.list_depth >= from.list_depth;
  if (from.base == B::Null && from.list_depth == 0) return to.is_class() || to.is_list();
  return to == from;
}

namespace {

using B = TypeRef::Base;

class BodyChecker {
 public:
  BodyChecker(const SignatureTable& sigs, const ClassDecl& cls) : sigs_(sigs), cls_(cls) {
    self_ = sigs_.find(cls.name);
  }

  void check_method(const MethodDecl& m) {
    in_static_ = m.is_static;
    ret_ = m.is_constructor ? TypeRef::unit() : m.ret;
    scopes_.clear();
    scopes_.emplace_back();
    for (const auto& p : m.params) {
      note_type(p.type, m.loc);
      declare(p.name, p.type, m.loc);
    }
    note_type(m.ret, m.loc);
    block(m.body, /*new_scope=*/false);
  }

  void check_field_inits() {
    in_static_ = false;
    ret_ = TypeRef::unit();
    scopes_.clear();
    scopes_.emplace_back();
    for (const auto& f : cls_.fields) {
      note_type(f.type, f.loc);
      if (!f.init) continue;
      TypeRef t = expr(*f.init);
      if (!assignable(f.type, t)) {
        error(Rule::TypeError, f.init->loc,
              "field `" + f.name + "` of type " + to_string(f.type) + " initialized with " +
                  to_string(t));
      }
    }
  }

  BodyFacts take() { return std::move(facts_); }

 private:
  void error(Rule rule, SourceLoc loc, std::string msg) {
    facts_.diagnostics.push_back({rule, loc, std::move(msg)});
  }

  // Records class references and reports unknown class names.
  bool note_type(const TypeRef& t, SourceLoc loc) {
    if (t.base != B::Class) return true;
    if (!sigs_.find(t.class_name)) {
      error(Rule::UnresolvedType, loc, "unknown class `" + t.class_name + "`");
      return false;
    }
    facts_.class_refs.push_back(t.class_name);
    return true;
  }

  const TypeRef* lookup(const std::string& name) const {
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
      auto f = it->find(name);
      if (f != it->end()) return &f->second;
    }
    return nullptr;
  }

  void declare(const std::string& name, const TypeRef& t, SourceLoc loc) {
    if (lookup(name)) {
      error(Rule::TypeError, loc, "variable `" + name + "` is already declared");
    } else if (sigs_.find(name)) {
      error(Rule::TypeError, loc, "variable `" + name + "` shadows a class name");
    }
    scopes_.back()[name] = t;
  }

  void block(const std::vector<StmtPtr>& body, bool new_scope = true) {
    if (new_scope) scopes_.emplace_back();
    for (const auto& s : body) stmt(*s);
    if (new_scope) scopes_.pop_back();
  }

  void expect(const TypeRef& want, const TypeRef& got, SourceLoc loc, const std::string& what) {
    if (!assignable(want, got)) {
      error(Rule::TypeError, loc, what + ": expected " + to_string(want) + ", found " + to_string(got));
    }
  }

  void compound(AssignOp op, const TypeRef& t, SourceLoc loc) {
    if (op == AssignOp::Set) return;
    const bool ok = t == TypeRef::int_() || (op == AssignOp::Add && t == TypeRef::str()) ||
                    t == TypeRef::any();
    if (!ok) error(Rule::TypeError, loc, "compound assignment on " + to_string(t));
  }

  const FieldDecl* own_field(const Expr* target, const std::string& name, SourceLoc loc) {
    if (target->kind != ExprKind::This) {
      expr(*target);
      error(Rule::ForeignFieldAccess, loc,
            "field `" + name + "` accessed on another object; use a method instead");
      return nullptr;
    }
    if (in_static_) {
      error(Rule::TypeError, loc, "`this` is not available in a static method");
      return nullptr;
    }
    const FieldDecl* f = cls_.find_field(name);
    if (!f) error(Rule::TypeError, loc, "class `" + cls_.name + "` has no field `" + name + "`");
    return f;
  }

  void stmt(const Stmt& s) {
    switch (s.kind) {
      case StmtKind::Local: {
        TypeRef t;
        if (s.declared_type) {
          t = *s.declared_type;
          note_type(t, s.loc);
          if (t.is_unit()) error(Rule::TypeError, s.loc, "local of type void");
          if (s.value) expect(t, expr(*s.value), s.value->loc, "initializer of `" + s.name + "`");
        } else {
          t = expr(*s.value);
          const bool vague = t.base == B::Null || (t.base == B::Any && t.list_depth > 0) || t.is_unit();
          if (vague) {
            error(Rule::TypeError, s.loc, "cannot infer a type for `" + s.name + "`");
            t = TypeRef::any();
          }
        }
        declare(s.name, t, s.loc);
        break;
      }
      case StmtKind::Assign: {
        TypeRef v = expr(*s.value);
        const TypeRef* t = lookup(s.name);
        if (!t) {
          error(Rule::TypeError, s.loc, "unknown variable `" + s.name + "`");
          break;
        }
        expect(*t, v, s.value->loc, "assignment to `" + s.name + "`");
        compound(s.op, *t, s.loc);
        break;
      }
      case StmtKind::FieldAssign: {
        TypeRef v = expr(*s.value);
        if (const FieldDecl* f = own_field(s.target.get(), s.name, s.loc)) {
          expect(f->type, v, s.value->loc, "assignment to field `" + s.name + "`");
          compound(s.op, f->type, s.loc);
        }
        break;
      }
      case StmtKind::ExprStmt:
        expr(*s.value);
        break;
      case StmtKind::Return:
        if (ret_.is_unit()) {
          if (s.value) {
            expr(*s.value);
            error(Rule::TypeError, s.loc, "returning a value from a void method");
          }
        } else if (!s.value) {
          error(Rule::TypeError, s.loc, "missing return value of type " + to_string(ret_));
        } else {
          expect(ret_, expr(*s.value), s.value->loc, "return value");
        }
        break;
      case StmtKind::If:
        expect(TypeRef::bool_(), expr(*s.cond), s.cond->loc, "condition");
        block(s.body);
        block(s.else_body);
        break;
      case StmtKind::While:
        expect(TypeRef::bool_(), expr(*s.cond), s.cond->loc, "condition");
        block(s.body);
        break;
    }
  }

  void check_args(const std::vector<Param>& params, const std::vector<ExprPtr>& args,
                  SourceLoc loc, const std::string& what) {
    std::vector<TypeRef> types;
    for (const auto& a : args) types.push_back(expr(*a));
    if (params.size() != args.size()) {
      error(Rule::TypeError, loc,
            what + " takes " + std::to_string(params.size()) + " argument(s), given " +
                std::to_string(args.size()));
      return;
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
      expect(params[i].type, types[i], args[i]->loc, what + " argument `" + params[i].name + "`");
    }
  }

  void note_sig(const MethodSig& m, SourceLoc loc) {
    for (const auto& p : m.params) note_type(p.type, loc);
    note_type(m.ret, loc);
  }

  TypeRef expr(const Expr& e) {
    switch (e.kind) {
      case ExprKind::IntLit: return TypeRef::int_();
      case ExprKind::BoolLit: return TypeRef::bool_();
      case ExprKind::StrLit: return TypeRef::str();
      case ExprKind::NullLit: return TypeRef::null();
      case ExprKind::ListLit: {
        std::optional<TypeRef> elem;
        std::vector<TypeRef> types;
        for (const auto& a : e.args) {
          types.push_back(expr(*a));
          const TypeRef& t = types.back();
          if (!elem && t.base != B::Null && !(t.base == B::Any && t.list_depth > 0)) elem = t;
        }
        if (!elem) {
          int depth = 1;
          for (const auto& t : types) {
            if (t.base == B::Any) depth = std::max(depth, t.list_depth + 1);
          }
          return TypeRef::any(depth);
        }
        for (std::size_t i = 0; i < types.size(); ++i) {
          expect(*elem, types[i], e.args[i]->loc, "list element");
        }
        if (elem->is_unit()) error(Rule::TypeError, e.loc, "list of void");
        return TypeRef::list_of(*elem);
      }
      case ExprKind::Var: {
        if (const TypeRef* t = lookup(e.text)) return *t;
        error(Rule::TypeError, e.loc, "unknown variable `" + e.text + "`");
        return TypeRef::any();
      }
      case ExprKind::This:
        if (in_static_) {
          error(Rule::TypeError, e.loc, "`this` is not available in a static method");
          return TypeRef::any();
        }
        return TypeRef::klass(cls_.name);
      case ExprKind::FieldGet: {
        const FieldDecl* f = own_field(e.target.get(), e.text, e.loc);
        return f ? f->type : TypeRef::any();
      }
      case ExprKind::Unary: {
        TypeRef t = expr(*e.target);
        if (e.op == Op::Neg) {
          expect(TypeRef::int_(), t, e.loc, "operand of unary -");
          return TypeRef::int_();
        }
        expect(TypeRef::bool_(), t, e.loc, "operand of !");
        return TypeRef::bool_();
      }
      case ExprKind::Binary: return binary(e);
      case ExprKind::New: {
        const ClassSig* c = sigs_.find(e.class_name);
        if (!c) {
          for (const auto& a : e.args) expr(*a);
          error(Rule::UnresolvedType, e.loc, "unknown class `" + e.class_name + "`");
          return TypeRef::any();
        }
        facts_.class_refs.push_back(c->name);
        if (c->ctor.visibility == Visibility::Private && c->name != cls_.name) {
          error(Rule::Visibility, e.loc, "constructor of `" + c->name + "` is private");
        }
        note_sig(c->ctor, e.loc);
        check_args(c->ctor.params, e.args, e.loc, "constructor of `" + c->name + "`");
        facts_.calls.push_back({CallSite::Kind::Constructor, c->name, std::string(kCtorName), e.loc});
        return TypeRef::klass(c->name);
      }
      case ExprKind::Call: return call(e);
      case ExprKind::StaticCall: {
        const ClassSig* c = sigs_.find(e.class_name);
        const MethodSig* m = c ? c->find_method(e.text) : nullptr;
        if (!m || !m->is_static) {
          for (const auto& a : e.args) expr(*a);
          error(Rule::TypeError, e.loc, "no static method `" + e.class_name + "." + e.text + "`");
          return TypeRef::any();
        }
        if (m->name == "main") {
          error(Rule::TypeError, e.loc, "`main` cannot be called");
        }
        if (m->visibility == Visibility::Private && c->name != cls_.name) {
          error(Rule::Visibility, e.loc, "method `" + c->name + "." + m->name + "` is private");
        }
        note_sig(*m, e.loc);
        check_args(m->params, e.args, e.loc, "`" + c->name + "." + m->name + "`");
        facts_.calls.push_back({CallSite::Kind::Static, c->name, m->name, e.loc});
        return m->ret;
      }
      case ExprKind::Builtin: return builtin(e);
    }
    return TypeRef::any();
  }

  TypeRef binary(const Expr& e) {
    TypeRef l = expr(*e.target);
    TypeRef r = expr(*e.args[0]);
    const std::string what = "operand of " + std::string(op_symbol(e.op));
    switch (e.op) {
      case Op::Add:
        if (l == TypeRef::str() || r == TypeRef::str()) {
          expect(TypeRef::str(), l, e.loc, what);
          expect(TypeRef::str(), r, e.loc, what);
          return TypeRef::str();
        }
        [[fallthrough]];
      case Op::Sub:
      case Op::Mul:
      case Op::Div:
      case Op::Mod:
        expect(TypeRef::int_(), l, e.loc, what);
        expect(TypeRef::int_(), r, e.loc, what);
        return TypeRef::int_();
      case Op::Lt:
      case Op::Le:
      case Op::Gt:
      case Op::Ge:
        expect(TypeRef::int_(), l, e.loc, what);
        expect(TypeRef::int_(), r, e.loc, what);
        return TypeRef::bool_();
      case Op::Eq:
      case Op::Ne:
        if (l.is_unit() || r.is_unit() || (!assignable(l, r) && !assignable(r, l))) {
          error(Rule::TypeError, e.loc, "cannot compare " + to_string(l) + " with " + to_string(r));
        }
        return TypeRef::bool_();
      case Op::And:
      case Op::Or:
        expect(TypeRef::bool_(), l, e.loc, what);
        expect(TypeRef::bool_(), r, e.loc, what);
        return TypeRef::bool_();
      default:
        error(Rule::TypeError, e.loc, "bad binary operator");
        return TypeRef::any();
    }
  }

  TypeRef call(const Expr& e) {
    TypeRef recv = expr(*e.target);
    if (recv == TypeRef::any()) {
      for (const auto& a : e.args) expr(*a);
      return TypeRef::any();
    }
    if (recv.is_list()) return list_call(e, recv);
    if (!recv.is_class()) {
      for (const auto& a : e.args) expr(*a);
      error(Rule::TypeError, e.loc, "cannot call `" + e.text + "` on " + to_string(recv));
      return TypeRef::any();
    }
    const ClassSig* c = sigs_.find(recv.class_name);
    const MethodSig* m = c ? c->find_method(e.text) : nullptr;
    if (!m) {
      for (const auto& a : e.args) expr(*a);
      error(Rule::TypeError, e.loc, "class `" + recv.class_name + "` has no method `" + e.text + "`");
      return TypeRef::any();
    }
    if (m->is_static) {
      error(Rule::TypeError, e.loc, "static method `" + e.text + "` called on an instance");
    }
    if (m->visibility == Visibility::Private && e.target->kind != ExprKind::This) {
      error(Rule::Visibility, e.loc,
            "private method `" + c->name + "." + m->name + "` called on another object");
    }
    note_sig(*m, e.loc);
    check_args(m->params, e.args, e.loc, "`" + c->name + "." + m->name + "`");
    facts_.calls.push_back({CallSite::Kind::Instance, c->name, m->name, e.loc});
    return m->ret;
  }

  TypeRef list_call(const Expr& e, const TypeRef& recv) {
    TypeRef elem = recv.element();
    if (recv.base == B::Any) elem = TypeRef::any();
    if (e.text == "get") {
      check_args({{"index", TypeRef::int_()}}, e.args, e.loc, "list.get");
      return elem;
    }
    if (e.text == "set") {
      check_args({{"index", TypeRef::int_()}, {"value", elem}}, e.args, e.loc, "list.set");
      return TypeRef::unit();
    }
    if (e.text == "append") {
      check_args({{"value", elem}}, e.args, e.loc, "list.append");
      return TypeRef::unit();
    }
    if (e.text == "len") {
      check_args({}, e.args, e.loc, "list.len");
      return TypeRef::int_();
    }
    for (const auto& a : e.args) expr(*a);
    error(Rule::TypeError, e.loc, "lists have no method `" + e.text + "`");
    return TypeRef::any();
  }

  TypeRef builtin(const Expr& e) {
    const std::string& n = e.text;
    auto scalar_arg = [&](const char* what) {
      if (e.args.size() != 1) {
        for (const auto& a : e.args) expr(*a);
        error(Rule::TypeError, e.loc, std::string(what) + " takes 1 argument");
        return;
      }
      TypeRef t = expr(*e.args[0]);
      const bool ok = t == TypeRef::int_() || t == TypeRef::bool_() || t == TypeRef::str() ||
                      t == TypeRef::any();
      if (!ok) error(Rule::TypeError, e.loc, std::string(what) + " of " + to_string(t));
    };
    if (n == "print") {
      scalar_arg("print");
      return TypeRef::unit();
    }
    if (n == "to_str") {
      scalar_arg("to_str");
      return TypeRef::str();
    }
    if (n == "file_write") {
      check_args({{"path", TypeRef::str()}, {"data", TypeRef::str()}}, e.args, e.loc, "file_write");
      return TypeRef::unit();
    }
    if (n == "file_read") {
      check_args({{"path", TypeRef::str()}}, e.args, e.loc, "file_read");
      return TypeRef::str();
    }
    if (n == "compute") {
      check_args({{"units", TypeRef::int_()}}, e.args, e.loc, "compute");
      return TypeRef::unit();
    }
    if (n == "gc") {
      check_args({}, e.args, e.loc, "gc");
      return TypeRef::unit();
    }
    if (n == "repeat") {
      check_args({{"text", TypeRef::str()}, {"count", TypeRef::int_()}}, e.args, e.loc, "repeat");
      return TypeRef::str();
    }
    for (const auto& a : e.args) expr(*a);
    error(Rule::TypeError, e.loc, "unknown function `" + n + "`");
    return TypeRef::any();
  }

  const SignatureTable& sigs_;
  const ClassDecl& cls_;
  const ClassSig* self_ = nullptr;
  bool in_static_ = false;
  TypeRef ret_;
  std::vector<std::map<std::string, TypeRef>> scopes_;
  BodyFacts facts_;
};

}  // namespace

BodyFacts analyze_method(const SignatureTable& sigs, const ClassDecl& cls, const MethodDecl& method) {
  BodyChecker c(sigs, cls);
  c.check_method(method);
  return c.take();
}

BodyFacts analyze_constructor(const SignatureTable& sigs, const ClassDecl& cls) {
  BodyChecker c(sigs, cls);
  c.check_field_inits();
  BodyFacts facts = c.take();
  if (const MethodDecl* ctor = cls.constructor()) {
    BodyChecker b(sigs, cls);
    b.check_method(*ctor);
    BodyFacts more = b.take();
    facts.diagnostics.insert(facts.diagnostics.end(), more.diagnostics.begin(), more.diagnostics.end());
    facts.calls.insert(facts.calls.end(), more.calls.begin(), more.calls.end());
    facts.class_refs.insert(facts.class_refs.end(), more.class_refs.begin(), more.class_refs.end());
  }
  return facts;
}

}  // namespace encpart::dsl

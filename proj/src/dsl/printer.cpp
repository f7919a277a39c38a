#include "encpart/dsl/printer.hpp"

#include <sstream>

namespace encpart::dsl {

namespace {

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      default: out += c;
    }
  }
  out += '"';
  return out;
}

bool needs_parens(const Expr& e) {
  return e.kind == ExprKind::Binary || e.kind == ExprKind::Unary;
}

std::string print_args(const std::vector<ExprPtr>& args) {
  std::string out = "(";
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) out += ", ";
    out += print_expr(*args[i]);
  }
  return out + ")";
}

std::string print_operand(const Expr& e) {
  return needs_parens(e) ? "(" + print_expr(e) + ")" : print_expr(e);
}

class Writer {
 public:
  void line(int indent, const std::string& text) {
    out_ << std::string(static_cast<std::size_t>(indent) * 2, ' ') << text << '\n';
  }

  void stmts(int indent, const std::vector<StmtPtr>& body) {
    for (const auto& s : body) stmt(indent, *s);
  }

  void stmt(int indent, const Stmt& s) {
    switch (s.kind) {
      case StmtKind::Local: {
        std::string head = s.declared_type ? to_string(*s.declared_type) : "var";
        head += " " + s.name;
        if (s.value) head += " = " + print_expr(*s.value);
        line(indent, head + ";");
        break;
      }
      case StmtKind::Assign:
      case StmtKind::FieldAssign: {
        std::string lhs = s.kind == StmtKind::Assign ? s.name : print_operand(*s.target) + "." + s.name;
        const char* op = s.op == AssignOp::Set ? " = " : s.op == AssignOp::Add ? " += " : " -= ";
        line(indent, lhs + op + print_expr(*s.value) + ";");
        break;
      }
      case StmtKind::ExprStmt:
        line(indent, print_expr(*s.value) + ";");
        break;
      case StmtKind::Return:
        line(indent, s.value ? "return " + print_expr(*s.value) + ";" : "return;");
        break;
      case StmtKind::If:
        if_chain(indent, s, "if");
        break;
      case StmtKind::While:
        line(indent, "while (" + print_expr(*s.cond) + ") {");
        stmts(indent + 1, s.body);
        line(indent, "}");
        break;
    }
  }

  void if_chain(int indent, const Stmt& s, const std::string& lead) {
    line(indent, lead + " (" + print_expr(*s.cond) + ") {");
    stmts(indent + 1, s.body);
    if (s.else_body.empty()) {
      line(indent, "}");
    } else if (s.else_body.size() == 1 && s.else_body[0]->kind == StmtKind::If) {
      if_chain(indent, *s.else_body[0], "} else if");
    } else {
      line(indent, "} else {");
      stmts(indent + 1, s.else_body);
      line(indent, "}");
    }
  }

  void klass(const ClassDecl& c) {
    if (c.annotation != Annotation::Neutral) line(0, "@" + std::string(to_string(c.annotation)));
    line(0, "class " + c.name + " {");
    for (const auto& f : c.fields) {
      std::string text = std::string(to_string(f.visibility)) + " " + to_string(f.type) + " " + f.name;
      if (f.init) text += " = " + print_expr(*f.init);
      line(1, text + ";");
    }
    for (const auto& m : c.constructors) method(m);
    for (const auto& m : c.methods) method(m);
    line(0, "}");
  }

  void method(const MethodDecl& m) {
    line(1, print_signature(m) + " {");
    stmts(2, m.body);
    line(1, "}");
  }

  std::string str() const { return out_.str(); }

 private:
  std::ostringstream out_;
};

}  // namespace

std::string print_expr(const Expr& e) {
  switch (e.kind) {
    case ExprKind::IntLit: return std::to_string(e.int_value);
    case ExprKind::BoolLit: return e.bool_value ? "true" : "false";
    case ExprKind::StrLit: return quote(e.text);
    case ExprKind::NullLit: return "null";
    case ExprKind::ListLit: {
      std::string out = "[";
      for (std::size_t i = 0; i < e.args.size(); ++i) {
        if (i) out += ", ";
        out += print_expr(*e.args[i]);
      }
      return out + "]";
    }
    case ExprKind::Var: return e.text;
    case ExprKind::This: return "this";
    case ExprKind::FieldGet: return print_operand(*e.target) + "." + e.text;
    case ExprKind::Unary: {
      const Expr& t = *e.target;
      // `-(5)` must not collapse into the literal -5 on reparse.
      const bool wrap = needs_parens(t) || t.kind == ExprKind::IntLit;
      return std::string(op_symbol(e.op)) + (wrap ? "(" + print_expr(t) + ")" : print_expr(t));
    }
    case ExprKind::Binary:
      return print_operand(*e.target) + " " + std::string(op_symbol(e.op)) + " " +
             print_operand(*e.args[0]);
    case ExprKind::New: return "new " + e.class_name + print_args(e.args);
    case ExprKind::Call: return print_operand(*e.target) + "." + e.text + print_args(e.args);
    case ExprKind::StaticCall: return e.class_name + "." + e.text + print_args(e.args);
    case ExprKind::Builtin: return e.text + print_args(e.args);
  }
  return "";
}

std::string print_signature(const MethodDecl& m) {
  std::string out = std::string(to_string(m.visibility)) + " ";
  if (m.is_static) out += "static ";
  if (!m.is_constructor) out += to_string(m.ret) + " ";
  out += m.name + "(";
  for (std::size_t i = 0; i < m.params.size(); ++i) {
    if (i) out += ", ";
    out += to_string(m.params[i].type) + " " + m.params[i].name;
  }
  return out + ")";
}

std::string print_class(const ClassDecl& cls) {
  Writer w;
  w.klass(cls);
  return w.str();
}

std::string print_program(const Program& program) {
  std::string out;
  for (std::size_t i = 0; i < program.classes.size(); ++i) {
    if (i) out += '\n';
    out += print_class(program.classes[i]);
  }
  return out;
}

namespace {

bool same_expr(const ExprPtr& a, const ExprPtr& b);

bool same_exprs(const std::vector<ExprPtr>& a, const std::vector<ExprPtr>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!same_expr(a[i], b[i])) return false;
  }
  return true;
}

bool same_expr(const ExprPtr& a, const ExprPtr& b) {
  if (!a || !b) return !a && !b;
  return a->kind == b->kind && a->op == b->op && a->int_value == b->int_value &&
         a->bool_value == b->bool_value && a->text == b->text && a->class_name == b->class_name &&
         same_expr(a->target, b->target) && same_exprs(a->args, b->args);
}

bool same_stmts(const std::vector<StmtPtr>& a, const std::vector<StmtPtr>& b);

bool same_stmt(const Stmt& a, const Stmt& b) {
  return a.kind == b.kind && a.name == b.name && a.declared_type == b.declared_type &&
         a.op == b.op && same_expr(a.target, b.target) && same_expr(a.value, b.value) &&
         same_expr(a.cond, b.cond) && same_stmts(a.body, b.body) &&
         same_stmts(a.else_body, b.else_body);
}

bool same_stmts(const std::vector<StmtPtr>& a, const std::vector<StmtPtr>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!same_stmt(*a[i], *b[i])) return false;
  }
  return true;
}

bool same_method(const MethodDecl& a, const MethodDecl& b) {
  return a.name == b.name && a.params == b.params && a.ret == b.ret &&
         a.is_constructor == b.is_constructor && a.is_static == b.is_static &&
         a.visibility == b.visibility && same_stmts(a.body, b.body);
}

bool same_methods(const std::vector<MethodDecl>& a, const std::vector<MethodDecl>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!same_method(a[i], b[i])) return false;
  }
  return true;
}

bool same_class(const ClassDecl& a, const ClassDecl& b) {
  if (a.name != b.name || a.annotation != b.annotation || a.fields.size() != b.fields.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.fields.size(); ++i) {
    const auto& fa = a.fields[i];
    const auto& fb = b.fields[i];
    if (fa.name != fb.name || fa.type != fb.type || fa.visibility != fb.visibility ||
        !same_expr(fa.init, fb.init)) {
      return false;
    }
  }
  return same_methods(a.constructors, b.constructors) && same_methods(a.methods, b.methods);
}

}  // namespace

bool same_program(const Program& a, const Program& b) {
  if (a.classes.size() != b.classes.size() || a.main_class != b.main_class) return false;
  for (std::size_t i = 0; i < a.classes.size(); ++i) {
    if (!same_class(a.classes[i], b.classes[i])) return false;
  }
  return true;
}

}  // namespace encpart::dsl

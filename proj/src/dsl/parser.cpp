#include "encpart/dsl/parser.hpp"

#include <array>
#include <charconv>
#include <limits>
#include <set>

namespace encpart::dsl {

std::string_view to_string(ParseErrorKind k) {
  switch (k) {
    case ParseErrorKind::Syntax: return "SyntaxError";
    case ParseErrorKind::DuplicateClass: return "DuplicateClass";
    case ParseErrorKind::DuplicateMethod: return "DuplicateMethod";
    case ParseErrorKind::DuplicateField: return "DuplicateField";
  }
  return "?";
}

namespace {

std::string format_error(ParseErrorKind kind, SourceLoc loc, const std::string& message) {
  return std::string(to_string(kind)) + " at " + std::to_string(loc.line) + ":" +
         std::to_string(loc.col) + ": " + message;
}

}  // namespace

ParseError::ParseError(ParseErrorKind kind, SourceLoc loc, const std::string& message)
    : std::runtime_error(format_error(kind, loc, message)), kind_(kind), loc_(loc) {}

namespace {

enum class Tok { Ident, Keyword, Int, Str, Annotation, Punct, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  SourceLoc loc;
};

constexpr std::array kKeywords = {
    "class", "public", "private", "static", "void", "int",   "bool",  "str", "list", "var",
    "return", "if",    "else",    "while",  "new",  "this",  "true",  "false", "null",
};

bool is_keyword(std::string_view s) {
  for (auto k : kKeywords) {
    if (s == k) return true;
  }
  return false;
}

constexpr std::array kPunct2 = {"==", "!=", "<=", ">=", "&&", "||", "+=", "-="};
constexpr std::string_view kPunct1 = "{}()[];,.=+-*/%<>!";

[[noreturn]] void syntax(SourceLoc loc, const std::string& msg) {
  throw ParseError(ParseErrorKind::Syntax, loc, msg);
}

std::string describe(const Token& t) {
  switch (t.kind) {
    case Tok::End: return "end of input";
    case Tok::Str: return "string literal";
    case Tok::Int: return "integer `" + t.text + "`";
    default: return "`" + t.text + "`";
  }
}

std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  int line = 1;
  int col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n && i < src.size(); ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  auto ident_char = [](char c, bool first) {
    const bool alpha = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
    return first ? alpha : alpha || (c >= '0' && c <= '9');
  };

  while (i < src.size()) {
    const char c = src[i];
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      advance(1);
      continue;
    }
    if (c == '#') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    SourceLoc loc{line, col};
    if (c == '@') {
      std::size_t j = i + 1;
      while (j < src.size() && ident_char(src[j], j == i + 1)) ++j;
      if (j == i + 1) syntax(loc, "expected annotation name after `@`");
      out.push_back({Tok::Annotation, std::string(src.substr(i + 1, j - i - 1)), loc});
      advance(j - i);
      continue;
    }
    if (ident_char(c, true)) {
      std::size_t j = i;
      while (j < src.size() && ident_char(src[j], j == i)) ++j;
      std::string word(src.substr(i, j - i));
      out.push_back({is_keyword(word) ? Tok::Keyword : Tok::Ident, std::move(word), loc});
      advance(j - i);
      continue;
    }
    if (c >= '0' && c <= '9') {
      std::size_t j = i;
      while (j < src.size() && src[j] >= '0' && src[j] <= '9') ++j;
      if (j < src.size() && ident_char(src[j], true)) {
        syntax(SourceLoc{line, col + static_cast<int>(j - i)}, "malformed number");
      }
      out.push_back({Tok::Int, std::string(src.substr(i, j - i)), loc});
      advance(j - i);
      continue;
    }
    if (c == '"') {
      std::string value;
      std::size_t j = i + 1;
      bool closed = false;
      while (j < src.size()) {
        const char d = src[j];
        if (d == '"') {
          closed = true;
          ++j;
          break;
        }
        if (d == '\n') break;
        if (d == '\\') {
          if (j + 1 >= src.size()) break;
          const char e = src[j + 1];
          switch (e) {
            case 'n': value += '\n'; break;
            case 't': value += '\t'; break;
            case '"': value += '"'; break;
            case '\\': value += '\\'; break;
            default:
              syntax(SourceLoc{line, col + static_cast<int>(j - i)},
                     std::string("unknown escape `\\") + e + "`");
          }
          j += 2;
          continue;
        }
        value += d;
        ++j;
      }
      if (!closed) syntax(loc, "unterminated string literal");
      out.push_back({Tok::Str, std::move(value), loc});
      advance(j - i);
      continue;
    }
    bool matched = false;
    for (auto p : kPunct2) {
      if (src.substr(i, 2) == p) {
        out.push_back({Tok::Punct, p, loc});
        advance(2);
        matched = true;
        break;
      }
    }
    if (matched) continue;
    if (kPunct1.find(c) != std::string_view::npos) {
      out.push_back({Tok::Punct, std::string(1, c), loc});
      advance(1);
      continue;
    }
    syntax(loc, std::string("unexpected character `") + c + "`");
  }
  out.push_back({Tok::End, "", SourceLoc{line, col}});
  return out;
}

constexpr int kMaxNesting = 200;

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {
    for (std::size_t k = 0; k + 1 < toks_.size(); ++k) {
      if (toks_[k].kind == Tok::Keyword && toks_[k].text == "class" &&
          toks_[k + 1].kind == Tok::Ident) {
        class_names_.insert(toks_[k + 1].text);
      }
    }
  }

  Program program() {
    Program prog;
    std::set<std::string> seen;
    while (peek().kind != Tok::End) {
      ClassDecl cls = class_decl();
      if (!seen.insert(cls.name).second) {
        throw ParseError(ParseErrorKind::DuplicateClass, cls.loc,
                         "class `" + cls.name + "` is declared twice");
      }
      prog.classes.push_back(std::move(cls));
    }
    bool found = false;
    for (std::size_t c = 0; c < prog.classes.size(); ++c) {
      for (const auto& m : prog.classes[c].methods) {
        if (m.name != "main") continue;
        if (found) {
          throw ParseError(ParseErrorKind::DuplicateMethod, m.loc,
                           "more than one `main` method in program");
        }
        found = true;
        prog.main_class = c;
      }
    }
    if (!found) syntax(peek().loc, "expected a `main` method, found end of input");
    return prog;
  }

  TypeRef standalone_type() {
    TypeRef t = type(/*allow_void=*/true);
    if (peek().kind != Tok::End) fail("end of type");
    return t;
  }

 private:
  const Token& peek(std::size_t k = 0) const {
    return toks_[std::min(pos_ + k, toks_.size() - 1)];
  }
  const Token& next() {
    const Token& t = peek();
    if (pos_ < toks_.size() - 1) ++pos_;
    return t;
  }
  bool at_punct(std::string_view p, std::size_t k = 0) const {
    return peek(k).kind == Tok::Punct && peek(k).text == p;
  }
  bool at_kw(std::string_view w, std::size_t k = 0) const {
    return peek(k).kind == Tok::Keyword && peek(k).text == w;
  }
  bool accept_punct(std::string_view p) {
    if (!at_punct(p)) return false;
    next();
    return true;
  }
  bool accept_kw(std::string_view w) {
    if (!at_kw(w)) return false;
    next();
    return true;
  }
  [[noreturn]] void fail(const std::string& expected) const {
    syntax(peek().loc, "expected " + expected + ", found " + describe(peek()));
  }
  void expect_punct(std::string_view p) {
    if (!accept_punct(p)) fail("`" + std::string(p) + "`");
  }
  std::string expect_ident(const char* what) {
    if (peek().kind != Tok::Ident) fail(what);
    return next().text;
  }

  struct DepthGuard {
    explicit DepthGuard(Parser& p) : p(p) {
      if (++p.depth_ > kMaxNesting) syntax(p.peek().loc, "nesting too deep");
    }
    ~DepthGuard() { --p.depth_; }
    Parser& p;
  };

  ClassDecl class_decl() {
    ClassDecl cls;
    cls.loc = peek().loc;
    if (peek().kind == Tok::Annotation) {
      const Token& a = next();
      if (a.text == "Trusted") {
        cls.annotation = Annotation::Trusted;
      } else if (a.text == "Untrusted") {
        cls.annotation = Annotation::Untrusted;
      } else if (a.text == "Neutral") {
        cls.annotation = Annotation::Neutral;
      } else {
        syntax(a.loc, "unknown annotation `@" + a.text + "`");
      }
    }
    accept_kw("public");
    if (!accept_kw("class")) fail("`class`");
    cls.name = expect_ident("class name");
    expect_punct("{");
    std::set<std::string> field_names;
    std::set<std::string> method_names;
    while (!accept_punct("}")) {
      if (peek().kind == Tok::End) fail("`}`");
      member(cls, field_names, method_names);
    }
    return cls;
  }

  void member(ClassDecl& cls, std::set<std::string>& field_names,
              std::set<std::string>& method_names) {
    const SourceLoc loc = peek().loc;
    std::optional<Visibility> vis;
    if (accept_kw("public")) {
      vis = Visibility::Public;
    } else if (accept_kw("private")) {
      vis = Visibility::Private;
    }
    const bool is_static = accept_kw("static");

    if (peek().kind == Tok::Ident && peek().text == cls.name && at_punct("(", 1)) {
      if (is_static) syntax(loc, "constructors cannot be static");
      next();
      MethodDecl ctor;
      ctor.name = cls.name;
      ctor.is_constructor = true;
      ctor.visibility = vis.value_or(Visibility::Public);
      ctor.loc = loc;
      ctor.params = params();
      ctor.body = block();
      if (!cls.constructors.empty()) {
        throw ParseError(ParseErrorKind::DuplicateMethod, loc,
                         "class `" + cls.name + "` declares more than one constructor");
      }
      cls.constructors.push_back(std::move(ctor));
      return;
    }

    TypeRef t = type(/*allow_void=*/true);
    const Token name_tok = peek();
    std::string name = expect_ident("member name");
    if (at_punct("(")) {
      MethodDecl m;
      m.name = std::move(name);
      m.ret = t;
      m.is_static = is_static;
      m.visibility = vis.value_or(Visibility::Public);
      m.loc = loc;
      m.params = params();
      m.body = block();
      if (!method_names.insert(m.name).second) {
        throw ParseError(ParseErrorKind::DuplicateMethod, name_tok.loc,
                         "method `" + cls.name + "." + m.name + "` is declared twice");
      }
      cls.methods.push_back(std::move(m));
      return;
    }
    if (is_static) syntax(loc, "static fields are not supported");
    if (t.is_unit()) syntax(loc, "fields cannot have type void");
    FieldDecl f;
    f.name = std::move(name);
    f.type = t;
    f.visibility = vis.value_or(Visibility::Private);
    f.loc = loc;
    if (accept_punct("=")) f.init = expr();
    expect_punct(";");
    if (!field_names.insert(f.name).second) {
      throw ParseError(ParseErrorKind::DuplicateField, name_tok.loc,
                       "field `" + cls.name + "." + f.name + "` is declared twice");
    }
    cls.fields.push_back(std::move(f));
  }

  bool at_type_start() const {
    if (at_kw("int") || at_kw("bool") || at_kw("str") || at_kw("list")) return true;
    return peek().kind == Tok::Ident && peek(1).kind == Tok::Ident;
  }

  TypeRef type(bool allow_void) {
    DepthGuard g(*this);
    if (at_kw("void")) {
      if (!allow_void) fail("a type");
      next();
      return TypeRef::unit();
    }
    if (accept_kw("int")) return TypeRef::int_();
    if (accept_kw("bool")) return TypeRef::bool_();
    if (accept_kw("str")) return TypeRef::str();
    if (accept_kw("list")) {
      expect_punct("<");
      TypeRef elem = type(false);
      expect_punct(">");
      return TypeRef::list_of(std::move(elem));
    }
    if (peek().kind == Tok::Ident) return TypeRef::klass(next().text);
    fail("a type");
  }

  std::vector<Param> params() {
    expect_punct("(");
    std::vector<Param> out;
    if (accept_punct(")")) return out;
    do {
      Param p;
      p.type = type(false);
      p.name = expect_ident("parameter name");
      out.push_back(std::move(p));
    } while (accept_punct(","));
    expect_punct(")");
    return out;
  }

  std::vector<StmtPtr> block() {
    DepthGuard g(*this);
    expect_punct("{");
    std::vector<StmtPtr> out;
    while (!accept_punct("}")) {
      if (peek().kind == Tok::End) fail("`}`");
      out.push_back(stmt());
    }
    return out;
  }

  StmtPtr stmt() {
    auto s = std::make_shared<Stmt>();
    s->loc = peek().loc;
    if (accept_kw("return")) {
      s->kind = StmtKind::Return;
      if (!at_punct(";")) s->value = expr();
      expect_punct(";");
      return s;
    }
    if (accept_kw("if")) {
      s->kind = StmtKind::If;
      expect_punct("(");
      s->cond = expr();
      expect_punct(")");
      s->body = block();
      if (accept_kw("else")) {
        if (at_kw("if")) {
          s->else_body.push_back(stmt());
        } else {
          s->else_body = block();
        }
      }
      return s;
    }
    if (accept_kw("while")) {
      s->kind = StmtKind::While;
      expect_punct("(");
      s->cond = expr();
      expect_punct(")");
      s->body = block();
      return s;
    }
    if (accept_kw("var")) {
      s->kind = StmtKind::Local;
      s->name = expect_ident("variable name");
      expect_punct("=");
      s->value = expr();
      expect_punct(";");
      return s;
    }
    if (at_type_start()) {
      s->kind = StmtKind::Local;
      s->declared_type = type(false);
      s->name = expect_ident("variable name");
      if (accept_punct("=")) s->value = expr();
      expect_punct(";");
      return s;
    }
    ExprPtr lhs = expr();
    std::optional<AssignOp> op;
    if (accept_punct("=")) {
      op = AssignOp::Set;
    } else if (accept_punct("+=")) {
      op = AssignOp::Add;
    } else if (accept_punct("-=")) {
      op = AssignOp::Sub;
    }
    if (op) {
      s->op = *op;
      if (lhs->kind == ExprKind::Var) {
        s->kind = StmtKind::Assign;
        s->name = lhs->text;
      } else if (lhs->kind == ExprKind::FieldGet) {
        s->kind = StmtKind::FieldAssign;
        s->name = lhs->text;
        s->target = lhs->target;
      } else {
        syntax(lhs->loc, "left side of assignment must be a variable or field");
      }
      s->value = expr();
    } else {
      s->kind = StmtKind::ExprStmt;
      s->value = std::move(lhs);
    }
    expect_punct(";");
    return s;
  }

  static std::shared_ptr<Expr> make(ExprKind kind, SourceLoc loc) {
    auto e = std::make_shared<Expr>();
    e->kind = kind;
    e->loc = loc;
    return e;
  }

  ExprPtr expr() {
    DepthGuard g(*this);
    return binary(0);
  }

  struct BinOp {
    std::string_view sym;
    Op op;
    int prec;
  };
  static constexpr std::array kBinOps = {
      BinOp{"||", Op::Or, 1},  BinOp{"&&", Op::And, 2}, BinOp{"==", Op::Eq, 3},
      BinOp{"!=", Op::Ne, 3},  BinOp{"<", Op::Lt, 4},   BinOp{"<=", Op::Le, 4},
      BinOp{">", Op::Gt, 4},   BinOp{">=", Op::Ge, 4},  BinOp{"+", Op::Add, 5},
      BinOp{"-", Op::Sub, 5},  BinOp{"*", Op::Mul, 6},  BinOp{"/", Op::Div, 6},
      BinOp{"%", Op::Mod, 6},
  };

  const BinOp* peek_binop() const {
    if (peek().kind != Tok::Punct) return nullptr;
    for (const auto& b : kBinOps) {
      if (peek().text == b.sym) return &b;
    }
    return nullptr;
  }

  ExprPtr binary(int min_prec) {
    ExprPtr lhs = unary();
    while (const BinOp* b = peek_binop()) {
      if (b->prec <= min_prec) break;
      const SourceLoc loc = next().loc;
      ExprPtr rhs = binary(b->prec);
      auto e = make(ExprKind::Binary, loc);
      e->op = b->op;
      e->target = std::move(lhs);
      e->args.push_back(std::move(rhs));
      lhs = std::move(e);
    }
    return lhs;
  }

  static std::int64_t int_literal(const Token& t, bool negative) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    constexpr auto kMax = static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max());
    if (ec != std::errc{} || v > kMax + (negative ? 1 : 0)) {
      syntax(t.loc, "integer literal `" + t.text + "` out of range");
    }
    if (negative) return static_cast<std::int64_t>(0 - v);
    return static_cast<std::int64_t>(v);
  }

  ExprPtr unary() {
    DepthGuard g(*this);
    const SourceLoc loc = peek().loc;
    if (at_punct("-")) {
      next();
      if (peek().kind == Tok::Int) {
        auto e = make(ExprKind::IntLit, loc);
        e->int_value = int_literal(next(), true);
        return postfix(std::move(e));
      }
      auto e = make(ExprKind::Unary, loc);
      e->op = Op::Neg;
      e->target = unary();
      return e;
    }
    if (accept_punct("!")) {
      auto e = make(ExprKind::Unary, loc);
      e->op = Op::Not;
      e->target = unary();
      return e;
    }
    return postfix(primary());
  }

  std::vector<ExprPtr> call_args() {
    expect_punct("(");
    std::vector<ExprPtr> out;
    if (accept_punct(")")) return out;
    do {
      out.push_back(expr());
    } while (accept_punct(","));
    expect_punct(")");
    return out;
  }

  ExprPtr postfix(ExprPtr base) {
    while (at_punct(".")) {
      const SourceLoc loc = next().loc;
      std::string name = expect_ident("member name");
      if (at_punct("(")) {
        auto e = make(ExprKind::Call, loc);
        e->target = std::move(base);
        e->text = std::move(name);
        e->args = call_args();
        base = std::move(e);
      } else {
        auto e = make(ExprKind::FieldGet, loc);
        e->target = std::move(base);
        e->text = std::move(name);
        base = std::move(e);
      }
    }
    return base;
  }

  ExprPtr primary() {
    const Token& t = peek();
    const SourceLoc loc = t.loc;
    switch (t.kind) {
      case Tok::Int: {
        auto e = make(ExprKind::IntLit, loc);
        e->int_value = int_literal(next(), false);
        return e;
      }
      case Tok::Str: {
        auto e = make(ExprKind::StrLit, loc);
        e->text = next().text;
        return e;
      }
      case Tok::Keyword: {
        if (accept_kw("true") || accept_kw("false")) {
          auto e = make(ExprKind::BoolLit, loc);
          e->bool_value = t.text == "true";
          return e;
        }
        if (accept_kw("null")) return make(ExprKind::NullLit, loc);
        if (accept_kw("this")) return make(ExprKind::This, loc);
        if (accept_kw("new")) {
          auto e = make(ExprKind::New, loc);
          e->class_name = expect_ident("class name after `new`");
          e->args = call_args();
          return e;
        }
        fail("an expression");
      }
      case Tok::Ident: {
        std::string name = next().text;
        if (at_punct("(")) {
          auto e = make(ExprKind::Builtin, loc);
          e->text = std::move(name);
          e->args = call_args();
          return e;
        }
        if (class_names_.count(name) && at_punct(".")) {
          next();
          auto e = make(ExprKind::StaticCall, loc);
          e->class_name = std::move(name);
          e->text = expect_ident("static method name");
          e->args = call_args();
          return e;
        }
        auto e = make(ExprKind::Var, loc);
        e->text = std::move(name);
        return e;
      }
      case Tok::Punct: {
        if (accept_punct("(")) {
          ExprPtr inner = expr();
          expect_punct(")");
          return inner;
        }
        if (accept_punct("[")) {
          auto e = make(ExprKind::ListLit, loc);
          if (!accept_punct("]")) {
            do {
              e->args.push_back(expr());
            } while (accept_punct(","));
            expect_punct("]");
          }
          return e;
        }
        fail("an expression");
      }
      default:
        fail("an expression");
    }
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  int depth_ = 0;
  std::set<std::string> class_names_;
};

}  // namespace

Program parse_program(std::string_view source) {
  Parser p(lex(source));
  return p.program();
}

TypeRef parse_type(std::string_view text) {
  Parser p(lex(text));
  return p.standalone_type();
}

}  // namespace encpart::dsl

#include "encpart/partitioner/image_io.hpp"

#include <fstream>
#include <sstream>

#include "encpart/dsl/parser.hpp"

namespace encpart::partitioner {

using wire::List;
using wire::Value;

namespace {

Value opt(const dsl::ExprPtr& e);

Value list(std::vector<Value> items) { return Value(List{std::move(items)}); }

Value loc(dsl::SourceLoc l) { return list({Value(l.line), Value(l.col)}); }

Value type(const dsl::TypeRef& t) { return Value(dsl::to_string(t)); }

Value expr(const dsl::Expr& e) {
  std::vector<Value> args;
  for (const auto& a : e.args) args.push_back(expr(*a));
  return list({Value(static_cast<int>(e.kind)), loc(e.loc), Value(static_cast<int>(e.op)), Value(e.int_value),
               Value(e.bool_value), Value(e.text), Value(e.class_name), opt(e.target), list(std::move(args))});
}

Value opt(const dsl::ExprPtr& e) { return e ? expr(*e) : Value{}; }

Value stmts(const std::vector<dsl::StmtPtr>& body);

Value stmt(const dsl::Stmt& s) {
  return list({Value(static_cast<int>(s.kind)), loc(s.loc), Value(s.name),
               s.declared_type ? type(*s.declared_type) : Value{}, Value(static_cast<int>(s.op)), opt(s.target),
               opt(s.value), opt(s.cond), stmts(s.body), stmts(s.else_body)});
}

Value stmts(const std::vector<dsl::StmtPtr>& body) {
  std::vector<Value> out;
  for (const auto& s : body) out.push_back(stmt(*s));
  return list(std::move(out));
}

Value params(const std::vector<dsl::Param>& ps) {
  std::vector<Value> out;
  for (const auto& p : ps) out.push_back(list({Value(p.name), type(p.type)}));
  return list(std::move(out));
}

Value method(const dsl::MethodDecl& m) {
  return list({Value(m.name), params(m.params), type(m.ret), stmts(m.body), Value(m.is_constructor),
               Value(m.is_static), Value(static_cast<int>(m.visibility)), loc(m.loc)});
}

Value methods(const std::vector<dsl::MethodDecl>& ms) {
  std::vector<Value> out;
  for (const auto& m : ms) out.push_back(method(m));
  return list(std::move(out));
}

Value klass(const dsl::ClassDecl& c) {
  std::vector<Value> fields;
  for (const auto& f : c.fields) {
    fields.push_back(list({Value(f.name), type(f.type), Value(static_cast<int>(f.visibility)), opt(f.init),
                           loc(f.loc)}));
  }
  return list({Value(c.name), Value(static_cast<int>(c.annotation)), list(std::move(fields)),
               methods(c.constructors), methods(c.methods), loc(c.loc)});
}

Value kinds(const std::vector<MarshalKind>& ks) {
  std::vector<Value> out;
  for (auto k : ks) out.push_back(Value(static_cast<int>(k)));
  return list(std::move(out));
}

Value relay(const RelayMethodDef& r) {
  return list({Value(r.owner), Value(r.method), Value(static_cast<int>(r.kind)), kinds(r.params),
               Value(static_cast<int>(r.ret))});
}

Value sig(const dsl::MethodSig& m) {
  return list({Value(m.name), params(m.params), type(m.ret), Value(m.is_constructor), Value(m.is_static),
               Value(static_cast<int>(m.visibility))});
}

Value strings(const std::vector<std::string>& xs) {
  std::vector<Value> out;
  for (const auto& x : xs) out.push_back(Value(x));
  return list(std::move(out));
}

Value image(const ImageSpec& img) {
  std::vector<Value> annotations;
  for (auto a : img.class_annotations) annotations.push_back(Value(static_cast<int>(a)));
  std::vector<Value> classes;
  for (const auto& c : img.classes) {
    std::vector<Value> relays;
    for (const auto& r : c.relays) relays.push_back(relay(r));
    classes.push_back(list({klass(c.decl), list(std::move(relays))}));
  }
  std::vector<Value> proxies;
  for (const auto& p : img.proxies) {
    std::vector<Value> stubs;
    for (const auto& s : p.stubs) stubs.push_back(sig(s));
    proxies.push_back(list({Value(p.class_name), Value(static_cast<int>(p.direction)), list(std::move(stubs))}));
  }
  std::vector<Value> entries;
  for (const auto& e : img.entry_points) entries.push_back(list({Value(e.class_name), Value(e.method)}));
  return list({Value(static_cast<int>(img.side)), strings(img.class_table), list(std::move(annotations)),
               list(std::move(classes)), list(std::move(proxies)), list(std::move(entries)),
               strings(img.pruned_proxies)});
}

// ---- decoding ----

const std::vector<Value>& fields_of(const Value& v, std::size_t n) {
  const auto& l = wire::as_list(v);
  if (l.size() != n) throw FormatError("image record has " + std::to_string(l.size()) + " fields, expected " +
                                       std::to_string(n));
  return l;
}

template <typename E>
E enum_of(const Value& v, int max) {
  auto i = wire::as_int(v);
  if (i < 0 || i > max) throw FormatError("enum value " + std::to_string(i) + " out of range");
  return static_cast<E>(i);
}

int small_int(const Value& v) {
  auto i = wire::as_int(v);
  if (i < 0 || i > (1 << 30)) throw FormatError("position out of range");
  return static_cast<int>(i);
}

dsl::SourceLoc read_loc(const Value& v) {
  const auto& f = fields_of(v, 2);
  return {small_int(f[0]), small_int(f[1])};
}

dsl::TypeRef read_type(const Value& v) {
  return dsl::parse_type(wire::as_str(v));
}

dsl::ExprPtr read_opt_expr(const Value& v, int depth);

dsl::ExprPtr read_expr(const Value& v, int depth) {
  if (depth > 400) throw FormatError("expression nesting too deep");
  const auto& f = fields_of(v, 9);
  auto e = std::make_shared<dsl::Expr>();
  e->kind = enum_of<dsl::ExprKind>(f[0], static_cast<int>(dsl::ExprKind::Builtin));
  e->loc = read_loc(f[1]);
  e->op = enum_of<dsl::Op>(f[2], static_cast<int>(dsl::Op::Neg));
  e->int_value = wire::as_int(f[3]);
  e->bool_value = wire::as_bool(f[4]);
  e->text = wire::as_str(f[5]);
  e->class_name = wire::as_str(f[6]);
  e->target = read_opt_expr(f[7], depth + 1);
  for (const auto& a : wire::as_list(f[8])) e->args.push_back(read_expr(a, depth + 1));
  return e;
}

dsl::ExprPtr read_opt_expr(const Value& v, int depth) {
  return v.is_unit() ? nullptr : read_expr(v, depth);
}

std::vector<dsl::StmtPtr> read_stmts(const Value& v, int depth);

dsl::StmtPtr read_stmt(const Value& v, int depth) {
  if (depth > 400) throw FormatError("statement nesting too deep");
  const auto& f = fields_of(v, 10);
  auto s = std::make_shared<dsl::Stmt>();
  s->kind = enum_of<dsl::StmtKind>(f[0], static_cast<int>(dsl::StmtKind::While));
  s->loc = read_loc(f[1]);
  s->name = wire::as_str(f[2]);
  if (!f[3].is_unit()) s->declared_type = read_type(f[3]);
  s->op = enum_of<dsl::AssignOp>(f[4], static_cast<int>(dsl::AssignOp::Sub));
  s->target = read_opt_expr(f[5], 0);
  s->value = read_opt_expr(f[6], 0);
  s->cond = read_opt_expr(f[7], 0);
  s->body = read_stmts(f[8], depth + 1);
  s->else_body = read_stmts(f[9], depth + 1);
  return s;
}

std::vector<dsl::StmtPtr> read_stmts(const Value& v, int depth) {
  std::vector<dsl::StmtPtr> out;
  for (const auto& s : wire::as_list(v)) out.push_back(read_stmt(s, depth));
  return out;
}

std::vector<dsl::Param> read_params(const Value& v) {
  std::vector<dsl::Param> out;
  for (const auto& p : wire::as_list(v)) {
    const auto& f = fields_of(p, 2);
    out.push_back({wire::as_str(f[0]), read_type(f[1])});
  }
  return out;
}

dsl::MethodDecl read_method(const Value& v) {
  const auto& f = fields_of(v, 8);
  dsl::MethodDecl m;
  m.name = wire::as_str(f[0]);
  m.params = read_params(f[1]);
  m.ret = read_type(f[2]);
  m.body = read_stmts(f[3], 0);
  m.is_constructor = wire::as_bool(f[4]);
  m.is_static = wire::as_bool(f[5]);
  m.visibility = enum_of<dsl::Visibility>(f[6], 1);
  m.loc = read_loc(f[7]);
  return m;
}

std::vector<dsl::MethodDecl> read_methods(const Value& v) {
  std::vector<dsl::MethodDecl> out;
  for (const auto& m : wire::as_list(v)) out.push_back(read_method(m));
  return out;
}

dsl::ClassDecl read_class(const Value& v) {
  const auto& f = fields_of(v, 6);
  dsl::ClassDecl c;
  c.name = wire::as_str(f[0]);
  c.annotation = enum_of<dsl::Annotation>(f[1], 2);
  for (const auto& fv : wire::as_list(f[2])) {
    const auto& ff = fields_of(fv, 5);
    dsl::FieldDecl fd;
    fd.name = wire::as_str(ff[0]);
    fd.type = read_type(ff[1]);
    fd.visibility = enum_of<dsl::Visibility>(ff[2], 1);
    fd.init = read_opt_expr(ff[3], 0);
    fd.loc = read_loc(ff[4]);
    c.fields.push_back(std::move(fd));
  }
  c.constructors = read_methods(f[3]);
  c.methods = read_methods(f[4]);
  c.loc = read_loc(f[5]);
  return c;
}

std::vector<MarshalKind> read_kinds(const Value& v) {
  std::vector<MarshalKind> out;
  for (const auto& k : wire::as_list(v)) out.push_back(enum_of<MarshalKind>(k, 3));
  return out;
}

dsl::MethodSig read_sig(const Value& v) {
  const auto& f = fields_of(v, 6);
  dsl::MethodSig m;
  m.name = wire::as_str(f[0]);
  m.params = read_params(f[1]);
  m.ret = read_type(f[2]);
  m.is_constructor = wire::as_bool(f[3]);
  m.is_static = wire::as_bool(f[4]);
  m.visibility = enum_of<dsl::Visibility>(f[5], 1);
  return m;
}

std::vector<std::string> read_strings(const Value& v) {
  std::vector<std::string> out;
  for (const auto& s : wire::as_list(v)) out.push_back(wire::as_str(s));
  return out;
}

ImageSpec read_image(const Value& v) {
  const auto& f = fields_of(v, 7);
  ImageSpec img;
  img.side = enum_of<Side>(f[0], 1);
  img.class_table = read_strings(f[1]);
  for (const auto& a : wire::as_list(f[2])) img.class_annotations.push_back(enum_of<dsl::Annotation>(a, 2));
  if (img.class_annotations.size() != img.class_table.size()) throw FormatError("class table is inconsistent");
  for (const auto& cv : wire::as_list(f[3])) {
    const auto& cf = fields_of(cv, 2);
    ConcreteClass c{read_class(cf[0]), {}};
    for (const auto& rv : wire::as_list(cf[1])) {
      const auto& rf = fields_of(rv, 5);
      RelayMethodDef r;
      r.owner = wire::as_str(rf[0]);
      r.method = wire::as_str(rf[1]);
      r.kind = enum_of<RelayKind>(rf[2], 1);
      r.params = read_kinds(rf[3]);
      r.ret = enum_of<MarshalKind>(rf[4], 3);
      c.relays.push_back(std::move(r));
    }
    img.classes.push_back(std::move(c));
  }
  for (const auto& pv : wire::as_list(f[4])) {
    const auto& pf = fields_of(pv, 3);
    ProxyClassDef p;
    p.class_name = wire::as_str(pf[0]);
    p.direction = enum_of<Direction>(pf[1], 1);
    for (const auto& s : wire::as_list(pf[2])) p.stubs.push_back(read_sig(s));
    img.proxies.push_back(std::move(p));
  }
  for (const auto& ev : wire::as_list(f[5])) {
    const auto& ef = fields_of(ev, 2);
    img.entry_points.push_back({wire::as_str(ef[0]), wire::as_str(ef[1])});
  }
  img.pruned_proxies = read_strings(f[6]);
  for (const auto& c : img.classes) {
    if (!img.class_id(c.decl.name)) throw FormatError("class `" + c.decl.name + "` missing from class table");
  }
  for (const auto& p : img.proxies) {
    if (!img.class_id(p.class_name)) throw FormatError("proxy `" + p.class_name + "` missing from class table");
  }
  return img;
}

}  // namespace

wire::Bytes encode_image(const ImageSpec& img) {
  wire::Bytes payload = wire::encode(image(img));
  wire::Bytes out(kImageMagic.begin(), kImageMagic.end());
  wire::put_u64(out, payload.size());
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

ImageSpec decode_image(std::span<const std::uint8_t> bytes) {
  const std::size_t head = kImageMagic.size() + 8;
  if (bytes.size() < kImageMagic.size() ||
      !std::equal(kImageMagic.begin(), kImageMagic.end(), bytes.begin())) {
    throw FormatError("bad image magic");
  }
  if (bytes.size() < head) throw FormatError("truncated image header");
  const std::uint64_t len = wire::get_u64(bytes, kImageMagic.size());
  if (len != bytes.size() - head) throw FormatError("image length field does not match file size");
  try {
    return read_image(wire::decode(bytes.subspan(head)));
  } catch (const wire::WireError& e) {
    throw FormatError(std::string("corrupt image: ") + e.what());
  } catch (const dsl::ParseError& e) {
    throw FormatError(std::string("corrupt image type: ") + e.what());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

void emit(const PartitionPlan& plan, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  auto bytes_of = [](const wire::Bytes& b) { return std::string(b.begin(), b.end()); };
  write_file(dir / kTrustedImageFile, bytes_of(encode_image(plan.trusted)));
  write_file(dir / kUntrustedImageFile, bytes_of(encode_image(plan.untrusted)));
  write_file(dir / kInterfaceFile, plan.interface.to_text());
}

PartitionPlan load_plan(const std::filesystem::path& dir) {
  auto image_at = [&](const char* name, Side side) {
    std::string raw;
    try {
      raw = read_file(dir / name);
    } catch (const IoError& e) {
      throw FormatError(e.what());
    }
    ImageSpec img = decode_image(std::span(reinterpret_cast<const std::uint8_t*>(raw.data()), raw.size()));
    if (img.side != side) throw FormatError(std::string(name) + " holds the wrong side");
    return img;
  };
  PartitionPlan plan;
  plan.trusted = image_at(kTrustedImageFile, Side::Trusted);
  plan.untrusted = image_at(kUntrustedImageFile, Side::Untrusted);
  if (plan.trusted.class_table != plan.untrusted.class_table ||
      plan.trusted.class_annotations != plan.untrusted.class_annotations) {
    throw FormatError("trusted and untrusted images disagree on the class table");
  }
  std::string text;
  try {
    text = read_file(dir / kInterfaceFile);
  } catch (const IoError& e) {
    throw FormatError(e.what());
  }
  plan.interface = InterfaceDescriptor::from_text(text);
  for (std::size_t i = 0; i < plan.trusted.class_table.size(); ++i) {
    const std::string& name = plan.trusted.class_table[i];
    switch (plan.trusted.class_annotations[i]) {
      case dsl::Annotation::Trusted: plan.sets.trusted.push_back(name); break;
      case dsl::Annotation::Untrusted: plan.sets.untrusted.push_back(name); break;
      case dsl::Annotation::Neutral: plan.sets.neutral.push_back(name); break;
    }
  }
  return plan;
}

}  // namespace encpart::partitioner

#include <cmath>
#include <limits>

#include "engine.hpp"

namespace encpart::runtime {

using dsl::Expr;
using dsl::ExprKind;
using dsl::Op;
using dsl::Stmt;
using dsl::StmtKind;

std::string RuntimeError::describe() const {
  std::string out = message_;
  for (const auto& t : trace_) out += "\n  " + t;
  return out;
}

std::string display(const Value& v) {
  if (v.is_int()) return std::to_string(v.as_int());
  if (v.is_bool()) return v.as_bool() ? "true" : "false";
  if (v.is_str()) return v.as_str();
  if (v.is_null()) return "null";
  if (v.is_ref()) return "<object #" + std::to_string(v.as_ref().id) + ">";
  return "()";
}

FrameGuard::FrameGuard(DualRuntime::Impl& rt, Isolate& x, Frame f) : rt_(rt), x_(x) {
  if (x.frames.size() >= kMaxFrames) rt.fail("call depth limit exceeded");
  x.frames.push_back(std::move(f));
  rt.stack.push_back({x.side, &x.frames.back(), {}});
}

FrameGuard::~FrameGuard() {
  rt_.stack.pop_back();
  x_.frames.pop_back();
}

std::vector<std::string> DualRuntime::Impl::snapshot_trace() const {
  std::vector<std::string> out;
  for (auto it = stack.rbegin(); it != stack.rend(); ++it) {
    if (!it->frame) {
      out.push_back("-- " + it->marker + " --");
      continue;
    }
    const Frame& f = *it->frame;
    out.push_back("at " + f.class_name + "." + f.method + " (line " + std::to_string(f.loc.line) + ") [" +
                  std::string(partitioner::to_string(it->side)) + "]");
  }
  return out;
}

void DualRuntime::Impl::charge_work(Isolate& x, std::uint64_t CostBreakdown::*bucket, double base) {
  const double scaled = x.side == Side::Trusted ? base * model.epc_penalty : base;
  charge_flat(x, bucket, static_cast<std::uint64_t>(std::llround(scaled)));
}

void DualRuntime::Impl::charge_flat(Isolate& x, std::uint64_t CostBreakdown::*bucket, std::uint64_t cycles) {
  x.costs.*bucket += cycles;
  x.metrics.simulated_cycles += cycles;
}

Value DualRuntime::Impl::default_value(const dsl::TypeRef& t) const {
  if (t.is_list() || t.is_class()) return Value(Null{});
  switch (t.base) {
    case dsl::TypeRef::Base::Int: return Value(std::int64_t{0});
    case dsl::TypeRef::Base::Bool: return Value(false);
    case dsl::TypeRef::Base::Str: return Value(std::string());
    default: return Value(Null{});
  }
}

Value* DualRuntime::Impl::lookup_local(Isolate& x, std::string_view name) {
  auto& scopes = x.frames.back().scopes;
  for (auto it = scopes.rbegin(); it != scopes.rend(); ++it) {
    auto f = it->find(name);
    if (f != it->end()) return &f->second;
  }
  return nullptr;
}

ObjId DualRuntime::Impl::new_list(Isolate& x, std::vector<Value> items, bool charged) {
  HeapObject o;
  o.kind = ObjKind::List;
  o.slots = std::move(items);
  if (charged) {
    charge_work(x, &CostBreakdown::alloc, static_cast<double>(model.alloc_cost));
    ++x.metrics.allocations;
  }
  return x.heap.allocate(std::move(o));
}

void DualRuntime::Impl::safepoint(Isolate& x, dsl::SourceLoc loc) {
  x.frames.back().loc = loc;
  ++steps;
  if (options.step_limit != 0 && steps > options.step_limit) fail("step limit exceeded");
  if (options.gc_threshold_bytes != 0 && x.heap.pressure() >= options.gc_threshold_bytes) collect(x);
  if (options.gc_mode == GcMode::Live && depth == 0) live_yield();
}

namespace {

std::int64_t wrap_add(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) + static_cast<std::uint64_t>(b));
}
std::int64_t wrap_sub(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) - static_cast<std::uint64_t>(b));
}
std::int64_t wrap_mul(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) * static_cast<std::uint64_t>(b));
}

}  // namespace

Control DualRuntime::Impl::exec_block(Isolate& x, const std::vector<dsl::StmtPtr>& body) {
  auto& scopes = x.frames.back().scopes;
  scopes.emplace_back();
  struct Pop {
    Isolate& x;
    ~Pop() { x.frames.back().scopes.pop_back(); }
  } pop{x};
  for (const auto& s : body) {
    if (exec(x, *s) == Control::Return) return Control::Return;
  }
  return Control::Normal;
}

Control DualRuntime::Impl::exec(Isolate& x, const Stmt& s) {
  safepoint(x, s.loc);
  switch (s.kind) {
    case StmtKind::Local: {
      Value v = s.value ? eval(x, *s.value) : default_value(*s.declared_type);
      x.frames.back().scopes.back()[s.name] = std::move(v);
      return Control::Normal;
    }
    case StmtKind::Assign: {
      Value v = eval(x, *s.value);
      Value* slot = lookup_local(x, s.name);
      if (!slot) fail("unknown variable `" + s.name + "`");
      if (s.op == dsl::AssignOp::Set) {
        *slot = std::move(v);
      } else if (slot->is_str()) {
        if (slot->as_str().size() + v.as_str().size() > kMaxString) fail("string too large");
        *slot = Value(slot->as_str() + v.as_str());
      } else {
        *slot = Value(s.op == dsl::AssignOp::Add ? wrap_add(slot->as_int(), v.as_int())
                                                 : wrap_sub(slot->as_int(), v.as_int()));
      }
      return Control::Normal;
    }
    case StmtKind::FieldAssign: {
      Value v = eval(x, *s.value);
      const Frame& f = x.frames.back();
      HeapObject& obj = x.heap.at(f.self.as_ref().id);
      const ConcreteClass* cls = x.concrete(obj.class_name);
      const int idx = cls ? cls->decl.field_index(s.name) : -1;
      if (idx < 0) fail("no field `" + s.name + "`");
      Value& slot = obj.slots[static_cast<std::size_t>(idx)];
      if (s.op != dsl::AssignOp::Set) {
        charge_field(x);
        if (slot.is_str()) {
          if (slot.as_str().size() + v.as_str().size() > kMaxString) fail("string too large");
          v = Value(slot.as_str() + v.as_str());
        } else {
          v = Value(s.op == dsl::AssignOp::Add ? wrap_add(slot.as_int(), v.as_int())
                                               : wrap_sub(slot.as_int(), v.as_int()));
        }
      }
      charge_field(x);
      std::uint64_t grow = v.is_str() ? v.as_str().size() : 0;
      slot = std::move(v);
      x.heap.add_pressure(grow);
      return Control::Normal;
    }
    case StmtKind::ExprStmt:
      eval(x, *s.value);
      return Control::Normal;
    case StmtKind::Return:
      x.frames.back().ret = s.value ? eval(x, *s.value) : Value{};
      return Control::Return;
    case StmtKind::If: {
      if (eval(x, *s.cond).as_bool()) return exec_block(x, s.body);
      return exec_block(x, s.else_body);
    }
    case StmtKind::While:
      while (eval(x, *s.cond).as_bool()) {
        if (exec_block(x, s.body) == Control::Return) return Control::Return;
        safepoint(x, s.loc);
      }
      return Control::Normal;
  }
  return Control::Normal;
}

Value DualRuntime::Impl::eval(Isolate& x, const Expr& e) {
  switch (e.kind) {
    case ExprKind::IntLit: return Value(e.int_value);
    case ExprKind::BoolLit: return Value(e.bool_value);
    case ExprKind::StrLit: return Value(e.text);
    case ExprKind::NullLit: return Value(Null{});
    case ExprKind::ListLit: {
      TempGuard hold(x);
      std::vector<Value> items;
      for (const auto& a : e.args) {
        items.push_back(eval(x, *a));
        hold.hold(items.back());
      }
      return Value(Ref{new_list(x, std::move(items), true)});
    }
    case ExprKind::Var: {
      Value* v = lookup_local(x, e.text);
      if (!v) fail("unknown variable `" + e.text + "`");
      return *v;
    }
    case ExprKind::This: return x.frames.back().self;
    case ExprKind::FieldGet: {
      const Frame& f = x.frames.back();
      const HeapObject& obj = x.heap.at(f.self.as_ref().id);
      const ConcreteClass* cls = x.concrete(obj.class_name);
      const int idx = cls ? cls->decl.field_index(e.text) : -1;
      if (idx < 0) fail("no field `" + e.text + "`");
      charge_field(x);
      return obj.slots[static_cast<std::size_t>(idx)];
    }
    case ExprKind::Unary: {
      Value v = eval(x, *e.target);
      if (e.op == Op::Neg) return Value(wrap_sub(0, v.as_int()));
      return Value(!v.as_bool());
    }
    case ExprKind::Binary: {
      if (e.op == Op::And) return Value(eval(x, *e.target).as_bool() && eval(x, *e.args[0]).as_bool());
      if (e.op == Op::Or) return Value(eval(x, *e.target).as_bool() || eval(x, *e.args[0]).as_bool());
      TempGuard hold(x);
      Value l = eval(x, *e.target);
      hold.hold(l);
      Value r = eval(x, *e.args[0]);
      switch (e.op) {
        case Op::Add:
          if (l.is_str()) {
            if (l.as_str().size() + r.as_str().size() > kMaxString) fail("string too large");
            return Value(l.as_str() + r.as_str());
          }
          return Value(wrap_add(l.as_int(), r.as_int()));
        case Op::Sub: return Value(wrap_sub(l.as_int(), r.as_int()));
        case Op::Mul: return Value(wrap_mul(l.as_int(), r.as_int()));
        case Op::Div:
        case Op::Mod: {
          const std::int64_t a = l.as_int();
          const std::int64_t b = r.as_int();
          if (b == 0) fail(e.op == Op::Div ? "division by zero" : "modulo by zero");
          if (b == -1) return Value(e.op == Op::Div ? wrap_sub(0, a) : std::int64_t{0});
          return Value(e.op == Op::Div ? a / b : a % b);
        }
        case Op::Eq: return Value(l == r);
        case Op::Ne: return Value(!(l == r));
        case Op::Lt: return Value(l.as_int() < r.as_int());
        case Op::Le: return Value(l.as_int() <= r.as_int());
        case Op::Gt: return Value(l.as_int() > r.as_int());
        case Op::Ge: return Value(l.as_int() >= r.as_int());
        default: fail("bad operator");
      }
    }
    case ExprKind::New: {
      TempGuard hold(x);
      std::vector<Value> args;
      for (const auto& a : e.args) {
        args.push_back(eval(x, *a));
        hold.hold(args.back());
      }
      x.frames.back().loc = e.loc;
      return instantiate(x, e.class_name, std::move(args));
    }
    case ExprKind::Call: {
      TempGuard hold(x);
      Value recv = eval(x, *e.target);
      hold.hold(recv);
      std::vector<Value> args;
      for (const auto& a : e.args) {
        args.push_back(eval(x, *a));
        hold.hold(args.back());
      }
      x.frames.back().loc = e.loc;
      return invoke(x, recv, e.text, std::move(args));
    }
    case ExprKind::StaticCall: {
      TempGuard hold(x);
      std::vector<Value> args;
      for (const auto& a : e.args) {
        args.push_back(eval(x, *a));
        hold.hold(args.back());
      }
      x.frames.back().loc = e.loc;
      return invoke_static(x, e.class_name, e.text, std::move(args));
    }
    case ExprKind::Builtin: {
      TempGuard hold(x);
      std::vector<Value> args;
      for (const auto& a : e.args) {
        args.push_back(eval(x, *a));
        hold.hold(args.back());
      }
      x.frames.back().loc = e.loc;
      return builtin(x, e, std::move(args));
    }
  }
  fail("bad expression");
}

ObjId DualRuntime::Impl::allocate_instance(Isolate& x, const ConcreteClass& cls) {
  HeapObject o;
  o.kind = ObjKind::Instance;
  o.class_name = cls.decl.name;
  for (const auto& f : cls.decl.fields) o.slots.push_back(default_value(f.type));
  charge_work(x, &CostBreakdown::alloc, static_cast<double>(model.alloc_cost));
  ++x.metrics.allocations;
  return x.heap.allocate(std::move(o));
}

void DualRuntime::Impl::run_constructor(Isolate& x, const ConcreteClass& cls, ObjId self, std::vector<Value> args) {
  const dsl::MethodDecl* ctor = cls.decl.constructor();
  const std::size_t arity = ctor ? ctor->params.size() : 0;
  if (args.size() != arity) fail("constructor of `" + cls.decl.name + "` takes " + std::to_string(arity) + " arguments");
  Frame f;
  f.class_name = cls.decl.name;
  f.method = std::string(dsl::kCtorName);
  f.self = Value(Ref{self});
  f.loc = ctor ? ctor->loc : cls.decl.loc;
  f.scopes.emplace_back();
  FrameGuard guard(*this, x, std::move(f));
  for (std::size_t i = 0; i < cls.decl.fields.size(); ++i) {
    const auto& field = cls.decl.fields[i];
    if (!field.init) continue;
    x.frames.back().loc = field.loc;
    Value v = eval(x, *field.init);
    charge_field(x);
    x.heap.at(self).slots[i] = std::move(v);
  }
  if (!ctor) return;
  for (std::size_t i = 0; i < arity; ++i) x.frames.back().scopes.back()[ctor->params[i].name] = std::move(args[i]);
  exec_block(x, ctor->body);
}

Value DualRuntime::Impl::instantiate(Isolate& x, const std::string& class_name, std::vector<Value> args) {
  if (const ConcreteClass* cls = x.concrete(class_name)) {
    TempGuard hold(x);
    ObjId id = allocate_instance(x, *cls);
    hold.hold(Value(Ref{id}));
    run_constructor(x, *cls, id, std::move(args));
    return Value(Ref{id});
  }
  if (const ProxyClassDef* proxy = x.proxy(class_name)) return proxy_construct(x, *proxy, std::move(args));
  fail("class `" + class_name + "` is not part of the " + std::string(partitioner::to_string(x.side)) + " image");
}

Value DualRuntime::Impl::run_method(Isolate& x, const ConcreteClass& cls, const dsl::MethodDecl& m, Value self,
                                    std::vector<Value> args) {
  if (args.size() != m.params.size()) fail("`" + cls.decl.name + "." + m.name + "` arity mismatch");
  Frame f;
  f.class_name = cls.decl.name;
  f.method = m.name;
  f.self = std::move(self);
  f.loc = m.loc;
  f.scopes.emplace_back();
  for (std::size_t i = 0; i < args.size(); ++i) f.scopes.back()[m.params[i].name] = std::move(args[i]);
  FrameGuard guard(*this, x, std::move(f));
  if (exec_block(x, m.body) == Control::Return) return std::move(guard.frame().ret);
  if (!m.ret.is_unit()) fail("`" + cls.decl.name + "." + m.name + "` ended without returning a value");
  return Value{};
}

Value DualRuntime::Impl::invoke(Isolate& x, const Value& receiver, const std::string& method, std::vector<Value> args) {
  if (receiver.is_null()) fail("null dereference calling `" + method + "`");
  if (!receiver.is_ref()) fail("cannot call `" + method + "` on " + display(receiver));
  const ObjId id = receiver.as_ref().id;
  const HeapObject& obj = x.heap.at(id);
  switch (obj.kind) {
    case ObjKind::List: return list_method(x, id, method, std::move(args));
    case ObjKind::Proxy: return proxy_invoke(x, id, method, std::move(args));
    case ObjKind::Instance: break;
  }
  const ConcreteClass* cls = x.concrete(obj.class_name);
  const dsl::MethodDecl* m = cls ? cls->decl.find_method(method) : nullptr;
  if (!m || m->is_static) fail("`" + obj.class_name + "." + method + "` is not available in this image");
  return run_method(x, *cls, *m, receiver, std::move(args));
}

Value DualRuntime::Impl::invoke_static(Isolate& x, const std::string& class_name, const std::string& method,
                                       std::vector<Value> args) {
  const ConcreteClass* cls = x.concrete(class_name);
  const dsl::MethodDecl* m = cls ? cls->decl.find_method(method) : nullptr;
  if (!m || !m->is_static) fail("`" + class_name + "." + method + "` is not available in this image");
  return run_method(x, *cls, *m, Value{}, std::move(args));
}

Value DualRuntime::Impl::list_method(Isolate& x, ObjId list, const std::string& method, std::vector<Value> args) {
  auto index = [&](const Value& v) {
    const auto& items = x.heap.at(list).slots;
    const std::int64_t i = v.as_int();
    if (i < 0 || static_cast<std::uint64_t>(i) >= items.size()) {
      fail("list index " + std::to_string(i) + " out of range (length " + std::to_string(items.size()) + ")");
    }
    return static_cast<std::size_t>(i);
  };
  if (method == "len") return Value(static_cast<std::int64_t>(x.heap.at(list).slots.size()));
  if (method == "get") {
    const std::size_t i = index(args.at(0));
    charge_field(x);
    return x.heap.at(list).slots[i];
  }
  if (method == "set") {
    const std::size_t i = index(args.at(0));
    charge_field(x);
    if (args[1].is_str()) x.heap.add_pressure(args[1].as_str().size());
    x.heap.at(list).slots[i] = std::move(args[1]);
    return Value{};
  }
  if (method == "append") {
    charge_field(x);
    x.heap.add_pressure(8 + (args.at(0).is_str() ? args[0].as_str().size() : 0));
    x.heap.at(list).slots.push_back(std::move(args[0]));
    return Value{};
  }
  fail("lists have no method `" + method + "`");
}

void DualRuntime::Impl::print_line(Isolate& x, const Value& v) {
  (void)x;
  transcript += display(v);
  transcript += '\n';
}

void DualRuntime::Impl::file_write(Isolate& x, const std::string& path, const std::string& data) {
  if (path.empty()) fail("file_write: empty path");
  charge_flat(x, &CostBreakdown::io, model.io_write_cost);
  vfs[path] = data;
}

std::string DualRuntime::Impl::file_read(Isolate& x, const std::string& path) {
  (void)x;
  auto it = vfs.find(path);
  if (it == vfs.end()) fail("file_read: no such file `" + path + "`");
  return it->second;
}

Value DualRuntime::Impl::builtin(Isolate& x, const Expr& e, std::vector<Value> args) {
  const std::string& n = e.text;
  if (n == "print" || n == "file_write" || n == "file_read") {
    if (x.side == Side::Trusted) return shim(x, n, std::move(args));
    if (n == "print") {
      print_line(x, args.at(0));
      return Value{};
    }
    if (n == "file_write") {
      file_write(x, args.at(0).as_str(), args.at(1).as_str());
      return Value{};
    }
    return Value(file_read(x, args.at(0).as_str()));
  }
  if (n == "compute") {
    const std::int64_t units = args.at(0).as_int();
    if (units < 0) fail("compute: negative work");
    charge_work(x, &CostBreakdown::compute,
                static_cast<double>(units) * static_cast<double>(model.compute_unit_cost));
    return Value{};
  }
  if (n == "gc") {
    collect(x);
    return Value{};
  }
  if (n == "to_str") return Value(display(args.at(0)));
  if (n == "repeat") {
    const std::string& s = args.at(0).as_str();
    const std::int64_t count = args.at(1).as_int();
    if (count < 0) fail("repeat: negative count");
    if (!s.empty() && static_cast<std::uint64_t>(count) > kMaxString / s.size()) fail("string too large");
    std::string out;
    out.reserve(s.size() * static_cast<std::size_t>(count));
    for (std::int64_t i = 0; i < count; ++i) out += s;
    return Value(std::move(out));
  }
  fail("unknown builtin `" + n + "`");
}

}  // namespace encpart::runtime

#include <algorithm>
#include <sstream>

#include "engine.hpp"

namespace encpart::runtime {

namespace {

std::string_view kind_name(MessageKind k) {
  switch (k) {
    case MessageKind::ConstructorRelay: return "ConstructorRelay";
    case MessageKind::InstanceRelay: return "InstanceRelay";
    case MessageKind::ShimCall: return "ShimCall";
    case MessageKind::RemoveMirror: return "RemoveMirror";
  }
  return "?";
}

// Error types survive the crossing as a tag in the error response.
enum class ErrorTag : std::int64_t { Generic, Stale, Overflow, Mismatch, Unknown };

ErrorTag tag_of(const RuntimeError& e) {
  if (dynamic_cast<const StaleMirror*>(&e)) return ErrorTag::Stale;
  if (dynamic_cast<const TransitionOverflow*>(&e)) return ErrorTag::Overflow;
  if (dynamic_cast<const KindMismatch*>(&e)) return ErrorTag::Mismatch;
  if (dynamic_cast<const UnknownTarget*>(&e)) return ErrorTag::Unknown;
  return ErrorTag::Generic;
}

wire::Value error_response(const RuntimeError& e) {
  wire::List trace;
  for (const auto& t : e.trace()) trace.items.emplace_back(t);
  return wire::List{{wire::Value("error"), wire::Value(static_cast<std::int64_t>(tag_of(e))),
                     wire::Value(e.message()), wire::Value(std::move(trace))}};
}

[[noreturn]] void raise(const wire::Value& response) {
  const auto& items = wire::as_list(response);
  const auto tag = static_cast<ErrorTag>(wire::as_int(items.at(1)));
  const std::string& message = wire::as_str(items.at(2));
  std::vector<std::string> trace;
  for (const auto& t : wire::as_list(items.at(3))) trace.push_back(wire::as_str(t));
  switch (tag) {
    case ErrorTag::Stale: throw StaleMirror(message, std::move(trace));
    case ErrorTag::Overflow: throw TransitionOverflow(message, std::move(trace));
    case ErrorTag::Mismatch: throw KindMismatch(message, std::move(trace));
    case ErrorTag::Unknown: throw UnknownTarget(message, std::move(trace));
    case ErrorTag::Generic: break;
  }
  throw RuntimeError(message, std::move(trace));
}

}  // namespace

const partitioner::InterfaceRecord& DualRuntime::Impl::record_for(Direction d, const std::string& cls,
                                                                  const std::string& method) {
  const auto* r = plan.interface.find(d, cls, method);
  if (!r) {
    fail<UnknownTarget>("no " + std::string(partitioner::to_string(d)) + " record for `" + cls + "." + method + "`");
  }
  return *r;
}

wire::Bytes DualRuntime::Impl::encode_args(Isolate& x, const std::vector<Value>& args,
                                           const std::vector<MarshalKind>& kinds, std::vector<wire::Value>* out_values) {
  wire::Bytes out;
  for (std::size_t i = 0; i < args.size(); ++i) {
    wire::Value w = marshal_value(x, args[i], kinds[i]);
    wire::encode(w, out);
    if (out_values) out_values->push_back(std::move(w));
  }
  return out;
}

wire::Value DualRuntime::Impl::transition(
    Isolate& caller, TransitionMessage msg,
    const std::function<wire::Value(Isolate& callee, std::vector<wire::Value> args)>& body) {
  if (depth >= options.transition_limit) {
    fail<TransitionOverflow>("transition depth limit of " + std::to_string(options.transition_limit) + " exceeded");
  }
  Isolate& callee = other(caller);
  const std::uint64_t base = msg.direction == Direction::Ecall ? model.ecall_cost : model.ocall_cost;
  const std::uint64_t ser = model.serialize_per_byte * msg.args.size();
  charge_flat(caller, &CostBreakdown::transition, base);
  charge_flat(caller, &CostBreakdown::serialization, ser);
  caller.metrics.bytes_serialized += msg.args.size();
  if (msg.kind == MessageKind::ShimCall) {
    ++shim_calls;
    ++caller.metrics.ocalls;
  } else if (msg.direction == Direction::Ecall) {
    ++caller.metrics.ecalls;
  } else {
    ++caller.metrics.ocalls;
  }
  ++transition_seq;
  if (options.trace) {
    std::ostringstream line;
    line << transition_seq << ' ' << partitioner::to_string(msg.direction) << ' ' << kind_name(msg.kind) << ' '
         << msg.class_name << '.' << msg.method << " hash=" << std::hex << msg.proxy_hash << std::dec
         << " bytes=" << msg.args.size() << " cycles=" << base + ser;
    trace.push_back(line.str());
  }

  std::vector<wire::Value> args;
  wire::Reader reader(msg.args);
  while (!reader.at_end()) args.push_back(reader.read());

  msg.nesting_depth = depth + 1;
  ++depth;
  stack.push_back({callee.side, nullptr,
                   std::string(partitioner::to_string(msg.direction)) + " " + msg.class_name + "." + msg.method});
  struct Unwind {
    Impl& rt;
    ~Unwind() {
      rt.stack.pop_back();
      --rt.depth;
    }
  } unwind{*this};

  wire::Value response;
  bool failed = false;
  try {
    response = body(callee, std::move(args));
  } catch (const RuntimeError& e) {
    response = error_response(e);
    failed = true;
  }
  if (failed) raise(response);
  if (!response.is_unit()) {
    const std::size_t n = wire::encoded_size(response);
    charge_flat(callee, &CostBreakdown::serialization, model.serialize_per_byte * n);
    callee.metrics.bytes_serialized += n;
  }
  return response;
}

Value DualRuntime::Impl::proxy_construct(Isolate& x, const ProxyClassDef& proxy, std::vector<Value> args) {
  const std::string ctor(dsl::kCtorName);
  if (!proxy.find_stub(ctor)) fail<UnknownTarget>("proxy `" + proxy.class_name + "` has no constructor stub");
  const auto& record = record_for(proxy.direction, proxy.class_name, ctor);
  if (args.size() != record.params.size()) fail("constructor of `" + proxy.class_name + "` arity mismatch");

  TempGuard hold(x);
  HeapObject o;
  o.kind = ObjKind::Proxy;
  o.class_name = proxy.class_name;
  o.hash = mint_hash(x);
  const std::uint64_t hash = o.hash;
  charge_work(x, &CostBreakdown::alloc, static_cast<double>(model.alloc_cost));
  ++x.metrics.allocations;
  const ObjId id = x.heap.allocate(std::move(o));
  hold.hold(Value(Ref{id}));
  x.proxy_table[hash] = id;
  x.weak_list.push_back({id, hash, proxy.class_name});

  TransitionMessage msg;
  msg.direction = proxy.direction;
  msg.kind = MessageKind::ConstructorRelay;
  msg.class_name = proxy.class_name;
  msg.method = ctor;
  msg.proxy_hash = hash;
  msg.args = encode_args(x, args, record.params, nullptr);
  transition(x, std::move(msg), [&](Isolate& y, std::vector<wire::Value> in) {
    const ConcreteClass* cls = y.concrete(proxy.class_name);
    if (!cls) fail<UnknownTarget>("`" + proxy.class_name + "` is not concrete in the callee image");
    TempGuard callee_hold(y);
    std::vector<Value> vals;
    for (std::size_t i = 0; i < in.size(); ++i) {
      vals.push_back(unmarshal_value(y, in[i], record.params[i]));
      callee_hold.hold(vals.back());
    }
    const ObjId mirror = allocate_instance(y, *cls);
    y.registry[hash] = mirror;
    y.reverse[mirror] = hash;
    run_constructor(y, *cls, mirror, std::move(vals));
    return wire::Value{};
  });
  return Value(Ref{id});
}

Value DualRuntime::Impl::proxy_invoke(Isolate& x, ObjId proxy, const std::string& method, std::vector<Value> args) {
  const HeapObject& obj = x.heap.at(proxy);
  const std::string cls_name = obj.class_name;
  const std::uint64_t hash = obj.hash;
  const ProxyClassDef* def = x.proxy(cls_name);
  if (!def || !def->find_stub(method)) fail<UnknownTarget>("proxy `" + cls_name + "` has no stub `" + method + "`");
  const auto& record = record_for(def->direction, cls_name, method);
  if (args.size() != record.params.size()) fail("`" + cls_name + "." + method + "` arity mismatch");

  TransitionMessage msg;
  msg.direction = def->direction;
  msg.kind = MessageKind::InstanceRelay;
  msg.class_name = cls_name;
  msg.method = method;
  msg.proxy_hash = hash;
  msg.args = encode_args(x, args, record.params, nullptr);
  wire::Value ret = transition(x, std::move(msg), [&](Isolate& y, std::vector<wire::Value> in) {
    auto it = y.registry.find(hash);
    if (it == y.registry.end()) {
      std::ostringstream m;
      m << "stale mirror: hash " << std::hex << hash << " of `" << cls_name << "` is not registered";
      fail<StaleMirror>(m.str());
    }
    const ObjId mirror = it->second;
    const ConcreteClass* cls = y.concrete(cls_name);
    const dsl::MethodDecl* m = cls ? cls->decl.find_method(method) : nullptr;
    if (!m || m->is_static) fail<UnknownTarget>("`" + cls_name + "." + method + "` has no relay target");
    TempGuard callee_hold(y);
    std::vector<Value> vals;
    for (std::size_t i = 0; i < in.size(); ++i) {
      vals.push_back(unmarshal_value(y, in[i], record.params[i]));
      callee_hold.hold(vals.back());
    }
    Value r = run_method(y, *cls, *m, Value(Ref{mirror}), std::move(vals));
    if (record.ret == MarshalKind::Unit) return wire::Value{};
    callee_hold.hold(r);
    return marshal_value(y, r, record.ret);
  });
  return unmarshal_value(x, ret, record.ret);
}

Value DualRuntime::Impl::shim(Isolate& x, const std::string& op, std::vector<Value> args) {
  if (op == "print") args = {Value(display(args.at(0)))};
  TransitionMessage msg;
  msg.direction = Direction::Ocall;
  msg.kind = MessageKind::ShimCall;
  msg.class_name = "shim";
  msg.method = op;
  msg.args = encode_args(x, args, std::vector<MarshalKind>(args.size(), MarshalKind::Serialized), nullptr);
  const bool returns = op == "file_read";
  wire::Value ret = transition(x, std::move(msg), [&](Isolate& y, std::vector<wire::Value> in) {
    if (op == "print") {
      print_line(y, Value(wire::as_str(in.at(0))));
    } else if (op == "file_write") {
      file_write(y, wire::as_str(in.at(0)), wire::as_str(in.at(1)));
    } else if (returns) {
      return wire::Value(file_read(y, wire::as_str(in.at(0))));
    } else {
      fail<UnknownTarget>("unknown shim operation `" + op + "`");
    }
    return wire::Value{};
  });
  if (!returns) return Value{};
  return Value(wire::as_str(ret));
}

GcStats DualRuntime::Impl::collect(Isolate& x) {
  std::vector<ObjId> roots;
  auto add = [&](const Value& v) {
    if (v.is_ref()) roots.push_back(v.as_ref().id);
  };
  for (const auto& f : x.frames) {
    add(f.self);
    add(f.ret);
    for (const auto& scope : f.scopes) {
      for (const auto& [name, v] : scope) add(v);
    }
  }
  for (const auto& v : x.temps) add(v);
  for (const auto& v : x.host_roots) add(v);
  for (const auto& [h, id] : x.registry) roots.push_back(id);

  GcStats stats = x.heap.collect(roots);
  ++x.collections;
  ++x.metrics.gc_runs;
  const std::uint64_t before = x.costs.gc;
  charge_work(x, &CostBreakdown::gc,
              static_cast<double>(stats.swept_bytes + stats.live_bytes) * static_cast<double>(model.field_access_cost));
  x.metrics.gc_cycles += x.costs.gc - before;

  if (options.gc_mode == GcMode::Deterministic && options.scan_every_k > 0 &&
      x.collections % static_cast<std::uint64_t>(options.scan_every_k) == 0) {
    helper_scan(x);
  }
  return stats;
}

std::vector<std::uint64_t> DualRuntime::Impl::helper_scan(Isolate& x) {
  std::vector<std::uint64_t> removed;
  Isolate& y = other(x);
  std::vector<WeakEntry> kept;
  for (auto& e : x.weak_list) {
    if (x.heap.contains(e.proxy)) {
      kept.push_back(std::move(e));
      continue;
    }
    auto it = x.proxy_table.find(e.hash);
    if (it != x.proxy_table.end() && it->second != e.proxy && x.heap.contains(it->second)) continue;
    if (it != x.proxy_table.end()) x.proxy_table.erase(it);
    if (std::find(removed.begin(), removed.end(), e.hash) != removed.end()) continue;

    // RemoveMirror bypasses the depth limit: it is issued by the helper, not by DSL code.
    const wire::Value arg = wire::HashRef{e.hash, x.image->class_id(e.class_name).value_or(0)};
    const std::size_t bytes = wire::encoded_size(arg);
    const Direction d = x.side == Side::Untrusted ? Direction::Ecall : Direction::Ocall;
    const std::uint64_t base = d == Direction::Ecall ? model.ecall_cost : model.ocall_cost;
    charge_flat(x, &CostBreakdown::transition, base);
    charge_flat(x, &CostBreakdown::serialization, model.serialize_per_byte * bytes);
    x.metrics.bytes_serialized += bytes;
    ++transition_seq;
    if (options.trace) {
      std::ostringstream line;
      line << transition_seq << ' ' << partitioner::to_string(d) << " RemoveMirror " << e.class_name
           << ".<remove> hash=" << std::hex << e.hash << std::dec << " bytes=" << bytes
           << " cycles=" << base + model.serialize_per_byte * bytes;
      trace.push_back(line.str());
    }
    auto r = y.registry.find(e.hash);
    if (r != y.registry.end()) {
      y.reverse.erase(r->second);
      y.registry.erase(r);
    }
    removed.push_back(e.hash);
  }
  x.weak_list = std::move(kept);
  return removed;
}

void DualRuntime::Impl::live_yield() {
  if (scans_waiting.load() == 0) return;
  world.unlock();
  while (scans_waiting.load() > 0) std::this_thread::yield();
  world.lock();
}

}  // namespace encpart::runtime

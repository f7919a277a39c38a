#pragma once

// Internal state shared by the interpreter, marshaling and transition code.

#include <atomic>
#include <condition_variable>
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <thread>

#include "encpart/runtime/runtime.hpp"

namespace encpart::runtime {

using partitioner::ConcreteClass;
using partitioner::ImageSpec;
using partitioner::ProxyClassDef;

struct Frame {
  std::string class_name;
  std::string method;
  Value self;  // unit in static methods
  std::vector<std::map<std::string, Value, std::less<>>> scopes;
  dsl::SourceLoc loc;
  Value ret;
};

struct WeakEntry {
  ObjId proxy = 0;
  std::uint64_t hash = 0;
  std::string class_name;
};

struct Isolate {
  Side side = Side::Untrusted;
  const ImageSpec* image = nullptr;
  Heap heap;
  std::map<std::uint64_t, ObjId> registry;  // hash -> mirror, strong
  std::map<ObjId, std::uint64_t> reverse;   // mirror -> hash
  std::map<std::uint64_t, ObjId> proxy_table;  // hash -> proxy, weak
  std::vector<WeakEntry> weak_list;
  std::deque<Frame> frames;
  std::vector<Value> temps;  // values held across nested evaluation
  std::vector<Value> host_roots;
  MetricCounters metrics;
  CostBreakdown costs;
  std::uint64_t next_hash = 0;
  std::uint64_t collections = 0;
  std::map<std::string, const ConcreteClass*, std::less<>> classes;
  std::map<std::string, const ProxyClassDef*, std::less<>> proxies;

  const ConcreteClass* concrete(std::string_view name) const {
    auto it = classes.find(name);
    return it == classes.end() ? nullptr : it->second;
  }
  const ProxyClassDef* proxy(std::string_view name) const {
    auto it = proxies.find(name);
    return it == proxies.end() ? nullptr : it->second;
  }
};

enum class MessageKind : std::uint8_t { ConstructorRelay, InstanceRelay, ShimCall, RemoveMirror };

struct TransitionMessage {
  Direction direction = Direction::Ecall;
  MessageKind kind = MessageKind::InstanceRelay;
  std::string class_name;
  std::string method;
  std::uint64_t proxy_hash = 0;
  wire::Bytes args;
  int nesting_depth = 0;
};

// Entry of the logical call stack spanning both isolates.
struct StackEntry {
  Side side = Side::Untrusted;
  const Frame* frame = nullptr;  // null for transition markers
  std::string marker;
};

enum class Control : std::uint8_t { Normal, Return };

struct DualRuntime::Impl {
  Impl(partitioner::PartitionPlan plan, CostModel model, RuntimeOptions options);

  partitioner::PartitionPlan plan;
  CostModel model;
  RuntimeOptions options;
  Isolate trusted;
  Isolate untrusted;
  std::string transcript;
  std::map<std::string, std::string> vfs;
  std::vector<std::string> trace;
  std::uint64_t shim_calls = 0;
  std::uint64_t transition_seq = 0;
  int depth = 0;  // transitions in flight
  std::uint64_t steps = 0;
  std::vector<StackEntry> stack;

  // Live GC helper coordination.
  std::mutex world;
  std::atomic<int> scans_waiting{0};
  std::atomic<bool> stop_helpers{false};
  std::mutex helper_mu;
  std::condition_variable helper_cv;

  Isolate& iso(Side s) { return s == Side::Trusted ? trusted : untrusted; }
  const Isolate& iso(Side s) const { return s == Side::Trusted ? trusted : untrusted; }
  Isolate& other(const Isolate& x) { return x.side == Side::Trusted ? untrusted : trusted; }

  // ---- errors ----
  std::vector<std::string> snapshot_trace() const;
  template <typename E = RuntimeError>
  [[noreturn]] void fail(const std::string& message) {
    throw E(message, snapshot_trace());
  }

  // ---- costs ----
  void charge_work(Isolate& x, std::uint64_t CostBreakdown::*bucket, double base);
  void charge_flat(Isolate& x, std::uint64_t CostBreakdown::*bucket, std::uint64_t cycles);
  void charge_field(Isolate& x) { charge_work(x, &CostBreakdown::field, static_cast<double>(model.field_access_cost)); }

  // ---- interpreter (interpreter.cpp) ----
  Value eval(Isolate& x, const dsl::Expr& e);
  Control exec(Isolate& x, const dsl::Stmt& s);
  Control exec_block(Isolate& x, const std::vector<dsl::StmtPtr>& body);
  void safepoint(Isolate& x, dsl::SourceLoc loc);
  Value instantiate(Isolate& x, const std::string& class_name, std::vector<Value> args);
  ObjId allocate_instance(Isolate& x, const ConcreteClass& cls);
  void run_constructor(Isolate& x, const ConcreteClass& cls, ObjId self, std::vector<Value> args);
  Value invoke(Isolate& x, const Value& receiver, const std::string& method, std::vector<Value> args);
  Value invoke_static(Isolate& x, const std::string& class_name, const std::string& method, std::vector<Value> args);
  Value run_method(Isolate& x, const ConcreteClass& cls, const dsl::MethodDecl& m, Value self, std::vector<Value> args);
  Value list_method(Isolate& x, ObjId list, const std::string& method, std::vector<Value> args);
  Value builtin(Isolate& x, const dsl::Expr& e, std::vector<Value> args);
  Value default_value(const dsl::TypeRef& t) const;
  Value* lookup_local(Isolate& x, std::string_view name);
  ObjId new_list(Isolate& x, std::vector<Value> items, bool charged);
  void print_line(Isolate& x, const Value& v);
  void file_write(Isolate& x, const std::string& path, const std::string& data);
  std::string file_read(Isolate& x, const std::string& path);
  ExecutionResult result() const;

  // ---- marshaling (marshal.cpp) ----
  wire::Value marshal_value(Isolate& x, const Value& v, MarshalKind kind);
  Value unmarshal_value(Isolate& y, const wire::Value& w, MarshalKind kind);
  std::uint64_t hash_for_outbound(Isolate& x, ObjId obj);
  Value proxy_for(Isolate& y, std::uint64_t hash, const std::string& class_name);
  std::uint64_t mint_hash(Isolate& x);

  // ---- transitions (transition.cpp) ----
  wire::Value transition(Isolate& caller, TransitionMessage msg,
                         const std::function<wire::Value(Isolate& callee, std::vector<wire::Value> args)>& body);
  wire::Bytes encode_args(Isolate& x, const std::vector<Value>& args, const std::vector<MarshalKind>& kinds,
                          std::vector<wire::Value>* out_values);
  Value proxy_construct(Isolate& x, const ProxyClassDef& proxy, std::vector<Value> args);
  Value proxy_invoke(Isolate& x, ObjId proxy, const std::string& method, std::vector<Value> args);
  Value shim(Isolate& x, const std::string& op, std::vector<Value> args);
  GcStats collect(Isolate& x);
  std::vector<std::uint64_t> helper_scan(Isolate& x);
  void live_yield();
  const partitioner::InterfaceRecord& record_for(Direction d, const std::string& cls, const std::string& method);
};

// Scope guard for a frame on both the isolate's stack and the logical stack.
class FrameGuard {
 public:
  FrameGuard(DualRuntime::Impl& rt, Isolate& x, Frame f);
  ~FrameGuard();
  FrameGuard(const FrameGuard&) = delete;
  FrameGuard& operator=(const FrameGuard&) = delete;
  Frame& frame() { return x_.frames.back(); }

 private:
  DualRuntime::Impl& rt_;
  Isolate& x_;
};

// Pops temps pushed during one evaluation step.
class TempGuard {
 public:
  explicit TempGuard(Isolate& x) : x_(x), mark_(x.temps.size()) {}
  ~TempGuard() { x_.temps.resize(mark_); }
  void hold(const Value& v) {
    if (v.is_ref()) x_.temps.push_back(v);
  }
  TempGuard(const TempGuard&) = delete;
  TempGuard& operator=(const TempGuard&) = delete;

 private:
  Isolate& x_;
  std::size_t mark_;
};

inline constexpr std::size_t kMaxFrames = 1500;
inline constexpr std::uint64_t kMaxString = 64ull << 20;

}  // namespace encpart::runtime

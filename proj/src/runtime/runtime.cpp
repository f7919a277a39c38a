#include "encpart/partitioner/image_io.hpp"
#include "encpart/partitioner/partition.hpp"
#include "engine.hpp"

namespace encpart::runtime {

namespace {

void index_image(Isolate& x, Side side, const ImageSpec& image) {
  x.side = side;
  x.image = &image;
  for (const auto& c : image.classes) x.classes[c.decl.name] = &c;
  for (const auto& p : image.proxies) x.proxies[p.class_name] = &p;
}

void check_interface(const partitioner::PartitionPlan& plan) {
  auto require = [&](Direction d, const std::string& cls, const std::string& method, std::size_t arity) {
    const auto* r = plan.interface.find(d, cls, method);
    if (!r) {
      throw InterfaceMismatch("image references `" + cls + "." + method + "` but the interface has no " +
                              std::string(partitioner::to_string(d)) + " record for it");
    }
    if (r->params.size() != arity) {
      throw InterfaceMismatch("interface record for `" + cls + "." + method + "` has the wrong arity");
    }
  };
  for (Side s : {Side::Trusted, Side::Untrusted}) {
    const ImageSpec& image = plan.image(s);
    for (const auto& p : image.proxies) {
      for (const auto& stub : p.stubs) require(p.direction, p.class_name, stub.name, stub.params.size());
    }
    for (const auto& c : image.classes) {
      const Direction d = s == Side::Trusted ? Direction::Ecall : Direction::Ocall;
      for (const auto& r : c.relays) require(d, r.owner, r.method, r.params.size());
    }
  }
}

}  // namespace

DualRuntime::Impl::Impl(partitioner::PartitionPlan p, CostModel m, RuntimeOptions o)
    : plan(std::move(p)), model(m), options(o) {
  model.check();
  if (options.transition_limit < 0) throw ConfigError("transition limit must be non-negative");
  check_interface(plan);
  index_image(trusted, Side::Trusted, plan.trusted);
  index_image(untrusted, Side::Untrusted, plan.untrusted);
}

ExecutionResult DualRuntime::Impl::result() const {
  ExecutionResult r;
  r.transcript = transcript;
  r.vfs = vfs;
  r.trusted = trusted.metrics;
  r.untrusted = untrusted.metrics;
  for (const Isolate* x : {&trusted, &untrusted}) {
    MetricCounters& m = x->side == Side::Trusted ? r.trusted : r.untrusted;
    m.mirror_registry_size = x->registry.size();
    m.live_proxies = x->heap.count(ObjKind::Proxy);
  }
  r.trusted_costs = trusted.costs;
  r.untrusted_costs = untrusted.costs;
  r.shim_calls = shim_calls;
  r.trace = trace;
  return r;
}

DualRuntime::DualRuntime(partitioner::PartitionPlan plan, CostModel model, RuntimeOptions options)
    : impl_(std::make_unique<Impl>(std::move(plan), model, options)) {}

DualRuntime DualRuntime::load(const std::filesystem::path& plan_dir, CostModel model, RuntimeOptions options) {
  return DualRuntime(partitioner::load_plan(plan_dir), model, options);
}

DualRuntime::DualRuntime(DualRuntime&&) noexcept = default;
DualRuntime& DualRuntime::operator=(DualRuntime&&) noexcept = default;
DualRuntime::~DualRuntime() = default;

ExecutionResult DualRuntime::run_main(const std::vector<std::string>& argv) {
  Impl& rt = *impl_;
  auto holds_main = [&](const ImageSpec& image) {
    for (const auto& e : image.entry_points) {
      if (e.method == "main") return true;
    }
    return false;
  };
  Isolate& x = holds_main(rt.plan.untrusted) || !holds_main(rt.plan.trusted) ? rt.untrusted : rt.trusted;
  std::string main_class;
  for (const auto& e : x.image->entry_points) {
    if (e.method == "main") main_class = e.class_name;
  }

  std::vector<std::thread> helpers;
  std::unique_lock<std::mutex> world(rt.world);
  if (rt.options.gc_mode == GcMode::Live) {
    rt.stop_helpers = false;
    for (Isolate* iso : {&rt.trusted, &rt.untrusted}) {
      helpers.emplace_back([&rt, iso] {
        std::unique_lock<std::mutex> lk(rt.helper_mu);
        while (!rt.helper_cv.wait_for(lk, rt.options.live_period, [&] { return rt.stop_helpers.load(); })) {
          lk.unlock();
          ++rt.scans_waiting;
          {
            std::lock_guard<std::mutex> w(rt.world);
            rt.helper_scan(*iso);
          }
          --rt.scans_waiting;
          lk.lock();
        }
      });
    }
  }

  ExecutionResult res;
  try {
    if (main_class.empty()) rt.fail("no image holds `main`");
    std::vector<Value> items;
    for (const auto& a : argv) items.emplace_back(a);
    Value args(Ref{rt.new_list(x, std::move(items), false)});
    x.host_roots.push_back(args);
    const dsl::MethodDecl* entry = x.concrete(main_class)->decl.find_method("main");
    rt.invoke_static(x, main_class, "main", entry && entry->params.empty() ? std::vector<Value>{} : std::vector{args});
    x.host_roots.pop_back();
  } catch (const RuntimeError& e) {
    x.host_roots.clear();
    res.exit_status = 1;
    res.error = e.describe();
  } catch (const std::exception& e) {
    x.host_roots.clear();
    res.exit_status = 1;
    res.error = e.what();
  }

  world.unlock();
  if (!helpers.empty()) {
    {
      std::lock_guard<std::mutex> lk(rt.helper_mu);
      rt.stop_helpers = true;
    }
    rt.helper_cv.notify_all();
    for (auto& t : helpers) t.join();
  }

  ExecutionResult out = rt.result();
  out.exit_status = res.exit_status;
  out.error = std::move(res.error);
  return out;
}

Value DualRuntime::host_new(Side where, std::string_view class_name, std::vector<Value> args) {
  Isolate& x = impl_->iso(where);
  Value v = impl_->instantiate(x, std::string(class_name), std::move(args));
  x.host_roots.push_back(v);
  return v;
}

Value DualRuntime::host_call(Side where, const Value& receiver, std::string_view method, std::vector<Value> args) {
  Isolate& x = impl_->iso(where);
  Value v = impl_->invoke(x, receiver, std::string(method), std::move(args));
  if (v.is_ref()) x.host_roots.push_back(v);
  return v;
}

void DualRuntime::host_drop(Side where, const Value& v) {
  auto& roots = impl_->iso(where).host_roots;
  for (auto it = roots.begin(); it != roots.end(); ++it) {
    if (*it == v) {
      roots.erase(it);
      return;
    }
  }
}

GcStats DualRuntime::gc_collect(Side side) {
  const int k = impl_->options.scan_every_k;
  impl_->options.scan_every_k = 0;
  GcStats s = impl_->collect(impl_->iso(side));
  impl_->options.scan_every_k = k;
  return s;
}

std::vector<std::uint64_t> DualRuntime::gc_helper_scan(Side side) { return impl_->helper_scan(impl_->iso(side)); }

wire::Bytes DualRuntime::marshal(Side side, const Value& v, MarshalKind kind) {
  Isolate& x = impl_->iso(side);
  wire::Bytes out = wire::encode(impl_->marshal_value(x, v, kind));
  x.metrics.bytes_serialized += out.size();
  return out;
}

Value DualRuntime::unmarshal(Side side, std::span<const std::uint8_t> bytes, MarshalKind kind) {
  Isolate& x = impl_->iso(side);
  Value v = impl_->unmarshal_value(x, wire::decode(bytes), kind);
  if (v.is_ref()) x.host_roots.push_back(v);
  return v;
}

std::size_t DualRuntime::registry_size(Side side) const { return impl_->iso(side).registry.size(); }
std::size_t DualRuntime::live_proxies(Side side) const { return impl_->iso(side).heap.count(ObjKind::Proxy); }
std::size_t DualRuntime::weak_list_size(Side side) const { return impl_->iso(side).weak_list.size(); }

std::size_t DualRuntime::cleared_weak_entries(Side side) const {
  const Isolate& x = impl_->iso(side);
  std::size_t n = 0;
  for (const auto& e : x.weak_list) n += x.heap.contains(e.proxy) ? 0 : 1;
  return n;
}

std::size_t DualRuntime::indexed_records(Direction d) const { return impl_->plan.interface.count(d); }

MetricCounters DualRuntime::metrics(Side side) const {
  const Isolate& x = impl_->iso(side);
  MetricCounters m = x.metrics;
  m.mirror_registry_size = x.registry.size();
  m.live_proxies = x.heap.count(ObjKind::Proxy);
  return m;
}

CostBreakdown DualRuntime::costs(Side side) const { return impl_->iso(side).costs; }
std::uint64_t DualRuntime::shim_calls() const { return impl_->shim_calls; }
const std::string& DualRuntime::transcript() const { return impl_->transcript; }
const std::map<std::string, std::string>& DualRuntime::vfs() const { return impl_->vfs; }
const std::vector<std::string>& DualRuntime::trace_lines() const { return impl_->trace; }
const Heap& DualRuntime::heap(Side side) const { return impl_->iso(side).heap; }

std::vector<std::vector<Value>> DualRuntime::instances_of(Side side, std::string_view class_name) const {
  std::vector<std::vector<Value>> out;
  for (const auto& [id, o] : impl_->iso(side).heap.objects()) {
    if (o.kind == ObjKind::Instance && o.class_name == class_name) out.push_back(o.slots);
  }
  return out;
}

partitioner::PartitionPlan single_isolate_plan(const dsl::Program& program, Side where) {
  partitioner::PartitionPlan plan;
  plan.trusted.side = Side::Trusted;
  plan.untrusted.side = Side::Untrusted;
  for (auto* image : {&plan.trusted, &plan.untrusted}) {
    for (const auto& c : program.classes) {
      image->class_table.push_back(c.name);
      image->class_annotations.push_back(c.annotation);
    }
  }
  auto& home = where == Side::Trusted ? plan.trusted : plan.untrusted;
  for (const auto& c : program.classes) {
    home.classes.push_back({c, {}});
    switch (c.annotation) {
      case dsl::Annotation::Trusted: plan.sets.trusted.push_back(c.name); break;
      case dsl::Annotation::Untrusted: plan.sets.untrusted.push_back(c.name); break;
      case dsl::Annotation::Neutral: plan.sets.neutral.push_back(c.name); break;
    }
  }
  home.entry_points.push_back({program.entry_class().name, "main"});
  return plan;
}

ExecutionResult run_unpartitioned(const dsl::Program& program, CostModel model, RuntimeOptions options) {
  return DualRuntime(single_isolate_plan(program, Side::Trusted), model, options).run_main();
}

ExecutionResult run_reference(const dsl::Program& program, CostModel model, RuntimeOptions options) {
  return DualRuntime(single_isolate_plan(program, Side::Untrusted), model, options).run_main();
}

}  // namespace encpart::runtime

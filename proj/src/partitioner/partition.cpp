#include "encpart/partitioner/partition.hpp"

#include <algorithm>
#include <deque>

#include "encpart/dsl/check.hpp"

namespace encpart::partitioner {

using dsl::Annotation;
using dsl::ClassDecl;
using dsl::MethodSig;
using dsl::Program;
using dsl::TypeRef;

MarshalKind marshal_kind_of(const TypeRef& t, const Program& program) {
  if (t.is_unit()) return MarshalKind::Unit;
  if (t.is_primitive()) return MarshalKind::Primitive;
  if (t.is_class()) {
    const ClassDecl* c = program.find_class(t.class_name);
    if (c && c->annotation != Annotation::Neutral) return MarshalKind::HashRef;
  }
  return MarshalKind::Serialized;
}

ProxyClassDef make_proxy(const ClassDecl& cls, Direction direction) {
  ProxyClassDef p;
  p.class_name = cls.name;
  p.direction = direction;
  dsl::ClassSig sig = dsl::class_sig_of(cls);
  p.stubs.push_back(sig.ctor);
  for (const auto& m : sig.methods) {
    if (!m.is_static && m.visibility == dsl::Visibility::Public) p.stubs.push_back(m);
  }
  return p;
}

namespace {

RelayMethodDef relay_for(const std::string& owner, const MethodSig& m, const Program& program) {
  RelayMethodDef r;
  r.owner = owner;
  r.method = m.name;
  r.kind = m.is_constructor ? RelayKind::Constructor : RelayKind::Instance;
  for (const auto& p : m.params) r.params.push_back(marshal_kind_of(p.type, program));
  r.ret = m.is_constructor ? MarshalKind::Unit : marshal_kind_of(m.ret, program);
  return r;
}

}  // namespace

std::vector<RelayMethodDef> synthesize_relays(const ClassDecl& cls, const Program& program) {
  std::vector<RelayMethodDef> out;
  for (const auto& stub : make_proxy(cls, Direction::Ecall).stubs) out.push_back(relay_for(cls.name, stub, program));
  return out;
}

std::pair<ClassSet, ClassSet> generate_proxies(const Program& program) {
  ClassSet trusted;
  ClassSet untrusted;
  for (const auto& c : program.classes) {
    switch (c.annotation) {
      case Annotation::Trusted:
        trusted.concrete.push_back({c, synthesize_relays(c, program)});
        untrusted.proxies.push_back(make_proxy(c, Direction::Ecall));
        break;
      case Annotation::Untrusted:
        untrusted.concrete.push_back({c, synthesize_relays(c, program)});
        trusted.proxies.push_back(make_proxy(c, Direction::Ocall));
        break;
      case Annotation::Neutral:
        trusted.concrete.push_back({c, {}});
        untrusted.concrete.push_back({c, {}});
        break;
    }
  }
  return {std::move(trusted), std::move(untrusted)};
}

std::string Node::str() const {
  const char* tag = kind == NodeKind::Method ? "" : kind == NodeKind::Stub ? " [stub]" : " [relay]";
  return class_name + "." + method + tag;
}

namespace {

void note_types(std::set<std::string>& out, const MethodSig& m) {
  for (const auto& p : m.params) {
    if (p.type.base == TypeRef::Base::Class) out.insert(p.type.class_name);
  }
  if (m.ret.base == TypeRef::Base::Class) out.insert(m.ret.class_name);
}

dsl::SignatureTable signatures_of(const ClassSet& classes) {
  dsl::SignatureTable sigs;
  for (const auto& c : classes.concrete) sigs.add(dsl::class_sig_of(c.decl));
  for (const auto& p : classes.proxies) {
    dsl::ClassSig s;
    s.name = p.class_name;
    for (const auto& stub : p.stubs) {
      if (stub.is_constructor) {
        s.ctor = stub;
      } else {
        s.methods.push_back(stub);
      }
    }
    sigs.add(std::move(s));
  }
  return sigs;
}

}  // namespace

ReachabilityGraph build_call_graph(const ClassSet& classes, const std::vector<Node>& entry_points) {
  ReachabilityGraph g;
  const dsl::SignatureTable sigs = signatures_of(classes);
  std::set<std::string> proxy_names;
  for (const auto& p : classes.proxies) proxy_names.insert(p.class_name);

  auto add_body = [&](const Node& from, const dsl::BodyFacts& facts) {
    if (!facts.diagnostics.empty()) {
      const auto& d = facts.diagnostics.front();
      throw UnresolvedCall(from.str() + " at " + std::to_string(d.loc.line) + ":" + std::to_string(d.loc.col) +
                           ": " + d.message);
    }
    auto& out = g.edges[from];
    for (const auto& call : facts.calls) {
      const bool stub = proxy_names.count(call.class_name) != 0;
      out.insert({call.class_name, call.method, stub ? NodeKind::Stub : NodeKind::Method});
    }
    g.type_refs[from].insert(facts.class_refs.begin(), facts.class_refs.end());
  };

  for (const auto& c : classes.concrete) {
    const std::string& name = c.decl.name;
    Node ctor{name, std::string(dsl::kCtorName), NodeKind::Method};
    g.nodes.insert(ctor);
    add_body(ctor, dsl::analyze_constructor(sigs, c.decl));
    g.type_refs[ctor].insert(name);
    for (const auto& m : c.decl.methods) {
      Node n{name, m.name, NodeKind::Method};
      g.nodes.insert(n);
      add_body(n, dsl::analyze_method(sigs, c.decl, m));
      g.type_refs[n].insert(name);
    }
    for (const auto& r : c.relays) {
      Node n{name, r.method, NodeKind::Relay};
      g.nodes.insert(n);
      g.edges[n].insert({name, r.method, NodeKind::Method});
      g.type_refs[n].insert(name);
    }
  }
  for (const auto& p : classes.proxies) {
    for (const auto& stub : p.stubs) {
      Node n{p.class_name, stub.name, NodeKind::Stub};
      g.nodes.insert(n);
      auto& refs = g.type_refs[n];
      refs.insert(p.class_name);
      note_types(refs, stub);
    }
  }
  // Relays share their wrapped method's signature types.
  for (const auto& c : classes.concrete) {
    for (const auto& r : c.relays) {
      const MethodSig* m = r.method == dsl::kCtorName ? &sigs.find(c.decl.name)->ctor
                                                       : sigs.find(c.decl.name)->find_method(r.method);
      if (m) note_types(g.type_refs[{c.decl.name, r.method, NodeKind::Relay}], *m);
    }
  }

  for (const auto& [from, targets] : g.edges) {
    for (const auto& t : targets) {
      if (!g.nodes.count(t)) throw UnresolvedCall(from.str() + " calls missing " + t.str());
    }
  }

  std::deque<Node> work;
  for (const auto& e : entry_points) {
    if (!g.nodes.count(e)) throw UnresolvedCall("entry point " + e.str() + " does not exist");
    g.entry_points.push_back(e);
    if (g.reachable.insert(e).second) work.push_back(e);
  }
  while (!work.empty()) {
    Node n = work.front();
    work.pop_front();
    auto it = g.edges.find(n);
    if (it == g.edges.end()) continue;
    for (const auto& t : it->second) {
      if (g.reachable.insert(t).second) work.push_back(t);
    }
  }
  return g;
}

namespace {

ImageSpec assemble(Side side, const Program& program, const ClassSet& set, const ReachabilityGraph& g,
                   const std::vector<Node>& seeds) {
  ImageSpec img;
  img.side = side;
  for (const auto& c : program.classes) {
    img.class_table.push_back(c.name);
    img.class_annotations.push_back(c.annotation);
  }
  for (const auto& s : seeds) img.entry_points.push_back({s.class_name, s.method});

  std::set<std::string> live;
  for (const auto& n : g.reachable) {
    live.insert(n.class_name);
    auto refs = g.type_refs.find(n);
    if (refs != g.type_refs.end()) live.insert(refs->second.begin(), refs->second.end());
  }
  // Objects of a live concrete class can carry any of its field types.
  for (bool grew = true; grew;) {
    grew = false;
    for (const auto& c : set.concrete) {
      if (!live.count(c.decl.name)) continue;
      for (const auto& f : c.decl.fields) {
        if (f.type.base == TypeRef::Base::Class && live.insert(f.type.class_name).second) grew = true;
      }
    }
  }

  for (const auto& c : set.concrete) {
    if (!live.count(c.decl.name)) continue;
    ConcreteClass out{c.decl, {}};
    if (!g.is_reachable({c.decl.name, std::string(dsl::kCtorName), NodeKind::Method})) {
      out.decl.constructors.clear();
    }
    auto& methods = out.decl.methods;
    methods.erase(std::remove_if(methods.begin(), methods.end(),
                                 [&](const dsl::MethodDecl& m) {
                                   return !g.is_reachable({c.decl.name, m.name, NodeKind::Method});
                                 }),
                  methods.end());
    for (const auto& r : c.relays) {
      if (g.is_reachable({c.decl.name, r.method, NodeKind::Relay})) out.relays.push_back(r);
    }
    img.classes.push_back(std::move(out));
  }
  for (const auto& p : set.proxies) {
    if (!live.count(p.class_name)) {
      img.pruned_proxies.push_back(p.class_name);
      continue;
    }
    ProxyClassDef out = p;
    out.stubs.clear();
    for (const auto& s : p.stubs) {
      if (g.is_reachable({p.class_name, s.name, NodeKind::Stub})) out.stubs.push_back(s);
    }
    img.proxies.push_back(std::move(out));
  }
  return img;
}

InterfaceRecord record_of(Direction d, const RelayMethodDef& r) {
  return {d, r.owner, r.method, r.params, r.ret};
}

}  // namespace

PartitionPlan compute_images(const Program& program) {
  PartitionPlan plan;
  for (const auto& c : program.classes) {
    switch (c.annotation) {
      case Annotation::Trusted: plan.sets.trusted.push_back(c.name); break;
      case Annotation::Untrusted: plan.sets.untrusted.push_back(c.name); break;
      case Annotation::Neutral: plan.sets.neutral.push_back(c.name); break;
    }
  }

  auto [tset, uset] = generate_proxies(program);

  std::vector<Node> trusted_seeds;
  for (const auto& c : tset.concrete) {
    for (const auto& r : c.relays) trusted_seeds.push_back({r.owner, r.method, NodeKind::Relay});
  }
  ReachabilityGraph tg = build_call_graph(tset, trusted_seeds);

  // An untrusted relay survives only if trusted code can reach its stub.
  std::vector<Node> untrusted_seeds{{program.entry_class().name, "main", NodeKind::Method}};
  for (const auto& c : uset.concrete) {
    for (const auto& r : c.relays) {
      if (tg.is_reachable({r.owner, r.method, NodeKind::Stub})) {
        untrusted_seeds.push_back({r.owner, r.method, NodeKind::Relay});
      }
    }
  }
  ReachabilityGraph ug = build_call_graph(uset, untrusted_seeds);

  plan.trusted = assemble(Side::Trusted, program, tset, tg, trusted_seeds);
  plan.untrusted = assemble(Side::Untrusted, program, uset, ug, untrusted_seeds);

  for (const auto& c : plan.trusted.classes) {
    for (const auto& r : c.relays) plan.interface.records.push_back(record_of(Direction::Ecall, r));
  }
  for (const auto& c : plan.untrusted.classes) {
    for (const auto& r : c.relays) plan.interface.records.push_back(record_of(Direction::Ocall, r));
  }
  std::sort(plan.interface.records.begin(), plan.interface.records.end(), [](const auto& a, const auto& b) {
    return std::tie(a.direction, a.class_name, a.method) < std::tie(b.direction, b.class_name, b.method);
  });
  return plan;
}

}  // namespace encpart::partitioner

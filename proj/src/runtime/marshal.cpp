#include <set>
#include <sstream>

#include "engine.hpp"

namespace encpart::runtime {

namespace {

bool is_annotated(const ImageSpec& image, std::string_view cls) {
  return image.annotation_of(cls) != dsl::Annotation::Neutral;
}

}  // namespace

std::uint64_t DualRuntime::Impl::mint_hash(Isolate& x) {
  const std::uint64_t bit = x.side == Side::Trusted ? (1ull << 63) : 0;
  return bit | ++x.next_hash;
}

std::uint64_t DualRuntime::Impl::hash_for_outbound(Isolate& x, ObjId obj) {
  auto it = x.reverse.find(obj);
  if (it != x.reverse.end()) return it->second;
  const std::uint64_t h = mint_hash(x);
  x.registry[h] = obj;
  x.reverse[obj] = h;
  return h;
}

Value DualRuntime::Impl::proxy_for(Isolate& y, std::uint64_t hash, const std::string& class_name) {
  auto it = y.proxy_table.find(hash);
  if (it != y.proxy_table.end() && y.heap.contains(it->second)) return Value(Ref{it->second});
  HeapObject o;
  o.kind = ObjKind::Proxy;
  o.class_name = class_name;
  o.hash = hash;
  const ObjId id = y.heap.allocate(std::move(o));
  y.proxy_table[hash] = id;
  y.weak_list.push_back({id, hash, class_name});
  return Value(Ref{id});
}

namespace {

struct Marshaler {
  DualRuntime::Impl& rt;
  Isolate& x;
  std::set<ObjId> path;

  [[noreturn]] void mismatch(const std::string& what, MarshalKind kind) {
    rt.fail<KindMismatch>("cannot marshal " + what + " as " + std::string(partitioner::to_string(kind)));
  }

  std::uint32_t class_id(const std::string& cls) {
    auto id = x.image->class_id(cls);
    if (!id) rt.fail<KindMismatch>("class `" + cls + "` has no wire id");
    return *id;
  }

  wire::Value href(ObjId id) {
    const HeapObject& o = x.heap.at(id);
    if (o.kind == ObjKind::Proxy) return wire::HashRef{o.hash, class_id(o.class_name)};
    return wire::HashRef{rt.hash_for_outbound(x, id), class_id(o.class_name)};
  }

  wire::Value any(const Value& v) {
    if (v.is_unit() || v.is_null()) return {};
    if (v.is_int()) return v.as_int();
    if (v.is_bool()) return v.as_bool();
    if (v.is_str()) return v.as_str();
    const ObjId id = v.as_ref().id;
    const HeapObject& o = x.heap.at(id);
    if (o.kind == ObjKind::Proxy) return href(id);
    if (o.kind == ObjKind::Instance && is_annotated(*x.image, o.class_name)) return href(id);
    if (!path.insert(id).second) rt.fail<KindMismatch>("cannot marshal a cyclic object graph");
    wire::Value out;
    if (o.kind == ObjKind::List) {
      wire::List l;
      for (const auto& item : o.slots) l.items.push_back(any(item));
      out = std::move(l);
    } else {
      wire::NeutralObject n{class_id(o.class_name), {}};
      for (const auto& f : o.slots) n.fields.push_back(any(f));
      out = std::move(n);
    }
    path.erase(id);
    return out;
  }

  wire::Value top(const Value& v, MarshalKind kind) {
    switch (kind) {
      case MarshalKind::Unit: return {};
      case MarshalKind::Primitive:
        if (!v.is_int() && !v.is_bool()) mismatch(display(v), kind);
        return any(v);
      case MarshalKind::HashRef: {
        if (v.is_null()) return {};
        if (!v.is_ref()) mismatch(display(v), kind);
        const HeapObject& o = x.heap.at(v.as_ref().id);
        const bool ok = o.kind == ObjKind::Proxy ||
                        (o.kind == ObjKind::Instance && is_annotated(*x.image, o.class_name));
        if (!ok) mismatch("a neutral value", kind);
        return href(v.as_ref().id);
      }
      case MarshalKind::Serialized: {
        if (v.is_int() || v.is_bool() || v.is_unit()) mismatch(display(v), kind);
        if (v.is_ref()) {
          const HeapObject& o = x.heap.at(v.as_ref().id);
          if (o.kind == ObjKind::Proxy || (o.kind == ObjKind::Instance && is_annotated(*x.image, o.class_name))) {
            mismatch("an annotated object", kind);
          }
        }
        return any(v);
      }
    }
    return {};
  }
};

struct Unmarshaler {
  DualRuntime::Impl& rt;
  Isolate& y;
  TempGuard hold;

  Unmarshaler(DualRuntime::Impl& r, Isolate& iso) : rt(r), y(iso), hold(iso) {}

  const std::string& class_name(std::uint32_t id) {
    if (id >= y.image->class_table.size()) rt.fail<KindMismatch>("unknown class id " + std::to_string(id));
    return y.image->class_name(id);
  }

  Value any(const wire::Value& w) {
    switch (w.tag()) {
      case wire::Tag::Unit: return Value(Null{});
      case wire::Tag::Int: return Value(std::get<std::int64_t>(w.data));
      case wire::Tag::Bool: return Value(std::get<bool>(w.data));
      case wire::Tag::Str: return Value(std::get<std::string>(w.data));
      case wire::Tag::List: {
        std::vector<Value> items;
        for (const auto& item : std::get<wire::List>(w.data).items) items.push_back(any(item));
        Value v(Ref{rt.new_list(y, std::move(items), false)});
        hold.hold(v);
        return v;
      }
      case wire::Tag::HashRef: {
        const auto& h = std::get<wire::HashRef>(w.data);
        const std::string& cls = class_name(h.class_id);
        if (y.concrete(cls)) {
          auto it = y.registry.find(h.hash);
          if (it == y.registry.end()) {
            std::ostringstream msg;
            msg << "stale mirror: hash " << std::hex << h.hash << " of `" << cls << "` is not registered";
            rt.fail<StaleMirror>(msg.str());
          }
          return Value(Ref{it->second});
        }
        if (y.image->annotation_of(cls) == dsl::Annotation::Neutral) {
          rt.fail<KindMismatch>("hash reference to neutral class `" + cls + "`");
        }
        Value v = rt.proxy_for(y, h.hash, cls);
        hold.hold(v);
        return v;
      }
      case wire::Tag::NeutralObject: {
        const auto& n = std::get<wire::NeutralObject>(w.data);
        const std::string& cls = class_name(n.class_id);
        const ConcreteClass* c = y.concrete(cls);
        if (!c || y.image->annotation_of(cls) != dsl::Annotation::Neutral) {
          rt.fail<KindMismatch>("`" + cls + "` is not a neutral class of this image");
        }
        if (n.fields.size() != c->decl.fields.size()) rt.fail<KindMismatch>("field count mismatch for `" + cls + "`");
        HeapObject o;
        o.kind = ObjKind::Instance;
        o.class_name = cls;
        for (const auto& f : n.fields) o.slots.push_back(any(f));
        Value v(Ref{y.heap.allocate(std::move(o))});
        hold.hold(v);
        return v;
      }
    }
    return {};
  }
};

}  // namespace

wire::Value DualRuntime::Impl::marshal_value(Isolate& x, const Value& v, MarshalKind kind) {
  Marshaler m{*this, x, {}};
  return m.top(v, kind);
}

Value DualRuntime::Impl::unmarshal_value(Isolate& y, const wire::Value& w, MarshalKind kind) {
  if (kind == MarshalKind::Unit) return Value{};
  if (kind == MarshalKind::Primitive && w.tag() != wire::Tag::Int && w.tag() != wire::Tag::Bool) {
    fail<KindMismatch>("expected a primitive, got " + wire::to_debug_string(w));
  }
  if (kind == MarshalKind::HashRef && w.tag() != wire::Tag::HashRef && !w.is_unit()) {
    fail<KindMismatch>("expected a hash reference, got " + wire::to_debug_string(w));
  }
  Unmarshaler u(*this, y);
  return u.any(w);
}

}  // namespace encpart::runtime

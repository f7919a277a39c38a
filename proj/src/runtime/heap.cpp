#include "encpart/runtime/heap.hpp"

#include "encpart/runtime/errors.hpp"

namespace encpart::runtime {

std::uint64_t object_size(const HeapObject& o) {
  std::uint64_t size = 16 + 8 * o.slots.size();
  for (const auto& s : o.slots) {
    if (s.is_str()) size += s.as_str().size();
  }
  return size;
}

ObjId Heap::allocate(HeapObject o) {
  const ObjId id = next_++;
  pressure_ += object_size(o);
  objects_.emplace(id, std::move(o));
  return id;
}

HeapObject& Heap::at(ObjId id) {
  auto it = objects_.find(id);
  if (it == objects_.end()) throw RuntimeError("dangling reference to object #" + std::to_string(id));
  return it->second;
}

const HeapObject& Heap::at(ObjId id) const {
  auto it = objects_.find(id);
  if (it == objects_.end()) throw RuntimeError("dangling reference to object #" + std::to_string(id));
  return it->second;
}

std::size_t Heap::count(ObjKind kind) const {
  std::size_t n = 0;
  for (const auto& [id, o] : objects_) n += o.kind == kind ? 1 : 0;
  return n;
}

GcStats Heap::collect(const std::vector<ObjId>& roots) {
  std::vector<ObjId> work;
  for (ObjId r : roots) {
    auto it = objects_.find(r);
    if (it != objects_.end() && !it->second.marked) {
      it->second.marked = true;
      work.push_back(r);
    }
  }
  while (!work.empty()) {
    ObjId id = work.back();
    work.pop_back();
    for (const auto& s : objects_.at(id).slots) {
      if (!s.is_ref()) continue;
      auto it = objects_.find(s.as_ref().id);
      if (it != objects_.end() && !it->second.marked) {
        it->second.marked = true;
        work.push_back(it->first);
      }
    }
  }
  GcStats stats;
  for (auto it = objects_.begin(); it != objects_.end();) {
    const std::uint64_t size = object_size(it->second);
    if (it->second.marked) {
      it->second.marked = false;
      ++stats.live_objects;
      stats.live_bytes += size;
      ++it;
    } else {
      ++stats.swept_objects;
      stats.swept_bytes += size;
      stats.swept.push_back(it->first);
      it = objects_.erase(it);
    }
  }
  pressure_ = 0;
  return stats;
}

}  // namespace encpart::runtime

#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

#include "encpart/dsl/ast.hpp"
#include "encpart/partitioner/plan.hpp"

namespace encpart::partitioner {

class UnresolvedCall : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The classes one side is built from: concrete bodies plus generated proxies.
struct ClassSet {
  std::vector<ConcreteClass> concrete;
  std::vector<ProxyClassDef> proxies;
};

// Marshal kind of one source type, given the program's annotations.
MarshalKind marshal_kind_of(const dsl::TypeRef& t, const dsl::Program& program);

ProxyClassDef make_proxy(const dsl::ClassDecl& cls, Direction direction);

// Relays for every public constructor and instance method. A class without
// a declared constructor gets a relay for its implicit no-arg constructor.
std::vector<RelayMethodDef> synthesize_relays(const dsl::ClassDecl& cls, const dsl::Program& program);

// First: trusted classes with relays, neutral copies, OcallProxies for
// every untrusted class. Second: the mirror image for the untrusted side.
std::pair<ClassSet, ClassSet> generate_proxies(const dsl::Program& program);

enum class NodeKind : std::uint8_t { Method, Stub, Relay };

struct Node {
  std::string class_name;
  std::string method;
  NodeKind kind = NodeKind::Method;

  std::string str() const;
  auto operator<=>(const Node&) const = default;
};

struct ReachabilityGraph {
  std::set<Node> nodes;
  std::map<Node, std::set<Node>> edges;
  std::vector<Node> entry_points;
  std::set<Node> reachable;
  // Class names each node's signature or body mentions.
  std::map<Node, std::set<std::string>> type_refs;

  bool is_reachable(const Node& n) const { return reachable.count(n) != 0; }
};

// Nodes for every method, stub and relay of `classes`; edges from each body
// to the targets its calls resolve to, and from each relay to the method it
// wraps. `reachable` is the worklist closure from `entry_points`.
ReachabilityGraph build_call_graph(const ClassSet& classes, const std::vector<Node>& entry_points);

PartitionPlan compute_images(const dsl::Program& program);

}  // namespace encpart::partitioner

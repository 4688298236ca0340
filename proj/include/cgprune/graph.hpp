#pragma once

// Domain model: type hierarchies, method nodes and call graphs.
//
// Both TypeHierarchy and CallGraph are immutable once constructed. Every
// analysis in this library is a pure function over them, so instances may be
// shared freely between reader threads.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cgprune/errors.hpp"

namespace cgprune {

struct MethodSignature {
  std::string name;
  std::vector<std::string> paramTypes;
  std::string returnType;

  auto operator<=>(const MethodSignature&) const = default;
  bool operator==(const MethodSignature&) const = default;
};

/// Renders `name(p1,p2):ret`.
std::string toString(const MethodSignature& sig);
/// Inverse of toString. Throws FormatError.
MethodSignature parseSignature(std::string_view text);

struct MethodSignatureHash {
  std::size_t operator()(const MethodSignature& sig) const noexcept;
};

struct TypeId {
  std::string value;

  auto operator<=>(const TypeId&) const = default;
  bool operator==(const TypeId&) const = default;
};

struct TypeIdHash {
  std::size_t operator()(const TypeId& id) const noexcept {
    return std::hash<std::string>{}(id.value);
  }
};

struct TypeNode {
  TypeId id;
  std::string fqName;
  std::vector<TypeId> parents;
  std::set<MethodSignature> declaredSignatures;
  std::string projectId;
  std::string packageName;
  bool isCoreLib = false;

  bool declares(const MethodSignature& sig) const {
    return declaredSignatures.contains(sig);
  }

  bool operator==(const TypeNode&) const = default;
};

/// Subtype DAG. Construction only indexes; call validateHierarchy() to check
/// the structural invariants.
class TypeHierarchy {
 public:
  TypeHierarchy() = default;
  TypeHierarchy(std::vector<TypeNode> types, std::string coreProjectId);

  const std::string& coreProjectId() const { return coreProjectId_; }
  std::span<const TypeNode> types() const { return types_; }
  std::size_t size() const { return types_.size(); }

  bool contains(const TypeId& id) const { return index_.contains(id); }
  std::optional<std::size_t> find(const TypeId& id) const;
  /// Throws LookupError for unknown ids.
  std::size_t indexOf(const TypeId& id) const;
  const TypeNode& at(const TypeId& id) const { return types_[indexOf(id)]; }
  const TypeNode& at(std::size_t index) const { return types_.at(index); }

  /// Resolved parent indices; dangling parents are skipped.
  std::span<const std::size_t> parentsOf(std::size_t index) const {
    return parents_.at(index);
  }
  std::span<const std::size_t> childrenOf(std::size_t index) const {
    return children_.at(index);
  }

  const TypeNode* findByFqName(std::string_view fqName) const;

  bool operator==(const TypeHierarchy& other) const {
    return coreProjectId_ == other.coreProjectId_ && types_ == other.types_;
  }

 private:
  std::vector<TypeNode> types_;
  std::string coreProjectId_;
  std::unordered_map<TypeId, std::size_t, TypeIdHash> index_;
  std::vector<std::vector<std::size_t>> parents_;
  std::vector<std::vector<std::size_t>> children_;
};

/// Empty iff the hierarchy is well formed: unique ids, resolvable parents,
/// acyclic parent relation, core types in the core project, named signatures.
std::vector<Violation> validateHierarchy(const TypeHierarchy& h);

struct AncestorEntry {
  std::size_t index;
  std::uint32_t depth;  // shortest parent-path length, >= 1
};

/// Strict transitive ancestors in breadth-first order keyed by (depth, typeId).
/// Terminates on cyclic input; each type is listed once at its minimum depth.
std::vector<AncestorEntry> ancestorEntries(const TypeHierarchy& h,
                                           std::size_t index);
std::vector<TypeId> ancestorsOf(const TypeHierarchy& h, const TypeId& t);

/// t == ancestor, or ancestor is a transitive ancestor of t.
bool isReflexiveDescendant(const TypeHierarchy& h, const TypeId& ancestor,
                           const TypeId& t);

/// t itself plus every transitive subtype, ascending by index.
std::vector<std::size_t> reflexiveDescendants(const TypeHierarchy& h,
                                              std::size_t index);

/// Copy of `h` where every type whose package starts with one of `prefixes`
/// is flagged core and moved into the core project.
TypeHierarchy markCorePackages(const TypeHierarchy& h,
                               std::span<const std::string> prefixes);

/// Memoized reflexive-ancestor sets. Not thread-safe; one per analysis.
class AncestorCache {
 public:
  explicit AncestorCache(const TypeHierarchy& h);

  /// Sorted indices of `index` and all its ancestors.
  const std::vector<std::size_t>& reflexiveAncestors(std::size_t index);
  bool isReflexiveAncestor(std::size_t ancestor, std::size_t index);

 private:
  const TypeHierarchy* h_;
  std::vector<std::optional<std::vector<std::size_t>>> cache_;
};

using NodeId = std::uint32_t;

struct MethodNode {
  TypeId definingType;
  MethodSignature signature;

  bool operator==(const MethodNode&) const = default;
};

struct CallEdge {
  NodeId source;
  NodeId target;
  TypeId receiverType;

  bool operator==(const CallEdge&) const = default;
};

/// Method nodes plus unique (source, target, receiverType) edges. Node ids are
/// positions in the node list and survive pruning unchanged.
class CallGraph {
 public:
  CallGraph();
  /// Collapses duplicate edges (first occurrence wins, count kept in
  /// collapsedDuplicates()). Throws ValidationError on dangling endpoints.
  CallGraph(std::vector<MethodNode> nodes, std::vector<CallEdge> edges);

  std::span<const MethodNode> nodes() const { return *nodes_; }
  const MethodNode& node(NodeId id) const { return nodes_->at(id); }
  std::size_t nodeCount() const { return nodes_->size(); }

  std::span<const CallEdge> edges() const { return edges_; }
  std::size_t edgeCount() const { return edges_.size(); }

  std::size_t collapsedDuplicates() const { return duplicates_; }

  /// Graph over the same node storage with `subset` as its edges. The caller
  /// guarantees `subset` is drawn from this graph's edges.
  CallGraph withEdgeSubset(std::vector<CallEdge> subset) const;

  bool sharesNodesWith(const CallGraph& other) const {
    return nodes_ == other.nodes_;
  }

  std::optional<NodeId> findNode(const TypeId& type,
                                 const MethodSignature& sig) const;

  bool operator==(const CallGraph& other) const {
    return *nodes_ == *other.nodes_ && edges_ == other.edges_;
  }

 private:
  std::shared_ptr<const std::vector<MethodNode>> nodes_;
  std::vector<CallEdge> edges_;
  std::size_t duplicates_ = 0;
};

/// Every node's type exists and declares its signature, no duplicate
/// (type, signature) nodes, every receiver type exists.
std::vector<Violation> validateCallGraph(const CallGraph& cg,
                                         const TypeHierarchy& h);

/// Compressed adjacency. One entry per edge, in edge order per node, so the
/// entry count always equals the edge count.
class Adjacency {
 public:
  std::span<const NodeId> neighbors(NodeId node) const {
    return {targets_.data() + offsets_.at(node),
            targets_.data() + offsets_.at(node + 1)};
  }
  std::size_t nodeCount() const { return offsets_.size() - 1; }
  std::size_t edgeCount() const { return targets_.size(); }

 private:
  friend Adjacency forwardAdjacency(const CallGraph& cg);
  friend Adjacency reverseAdjacency(const CallGraph& cg);

  std::vector<std::size_t> offsets_;
  std::vector<NodeId> targets_;
};

/// successors(n) == neighbors(n).
Adjacency forwardAdjacency(const CallGraph& cg);
/// predecessors(n) == neighbors(n).
Adjacency reverseAdjacency(const CallGraph& cg);

}  // namespace cgprune

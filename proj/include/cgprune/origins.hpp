#pragma once

// Origin analysis: map each call target to the declaration where its
// signature first enters the hierarchy, then rank origins by how many edges
// they account for.

#include <cstddef>
#include <map>
#include <set>
#include <vector>

#include "cgprune/graph.hpp"

namespace cgprune {

struct OriginRef {
  TypeId originType;
  MethodSignature signature;

  auto operator<=>(const OriginRef&) const = default;
  bool operator==(const OriginRef&) const = default;
};

/// Raised when a target has more than one minimal first declarer (possible
/// with multiple interface parents). `candidates` is sorted by the same
/// (depth, typeId) key used to pick `chosen`.
struct OriginAmbiguity {
  NodeId target;
  std::vector<TypeId> candidates;

  bool operator==(const OriginAmbiguity&) const = default;
};

struct OriginMap {
  std::map<NodeId, OriginRef> entries;
  std::vector<OriginAmbiguity> ambiguities;

  bool contains(NodeId node) const { return entries.contains(node); }
  /// Throws LookupError when `node` has no entry.
  const OriginRef& at(NodeId node) const;
  std::size_t size() const { return entries.size(); }
};

/// Origins of every distinct edge target of `cg`.
OriginMap findOrigins(const CallGraph& cg, const TypeHierarchy& h);

struct FrequencyRow {
  OriginRef origin;
  std::size_t edgeCount = 0;

  bool operator==(const FrequencyRow&) const = default;
};

struct OriginFrequencyTable {
  std::vector<FrequencyRow> rows;  // edgeCount desc, then origin asc

  std::size_t totalEdges() const;
};

OriginFrequencyTable originEdgeFrequencies(const CallGraph& cg,
                                           const OriginMap& origins);

struct DerivativeRow {
  OriginRef origin;
  std::size_t derivativeCount = 0;

  bool operator==(const DerivativeRow&) const = default;
};

/// Distinct target methods per origin, restricted to targets present in `cg`.
std::vector<DerivativeRow> uniqueDerivativeCounts(const CallGraph& cg,
                                                  const OriginMap& origins);

struct ExclusionList {
  std::map<MethodSignature, std::set<TypeId>> bySignature;
  std::size_t declaredSize = 0;

  bool empty() const { return bySignature.empty(); }
  std::size_t entryCount() const;
  bool contains(const MethodSignature& sig, const TypeId& origin) const;

  bool operator==(const ExclusionList&) const = default;
};

/// The first min(n, rows) origins of `table`, grouped by signature.
ExclusionList buildExclusionList(const OriginFrequencyTable& table,
                                 std::size_t n);

}  // namespace cgprune

#include "cgprune/origins.hpp"

#include <algorithm>
#include <unordered_map>

namespace cgprune {

namespace {

bool rowOrder(const OriginRef& a, std::size_t countA, const OriginRef& b,
              std::size_t countB) {
  if (countA != countB) return countA > countB;
  return a < b;
}

// Memoizes per-type ancestor walks and "does any strict ancestor declare s".
class FirstDeclarerIndex {
 public:
  explicit FirstDeclarerIndex(const TypeHierarchy& h)
      : h_(h), ancestors_(h.size()) {}

  const std::vector<AncestorEntry>& ancestors(std::size_t type) {
    auto& slot = ancestors_[type];
    if (!slot) slot = ancestorEntries(h_, type);
    return *slot;
  }

  bool declaredAbove(std::size_t type, const MethodSignature& sig) {
    auto& perSig = declaredAbove_[sig];
    if (auto it = perSig.find(type); it != perSig.end()) return it->second;
    bool found = false;
    for (const auto& e : ancestors(type)) {
      if (h_.at(e.index).declares(sig)) {
        found = true;
        break;
      }
    }
    perSig.emplace(type, found);
    return found;
  }

 private:
  const TypeHierarchy& h_;
  std::vector<std::optional<std::vector<AncestorEntry>>> ancestors_;
  std::unordered_map<MethodSignature, std::unordered_map<std::size_t, bool>,
                     MethodSignatureHash>
      declaredAbove_;
};

}  // namespace

const OriginRef& OriginMap::at(NodeId node) const {
  auto it = entries.find(node);
  if (it == entries.end()) {
    throw LookupError("no origin recorded for node " + std::to_string(node));
  }
  return it->second;
}

OriginMap findOrigins(const CallGraph& cg, const TypeHierarchy& h) {
  OriginMap out;
  FirstDeclarerIndex index(h);

  for (const auto& edge : cg.edges()) {
    if (out.entries.contains(edge.target)) continue;
    const auto& target = cg.node(edge.target);
    const std::size_t type = h.indexOf(target.definingType);

    // Reflexive ancestors in (depth, typeId) order: the type itself first.
    std::vector<TypeId> firstDeclarers;
    auto consider = [&](std::size_t candidate) {
      if (h.at(candidate).declares(target.signature) &&
          !index.declaredAbove(candidate, target.signature)) {
        firstDeclarers.push_back(h.at(candidate).id);
      }
    };
    consider(type);
    for (const auto& e : index.ancestors(type)) consider(e.index);

    if (firstDeclarers.empty()) {
      throw LookupError("type '" + target.definingType.value +
                        "' does not declare " + toString(target.signature));
    }
    if (firstDeclarers.size() > 1) {
      out.ambiguities.push_back({edge.target, firstDeclarers});
    }
    out.entries.emplace(edge.target,
                        OriginRef{firstDeclarers.front(), target.signature});
  }
  std::sort(out.ambiguities.begin(), out.ambiguities.end(),
            [](const auto& a, const auto& b) { return a.target < b.target; });
  return out;
}

std::size_t OriginFrequencyTable::totalEdges() const {
  std::size_t total = 0;
  for (const auto& r : rows) total += r.edgeCount;
  return total;
}

OriginFrequencyTable originEdgeFrequencies(const CallGraph& cg,
                                           const OriginMap& origins) {
  std::map<OriginRef, std::size_t> counts;
  for (const auto& edge : cg.edges()) {
    ++counts[origins.at(edge.target)];
  }
  OriginFrequencyTable table;
  table.rows.reserve(counts.size());
  for (auto& [origin, count] : counts) table.rows.push_back({origin, count});
  std::stable_sort(table.rows.begin(), table.rows.end(),
                   [](const FrequencyRow& a, const FrequencyRow& b) {
                     return rowOrder(a.origin, a.edgeCount, b.origin,
                                     b.edgeCount);
                   });
  return table;
}

std::vector<DerivativeRow> uniqueDerivativeCounts(const CallGraph& cg,
                                                  const OriginMap& origins) {
  std::vector<bool> isTarget(cg.nodeCount(), false);
  for (const auto& edge : cg.edges()) isTarget[edge.target] = true;

  std::map<OriginRef, std::size_t> counts;
  for (NodeId n = 0; n < cg.nodeCount(); ++n) {
    if (isTarget[n]) ++counts[origins.at(n)];
  }
  std::vector<DerivativeRow> rows;
  rows.reserve(counts.size());
  for (auto& [origin, count] : counts) rows.push_back({origin, count});
  std::stable_sort(rows.begin(), rows.end(),
                   [](const DerivativeRow& a, const DerivativeRow& b) {
                     return rowOrder(a.origin, a.derivativeCount, b.origin,
                                     b.derivativeCount);
                   });
  return rows;
}

std::size_t ExclusionList::entryCount() const {
  std::size_t n = 0;
  for (const auto& [sig, types] : bySignature) n += types.size();
  return n;
}

bool ExclusionList::contains(const MethodSignature& sig,
                             const TypeId& origin) const {
  auto it = bySignature.find(sig);
  return it != bySignature.end() && it->second.contains(origin);
}

ExclusionList buildExclusionList(const OriginFrequencyTable& table,
                                 std::size_t n) {
  ExclusionList list;
  list.declaredSize = n;
  const auto take = std::min(n, table.rows.size());
  for (std::size_t i = 0; i < take; ++i) {
    const auto& origin = table.rows[i].origin;
    list.bySignature[origin.signature].insert(origin.originType);
  }
  return list;
}

}  // namespace cgprune

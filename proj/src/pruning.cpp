#include "cgprune/pruning.hpp"

#include <stdexcept>

namespace cgprune {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

PruneResult finish(const CallGraph& cg, std::vector<CallEdge> kept,
                   std::size_t candidates, std::size_t failures,
                   std::chrono::steady_clock::time_point start) {
  PruneResult r;
  r.originalEdges = cg.edgeCount();
  r.candidateEdges = candidates;
  r.prunedEdges = cg.edgeCount() - kept.size();
  r.oracleFailures = failures;
  r.reductionRatio =
      cg.edgeCount() == 0 ? 0.0
                          : static_cast<double>(r.prunedEdges) /
                                static_cast<double>(cg.edgeCount());
  r.prunedGraph = cg.withEdgeSubset(std::move(kept));
  r.elapsed = std::chrono::duration_cast<std::chrono::nanoseconds>(
      std::chrono::steady_clock::now() - start);
  return r;
}

/// One flag per node: is an edge into this node a prune candidate.
std::vector<std::uint8_t> candidateTargets(const CallGraph& cg,
                                           const ExclusionIndex& index) {
  std::vector<std::uint8_t> flags(cg.nodeCount(), 0);
  for (NodeId n = 0; n < cg.nodeCount(); ++n) {
    flags[n] = index.excludes(cg.node(n)) ? 1 : 0;
  }
  return flags;
}

}  // namespace

PruneDecision FixedTableOracle::decide(const CallEdge& edge,
                                       const EdgeContext&) const {
  auto it = table_.find({edge.source, edge.target, edge.receiverType.value});
  return it == table_.end() ? fallback_ : it->second;
}

HashedOracle::HashedOracle(std::uint64_t seed, double pruneFraction,
                           double confidence)
    : seed_(seed), pruneFraction_(pruneFraction), confidence_(confidence) {
  if (pruneFraction < 0.0 || pruneFraction > 1.0 || confidence < 0.0 ||
      confidence > 1.0) {
    throw std::invalid_argument("HashedOracle: fraction and confidence must lie in [0,1]");
  }
}

PruneDecision HashedOracle::decide(const CallEdge& edge,
                                   const EdgeContext&) const {
  std::uint64_t x = splitmix64(seed_ ^ edge.source);
  x = splitmix64(x ^ edge.target);
  x = splitmix64(x ^ std::hash<std::string>{}(edge.receiverType.value));
  const double u = static_cast<double>(x >> 11) * 0x1.0p-53;
  return {u < pruneFraction_ ? Verdict::Prune : Verdict::Keep, confidence_};
}

ExclusionIndex::ExclusionIndex(const ExclusionList& excl,
                               const TypeHierarchy& h)
    : h_(&h) {
  for (const auto& [sig, origins] : excl.bySignature) {
    auto& mask = excluded_[sig];
    mask.assign(h.size(), false);
    for (const auto& origin : origins) {
      for (auto d : reflexiveDescendants(h, h.indexOf(origin))) mask[d] = true;
    }
  }
}

bool ExclusionIndex::excludes(const MethodSignature& sig,
                              std::size_t typeIndex) const {
  auto it = excluded_.find(sig);
  return it != excluded_.end() && it->second.at(typeIndex);
}

bool ExclusionIndex::excludes(const MethodNode& target) const {
  if (excluded_.empty()) return false;
  auto it = excluded_.find(target.signature);
  if (it == excluded_.end()) return false;
  return it->second[h_->indexOf(target.definingType)];
}

bool notExcluded(const ExclusionList& excl, const MethodSignature& targetSig,
                 const TypeId& targetType, const TypeHierarchy& h) {
  auto it = excl.bySignature.find(targetSig);
  h.indexOf(targetType);  // unknown target type is a lookup error either way
  if (it == excl.bySignature.end()) return true;
  for (const auto& origin : it->second) {
    if (isReflexiveDescendant(h, origin, targetType)) return false;
  }
  return true;
}

PruneResult pruneExhaustive(const CallGraph& cg, const ExclusionList& excl,
                            const TypeHierarchy& h) {
  const auto start = std::chrono::steady_clock::now();
  const auto candidate = candidateTargets(cg, ExclusionIndex(excl, h));
  std::vector<CallEdge> kept;
  kept.reserve(cg.edgeCount());
  std::size_t candidates = 0;
  for (const auto& e : cg.edges()) {
    if (candidate[e.target]) {
      ++candidates;
    } else {
      kept.push_back(e);
    }
  }
  return finish(cg, std::move(kept), candidates, 0, start);
}

PruneResult pruneSelective(const CallGraph& cg, const ExclusionList& excl,
                           const TypeHierarchy& h,
                           const PruneDecisionOracle& oracle, double threshold,
                           const std::map<std::string, std::string>& features) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw std::invalid_argument("pruning threshold must lie in [0,1]");
  }
  const auto start = std::chrono::steady_clock::now();
  const auto candidate = candidateTargets(cg, ExclusionIndex(excl, h));
  std::vector<CallEdge> kept;
  kept.reserve(cg.edgeCount());
  std::size_t candidates = 0;
  std::size_t failures = 0;
  for (const auto& e : cg.edges()) {
    if (!candidate[e.target]) {
      kept.push_back(e);
      continue;
    }
    ++candidates;
    bool prune = false;
    try {
      const auto d =
          oracle.decide(e, {cg.node(e.source), cg.node(e.target), features});
      prune = d.verdict == Verdict::Prune && d.confidence > threshold;
    } catch (const std::exception&) {
      ++failures;
    }
    if (!prune) kept.push_back(e);
  }
  return finish(cg, std::move(kept), candidates, failures, start);
}

}  // namespace cgprune

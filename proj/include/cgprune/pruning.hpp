#pragma once

// Origin-guided call graph pruning. An edge is a prune candidate when its
// target's signature is on the exclusion list and the target's defining type
// is a reflexive descendant of one of the listed origin types.

#include <chrono>
#include <cstdint>
#include <map>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "cgprune/graph.hpp"
#include "cgprune/origins.hpp"

namespace cgprune {

enum class Verdict { Keep, Prune };

struct PruneDecision {
  Verdict verdict = Verdict::Keep;
  double confidence = 0.0;  // in [0, 1]
};

/// What an oracle may look at for one edge. `features` is an open slot for
/// source text or structural features supplied by the caller.
struct EdgeContext {
  const MethodNode& source;
  const MethodNode& target;
  const std::map<std::string, std::string>& features;
};

/// Per-edge pruning decision. Implementations must be deterministic for a
/// given instance and input; decide() may throw, which keeps the edge.
class PruneDecisionOracle {
 public:
  virtual ~PruneDecisionOracle() = default;
  virtual PruneDecision decide(const CallEdge& edge,
                               const EdgeContext& context) const = 0;
};

class KeepAllOracle final : public PruneDecisionOracle {
 public:
  PruneDecision decide(const CallEdge&, const EdgeContext&) const override {
    return {Verdict::Keep, 1.0};
  }
};

class PruneAllOracle final : public PruneDecisionOracle {
 public:
  explicit PruneAllOracle(double confidence = 1.0) : confidence_(confidence) {}
  PruneDecision decide(const CallEdge&, const EdgeContext&) const override {
    return {Verdict::Prune, confidence_};
  }

 private:
  double confidence_;
};

/// Looks decisions up by (source, target, receiverType); unlisted edges get
/// `fallback`.
class FixedTableOracle final : public PruneDecisionOracle {
 public:
  using Key = std::tuple<NodeId, NodeId, std::string>;

  explicit FixedTableOracle(std::map<Key, PruneDecision> table,
                            PruneDecision fallback = {Verdict::Keep, 1.0})
      : table_(std::move(table)), fallback_(fallback) {}

  PruneDecision decide(const CallEdge& edge,
                       const EdgeContext& context) const override;

 private:
  std::map<Key, PruneDecision> table_;
  PruneDecision fallback_;
};

/// Prunes a seeded pseudo-random fraction of the edges it is asked about. The
/// decision is a pure hash of (seed, edge), so it is order-independent.
class HashedOracle final : public PruneDecisionOracle {
 public:
  HashedOracle(std::uint64_t seed, double pruneFraction, double confidence);

  PruneDecision decide(const CallEdge& edge,
                       const EdgeContext& context) const override;

 private:
  std::uint64_t seed_;
  double pruneFraction_;
  double confidence_;
};

struct PruneResult {
  CallGraph prunedGraph;
  std::size_t originalEdges = 0;
  std::size_t candidateEdges = 0;
  std::size_t prunedEdges = 0;
  std::size_t oracleFailures = 0;
  double reductionRatio = 0.0;  // prunedEdges / originalEdges
  std::chrono::nanoseconds elapsed{0};
};

/// Resolves an exclusion list against a hierarchy once: for every listed
/// signature, the set of types whose declaration of it is excluded.
class ExclusionIndex {
 public:
  /// Throws LookupError for origin types missing from `h`.
  ExclusionIndex(const ExclusionList& excl, const TypeHierarchy& h);

  bool excludes(const MethodSignature& sig, std::size_t typeIndex) const;
  /// Throws LookupError for unknown types.
  bool excludes(const MethodNode& target) const;

 private:
  const TypeHierarchy* h_;
  std::unordered_map<MethodSignature, std::vector<bool>, MethodSignatureHash>
      excluded_;
};

/// True when the (signature, type) target survives the exclusion list.
bool notExcluded(const ExclusionList& excl, const MethodSignature& targetSig,
                 const TypeId& targetType, const TypeHierarchy& h);

PruneResult pruneExhaustive(const CallGraph& cg, const ExclusionList& excl,
                            const TypeHierarchy& h);

/// Prunes a candidate only when `oracle` votes Prune with confidence strictly
/// above `threshold`. Throws std::invalid_argument for threshold outside [0,1].
PruneResult pruneSelective(
    const CallGraph& cg, const ExclusionList& excl, const TypeHierarchy& h,
    const PruneDecisionOracle& oracle, double threshold,
    const std::map<std::string, std::string>& features = {});

}  // namespace cgprune

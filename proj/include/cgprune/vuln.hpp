#pragma once

// Artificial vulnerability injection and reverse-reachability propagation.

#include <chrono>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cgprune/graph.hpp"

namespace cgprune {

struct ProjectRoleMap {
  std::string applicationProjectId;
  bool excludeCoreFromPool = true;

  bool isApplicationNode(const MethodNode& node, const TypeHierarchy& h) const;
  /// Dependency node that may receive an artificial vulnerability.
  bool isEligible(const MethodNode& node, const TypeHierarchy& h) const;
};

struct VulnerabilityAssignment {
  std::vector<NodeId> vulnerableNodes;  // ascending
  std::uint64_t seed = 0;
  std::size_t requestedCount = 0;

  /// Stable digest of the node set, used to pair base and pruned results.
  std::uint64_t fingerprint() const;

  bool operator==(const VulnerabilityAssignment&) const = default;
};

/// Samples min(k, eligible) dependency nodes without replacement. Eligible
/// nodes are put in canonical (definingType, signature) order and shuffled
/// with a partial Fisher-Yates driven by std::mt19937_64(seed). Throws Error
/// when no node is eligible and std::invalid_argument when k == 0.
VulnerabilityAssignment injectArtificialCves(const CallGraph& cg,
                                             const TypeHierarchy& h,
                                             const ProjectRoleMap& roles,
                                             std::size_t k, std::uint64_t seed);

struct ReachablePair {
  NodeId application;
  NodeId vulnerable;
  std::vector<NodeId> witness;  // application ... vulnerable, along edges
};

struct PropagationOptions {
  std::size_t warmupRuns = 0;
  std::size_t repetitions = 1;
  bool materializeWitnesses = false;
};

struct ReachabilityResult {
  std::size_t reachablePairs = 0;
  std::size_t reachedVulnerable = 0;
  std::size_t vulnerableCount = 0;
  double reachableVulnFraction = 0.0;
  std::chrono::nanoseconds elapsed{0};  // mean over repetitions
  std::uint64_t assignmentFingerprint = 0;
  std::vector<ReachablePair> pairs;  // only with materializeWitnesses
};

/// One reverse BFS per vulnerable node. Timing covers the traversals only,
/// after `warmupRuns` untimed runs, averaged over `repetitions`.
ReachabilityResult propagate(const CallGraph& cg, const TypeHierarchy& h,
                             const VulnerabilityAssignment& assignment,
                             const ProjectRoleMap& roles,
                             const PropagationOptions& options = {});

/// True when `path` starts at `from`, ends at `to`, and each hop is an edge.
bool isWitnessPath(const CallGraph& cg, std::span<const NodeId> path,
                   NodeId from, NodeId to);

struct DeltaReport {
  std::int64_t pairDelta = 0;
  double fractionDelta = 0.0;
  std::chrono::nanoseconds elapsedDelta{0};
  double speedup = 1.0;  // base.elapsed / pruned.elapsed
};

/// Throws Error when the two results come from different assignments.
DeltaReport compare(const ReachabilityResult& base,
                    const ReachabilityResult& pruned);

}  // namespace cgprune

#include "cgprune/vuln.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

namespace cgprune {

namespace {

// Unbiased draw in [0, bound) from the raw 64-bit stream; std::uniform_int_
// distribution is not specified bit-for-bit across standard libraries.
std::uint64_t uniformBelow(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit =
      std::numeric_limits<std::uint64_t>::max() -
      std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

struct Traversal {
  std::size_t pairs = 0;
  std::size_t reached = 0;
  std::vector<ReachablePair> witnesses;
};

Traversal traverse(const Adjacency& reversed, const std::vector<bool>& isApp,
                   std::span<const NodeId> vulnerable, bool withWitnesses) {
  constexpr NodeId kNone = std::numeric_limits<NodeId>::max();
  const auto n = reversed.nodeCount();
  std::vector<std::uint32_t> visitedEpoch(n, 0);
  std::vector<NodeId> next(withWitnesses ? n : 0, kNone);
  std::vector<NodeId> queue;
  queue.reserve(n);
  Traversal out;
  std::uint32_t epoch = 0;

  for (NodeId v : vulnerable) {
    ++epoch;
    queue.clear();
    queue.push_back(v);
    visitedEpoch[v] = epoch;
    if (withWitnesses) next[v] = kNone;
    std::size_t appReachers = 0;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const NodeId cur = queue[head];
      if (isApp[cur]) {
        ++appReachers;
        if (withWitnesses) {
          ReachablePair pair{cur, v, {}};
          for (NodeId p = cur; p != kNone; p = next[p]) {
            pair.witness.push_back(p);
          }
          out.witnesses.push_back(std::move(pair));
        }
      }
      for (NodeId pred : reversed.neighbors(cur)) {
        if (visitedEpoch[pred] != epoch) {
          visitedEpoch[pred] = epoch;
          if (withWitnesses) next[pred] = cur;
          queue.push_back(pred);
        }
      }
    }
    out.pairs += appReachers;
    if (appReachers > 0) ++out.reached;
  }
  return out;
}

}  // namespace

bool ProjectRoleMap::isApplicationNode(const MethodNode& node,
                                       const TypeHierarchy& h) const {
  const auto& t = h.at(node.definingType);
  return !t.isCoreLib && t.projectId == applicationProjectId;
}

bool ProjectRoleMap::isEligible(const MethodNode& node,
                                const TypeHierarchy& h) const {
  const auto& t = h.at(node.definingType);
  if (t.isCoreLib) return !excludeCoreFromPool;
  return t.projectId != applicationProjectId;
}

std::uint64_t VulnerabilityAssignment::fingerprint() const {
  std::uint64_t x = 0xcbf29ce484222325ULL;  // FNV-1a over node ids
  for (NodeId n : vulnerableNodes) {
    for (int i = 0; i < 4; ++i) {
      x ^= (n >> (8 * i)) & 0xffU;
      x *= 0x100000001b3ULL;
    }
  }
  return x;
}

VulnerabilityAssignment injectArtificialCves(const CallGraph& cg,
                                             const TypeHierarchy& h,
                                             const ProjectRoleMap& roles,
                                             std::size_t k, std::uint64_t seed) {
  if (k == 0) throw std::invalid_argument("requested CVE count must be positive");
  std::vector<NodeId> pool;
  for (NodeId n = 0; n < cg.nodeCount(); ++n) {
    if (roles.isEligible(cg.node(n), h)) pool.push_back(n);
  }
  if (pool.empty()) {
    throw Error("no dependency nodes eligible for vulnerability injection "
                "(application project '" + roles.applicationProjectId + "')");
  }
  std::sort(pool.begin(), pool.end(), [&](NodeId a, NodeId b) {
    const auto& na = cg.node(a);
    const auto& nb = cg.node(b);
    if (na.definingType != nb.definingType) {
      return na.definingType < nb.definingType;
    }
    if (na.signature != nb.signature) return na.signature < nb.signature;
    return a < b;
  });

  std::mt19937_64 rng(seed);
  const std::size_t take = std::min(k, pool.size());
  for (std::size_t i = 0; i < take; ++i) {
    auto j = i + uniformBelow(rng, pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  VulnerabilityAssignment out;
  out.vulnerableNodes.assign(pool.begin(), pool.begin() + take);
  std::sort(out.vulnerableNodes.begin(), out.vulnerableNodes.end());
  out.seed = seed;
  out.requestedCount = k;
  return out;
}

ReachabilityResult propagate(const CallGraph& cg, const TypeHierarchy& h,
                             const VulnerabilityAssignment& assignment,
                             const ProjectRoleMap& roles,
                             const PropagationOptions& options) {
  for (NodeId v : assignment.vulnerableNodes) {
    if (v >= cg.nodeCount()) {
      throw LookupError("vulnerable node " + std::to_string(v) +
                        " is not in the graph");
    }
  }
  std::vector<bool> isApp(cg.nodeCount());
  for (NodeId n = 0; n < cg.nodeCount(); ++n) {
    isApp[n] = roles.isApplicationNode(cg.node(n), h);
  }
  const Adjacency reversed = reverseAdjacency(cg);

  for (std::size_t i = 0; i < options.warmupRuns; ++i) {
    traverse(reversed, isApp, assignment.vulnerableNodes, false);
  }
  const std::size_t reps = std::max<std::size_t>(1, options.repetitions);
  std::chrono::nanoseconds total{0};
  Traversal last;
  for (std::size_t i = 0; i < reps; ++i) {
    const bool witnesses = options.materializeWitnesses && i + 1 == reps;
    const auto start = std::chrono::steady_clock::now();
    last = traverse(reversed, isApp, assignment.vulnerableNodes, witnesses);
    total += std::chrono::duration_cast<std::chrono::nanoseconds>(
        std::chrono::steady_clock::now() - start);
  }

  ReachabilityResult r;
  r.reachablePairs = last.pairs;
  r.reachedVulnerable = last.reached;
  r.vulnerableCount = assignment.vulnerableNodes.size();
  r.reachableVulnFraction =
      r.vulnerableCount == 0 ? 0.0
                             : static_cast<double>(r.reachedVulnerable) /
                                   static_cast<double>(r.vulnerableCount);
  r.elapsed = total / static_cast<std::int64_t>(reps);
  r.assignmentFingerprint = assignment.fingerprint();
  r.pairs = std::move(last.witnesses);
  return r;
}

bool isWitnessPath(const CallGraph& cg, std::span<const NodeId> path,
                   NodeId from, NodeId to) {
  if (path.empty() || path.front() != from || path.back() != to) return false;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    const bool hop = std::any_of(
        cg.edges().begin(), cg.edges().end(), [&](const CallEdge& e) {
          return e.source == path[i] && e.target == path[i + 1];
        });
    if (!hop) return false;
  }
  return true;
}

DeltaReport compare(const ReachabilityResult& base,
                    const ReachabilityResult& pruned) {
  if (base.assignmentFingerprint != pruned.assignmentFingerprint ||
      base.vulnerableCount != pruned.vulnerableCount) {
    throw Error("cannot compare reachability results from different "
                "vulnerability assignments");
  }
  DeltaReport d;
  d.pairDelta = static_cast<std::int64_t>(pruned.reachablePairs) -
                static_cast<std::int64_t>(base.reachablePairs);
  d.fractionDelta = pruned.reachableVulnFraction - base.reachableVulnFraction;
  d.elapsedDelta = pruned.elapsed - base.elapsed;
  if (pruned.elapsed.count() > 0) {
    d.speedup = static_cast<double>(base.elapsed.count()) /
                static_cast<double>(pruned.elapsed.count());
  } else if (base.elapsed.count() > 0) {
    d.speedup = std::numeric_limits<double>::infinity();
  }
  return d;
}

}  // namespace cgprune

#pragma once

// Localness levels: how far a method's outgoing calls escape its own code.
//
//   CoreOnly      (0) calls nothing, or only core-library methods
//   SameHierarchy (1) calls non-core code inside its class hierarchy
//   SameProject   (2) leaves the hierarchy but stays in its project
//   CrossProject  (3) leaves the hierarchy into another project

#include <array>
#include <cstdint>
#include <vector>

#include "cgprune/graph.hpp"
#include "cgprune/origins.hpp"

namespace cgprune {

enum class LocalnessLevel : std::uint8_t {
  CoreOnly = 0,
  SameHierarchy = 1,
  SameProject = 2,
  CrossProject = 3,
};

inline int toInt(LocalnessLevel level) { return static_cast<int>(level); }

enum class HierarchyRule {
  /// Same type, or one is a reflexive ancestor of the other.
  Strict,
  /// Strict, or both types share a non-core (reflexive) ancestor.
  SharedNonCoreAncestor,
};

enum class ProjectBoundary {
  Project,
  Package,
};

struct LocalnessOptions {
  HierarchyRule hierarchyRule = HierarchyRule::SharedNonCoreAncestor;
  ProjectBoundary boundary = ProjectBoundary::Project;
};

LocalnessLevel categorize(NodeId method, const CallGraph& cg,
                          const TypeHierarchy& h,
                          const LocalnessOptions& options = {});

/// Level of every node, indexed by NodeId.
std::vector<LocalnessLevel> labelAll(const CallGraph& cg, const TypeHierarchy& h,
                                     const LocalnessOptions& options = {});

struct DistributionRow {
  OriginRef origin;
  std::size_t derivativeCount = 0;
  std::array<double, 4> frequency{};  // all zero when derivativeCount == 0

  bool empty() const { return derivativeCount == 0; }
};

struct LocalnessDistribution {
  std::vector<DistributionRow> rows;  // in the order of the requested origins
};

LocalnessDistribution localnessDistribution(
    const OriginMap& origins, const std::vector<LocalnessLevel>& labels,
    const std::vector<OriginRef>& topOrigins);

}  // namespace cgprune

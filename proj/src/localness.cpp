#include "cgprune/localness.hpp"

#include <algorithm>
#include <map>

namespace cgprune {

namespace {

class Classifier {
 public:
  Classifier(const CallGraph& cg, const TypeHierarchy& h,
             const LocalnessOptions& options)
      : h_(h), options_(options), ancestors_(h) {
    typeIndex_.reserve(cg.nodeCount());
    for (const auto& n : cg.nodes()) {
      typeIndex_.push_back(h.indexOf(n.definingType));
    }
  }

  template <typename Targets>
  LocalnessLevel categorize(NodeId method, const Targets& targets) {
    const std::size_t own = typeIndex_.at(method);
    if (h_.at(own).isCoreLib) return LocalnessLevel::CoreOnly;

    int label = 0;
    for (NodeId target : targets) {
      const std::size_t other = typeIndex_.at(target);
      if (h_.at(other).isCoreLib) continue;
      if (label < 2 && sameHierarchy(own, other)) {
        label = 1;
      } else if (sameBoundary(own, other)) {
        label = 2;
      } else {
        label = 3;
        break;
      }
    }
    return static_cast<LocalnessLevel>(label);
  }

 private:
  bool sameHierarchy(std::size_t a, std::size_t b) {
    if (a == b || ancestors_.isReflexiveAncestor(a, b) ||
        ancestors_.isReflexiveAncestor(b, a)) {
      return true;
    }
    if (options_.hierarchyRule == HierarchyRule::Strict) return false;
    const auto& ra = ancestors_.reflexiveAncestors(a);
    const auto& rb = ancestors_.reflexiveAncestors(b);
    // Both sorted; look for a shared non-core member.
    auto ia = ra.begin();
    auto ib = rb.begin();
    while (ia != ra.end() && ib != rb.end()) {
      if (*ia < *ib) {
        ++ia;
      } else if (*ib < *ia) {
        ++ib;
      } else {
        if (!h_.at(*ia).isCoreLib) return true;
        ++ia;
        ++ib;
      }
    }
    return false;
  }

  bool sameBoundary(std::size_t a, std::size_t b) const {
    const auto& ta = h_.at(a);
    const auto& tb = h_.at(b);
    if (options_.boundary == ProjectBoundary::Package) {
      return ta.packageName == tb.packageName;
    }
    return ta.projectId == tb.projectId;
  }

  const TypeHierarchy& h_;
  LocalnessOptions options_;
  AncestorCache ancestors_;
  std::vector<std::size_t> typeIndex_;
};

}  // namespace

LocalnessLevel categorize(NodeId method, const CallGraph& cg,
                          const TypeHierarchy& h,
                          const LocalnessOptions& options) {
  if (method >= cg.nodeCount()) {
    throw LookupError("node " + std::to_string(method) + " is not in the graph");
  }
  std::vector<NodeId> targets;
  for (const auto& e : cg.edges()) {
    if (e.source == method) targets.push_back(e.target);
  }
  Classifier classifier(cg, h, options);
  return classifier.categorize(method, targets);
}

std::vector<LocalnessLevel> labelAll(const CallGraph& cg, const TypeHierarchy& h,
                                     const LocalnessOptions& options) {
  Classifier classifier(cg, h, options);
  const auto successors = forwardAdjacency(cg);
  std::vector<LocalnessLevel> labels;
  labels.reserve(cg.nodeCount());
  for (NodeId n = 0; n < cg.nodeCount(); ++n) {
    labels.push_back(classifier.categorize(n, successors.neighbors(n)));
  }
  return labels;
}

LocalnessDistribution localnessDistribution(
    const OriginMap& origins, const std::vector<LocalnessLevel>& labels,
    const std::vector<OriginRef>& topOrigins) {
  std::map<OriginRef, std::array<std::size_t, 4>> counts;
  for (const auto& origin : topOrigins) counts.try_emplace(origin);
  for (const auto& [node, origin] : origins.entries) {
    auto it = counts.find(origin);
    if (it == counts.end()) continue;
    if (node >= labels.size()) {
      throw LookupError("no localness label for node " + std::to_string(node));
    }
    ++it->second[toInt(labels[node])];
  }

  LocalnessDistribution out;
  out.rows.reserve(topOrigins.size());
  for (const auto& origin : topOrigins) {
    const auto& c = counts.at(origin);
    DistributionRow row{origin, c[0] + c[1] + c[2] + c[3], {}};
    if (!row.empty()) {
      for (int level = 0; level < 4; ++level) {
        row.frequency[level] = static_cast<double>(c[level]) /
                               static_cast<double>(row.derivativeCount);
      }
    }
    out.rows.push_back(row);
  }
  return out;
}

}  // namespace cgprune

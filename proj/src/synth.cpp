#include "cgprune/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <stdexcept>

namespace cgprune {

namespace {

std::uint64_t below(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
  const std::uint64_t limit = max - max % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

double unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::string typeIdFor(std::size_t index, std::size_t count) {
  std::size_t width = 4;
  for (std::size_t n = count; n >= 10000; n /= 10) ++width;
  std::string digits = std::to_string(index);
  return "T" + std::string(width > digits.size() ? width - digits.size() : 0, '0') +
         digits;
}

MethodSignature poolSignature(std::size_t j) {
  MethodSignature sig;
  sig.name = "m" + std::to_string(j);
  switch (j % 3) {
    case 1: sig.paramTypes = {"java.lang.Object"}; break;
    case 2: sig.paramTypes = {"int", "java.lang.Object"}; break;
    default: break;
  }
  sig.returnType = "java.lang.Object";
  return sig;
}

constexpr std::uint64_t kGraphStream = 0x9e3779b97f4a7c15ULL;

}  // namespace

void GenParams::validate() const {
  auto fail = [](const std::string& what) {
    throw std::invalid_argument("invalid generator parameters: " + what);
  };
  if (typeCount == 0) fail("typeCount must be positive");
  if (maxParentsPerType == 0) fail("maxParentsPerType must be positive");
  if (signaturePoolSize == 0) fail("signaturePoolSize must be positive");
  if (projectCount == 0) fail("projectCount must be positive");
  if (callSitesPerMethod.min > callSitesPerMethod.max) {
    fail("callSitesPerMethod min exceeds max");
  }
  auto prob = [&](double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) fail(std::string(name) + " must lie in [0,1]");
  };
  prob(overrideProbability, "overrideProbability");
  prob(freshDeclarationProbability, "freshDeclarationProbability");
  prob(coreTypeFraction, "coreTypeFraction");
}

TypeHierarchy generateHierarchy(const GenParams& p) {
  p.validate();
  std::mt19937_64 rng(p.seed);
  const auto coreCount = static_cast<std::size_t>(
      std::llround(p.coreTypeFraction * static_cast<double>(p.typeCount)));

  std::vector<MethodSignature> pool;
  for (std::size_t j = 0; j < p.signaturePoolSize; ++j) {
    pool.push_back(poolSignature(j));
  }

  std::vector<TypeNode> types;
  types.reserve(p.typeCount);
  // visible[i][j]: type i or one of its ancestors declares pool[j].
  std::vector<std::vector<bool>> visible;
  visible.reserve(p.typeCount);

  for (std::size_t i = 0; i < p.typeCount; ++i) {
    TypeNode t;
    t.id = TypeId{typeIdFor(i, p.typeCount)};
    t.isCoreLib = i < coreCount;
    const auto bucket = below(rng, 3);
    if (t.isCoreLib) {
      t.projectId = kSyntheticCoreProject;
      t.packageName = "jre.pkg" + std::to_string(bucket);
    } else {
      t.projectId = "p" + std::to_string(below(rng, p.projectCount));
      t.packageName = "gen." + t.projectId + ".pkg" + std::to_string(bucket);
    }
    t.fqName = t.packageName + ".C" + std::to_string(i);

    std::vector<std::size_t> parents;
    if (i > 0) {
      const auto want = 1 + below(rng, std::min(p.maxParentsPerType, i));
      while (parents.size() < want) {
        const auto candidate = below(rng, i);
        if (std::find(parents.begin(), parents.end(), candidate) ==
            parents.end()) {
          parents.push_back(candidate);
        }
      }
    }
    std::vector<bool> inherited(pool.size(), false);
    for (auto parent : parents) {
      t.parents.push_back(types[parent].id);
      for (std::size_t j = 0; j < pool.size(); ++j) {
        if (visible[parent][j]) inherited[j] = true;
      }
    }

    std::vector<bool> mine = inherited;
    for (std::size_t j = 0; j < pool.size(); ++j) {
      const double chance =
          inherited[j] ? p.overrideProbability : p.freshDeclarationProbability;
      if (unit(rng) < chance) {
        t.declaredSignatures.insert(pool[j]);
        mine[j] = true;
      }
    }
    visible.push_back(std::move(mine));
    types.push_back(std::move(t));
  }
  return TypeHierarchy(std::move(types), kSyntheticCoreProject);
}

CallGraph generateCallGraphCHA(const TypeHierarchy& h, const GenParams& p) {
  p.validate();
  std::mt19937_64 rng(p.seed ^ kGraphStream);

  std::vector<MethodNode> nodes;
  std::map<std::pair<std::size_t, MethodSignature>, NodeId> byTypeSig;
  for (std::size_t t = 0; t < h.size(); ++t) {
    for (const auto& sig : h.at(t).declaredSignatures) {
      byTypeSig.emplace(std::make_pair(t, sig), static_cast<NodeId>(nodes.size()));
      nodes.push_back({h.at(t).id, sig});
    }
  }
  std::vector<std::size_t> nodeType;
  nodeType.reserve(nodes.size());
  for (const auto& n : nodes) nodeType.push_back(h.indexOf(n.definingType));

  // expansion[n]: targets of a call site whose receiver/signature is node n.
  std::vector<std::optional<std::vector<NodeId>>> expansion(nodes.size());
  std::vector<std::uint32_t> seenEpoch(h.size(), 0);
  std::uint32_t epoch = 0;
  std::vector<std::size_t> cone;
  auto expand = [&](NodeId site) -> const std::vector<NodeId>& {
    auto& slot = expansion[site];
    if (!slot) {
      ++epoch;
      cone.assign(1, nodeType[site]);
      seenEpoch[nodeType[site]] = epoch;
      for (std::size_t i = 0; i < cone.size(); ++i) {
        for (auto c : h.childrenOf(cone[i])) {
          if (seenEpoch[c] != epoch) {
            seenEpoch[c] = epoch;
            cone.push_back(c);
          }
        }
      }
      std::sort(cone.begin(), cone.end());
      std::vector<NodeId> targets;
      const auto& sig = nodes[site].signature;
      for (auto d : cone) {
        if (!h.at(d).declares(sig)) continue;
        targets.push_back(byTypeSig.at({d, sig}));
      }
      slot = std::move(targets);
    }
    return *slot;
  };

  std::vector<CallEdge> edges;
  const auto n = nodes.size();
  const auto span = p.callSitesPerMethod.max - p.callSitesPerMethod.min + 1;
  for (NodeId caller = 0; caller < n; ++caller) {
    auto sites = std::min<std::size_t>(
        p.callSitesPerMethod.min + below(rng, span), n);
    std::vector<NodeId> chosen;
    while (chosen.size() < sites) {
      const auto pick = static_cast<NodeId>(below(rng, n));
      if (std::find(chosen.begin(), chosen.end(), pick) == chosen.end()) {
        chosen.push_back(pick);
      }
    }
    for (NodeId site : chosen) {
      const auto& receiver = nodes[site].definingType;
      for (NodeId target : expand(site)) {
        edges.push_back({caller, target, receiver});
      }
    }
  }
  return CallGraph(std::move(nodes), std::move(edges));
}

OriginMap bruteForceOrigins(const CallGraph& cg, const TypeHierarchy& h) {
  const std::size_t n = h.size();
  constexpr std::size_t kInf = std::numeric_limits<std::size_t>::max() / 4;
  // dist[a * n + b]: fewest parent hops from a up to b.
  std::vector<std::size_t> dist(n * n, kInf);
  for (std::size_t a = 0; a < n; ++a) {
    dist[a * n + a] = 0;
    for (const auto& parent : h.at(a).parents) {
      if (auto b = h.find(parent); b && *b != a) {
        dist[a * n + *b] = 1;
      }
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t a = 0; a < n; ++a) {
      if (dist[a * n + k] == kInf) continue;
      for (std::size_t b = 0; b < n; ++b) {
        const auto via = dist[a * n + k] + dist[k * n + b];
        if (via < dist[a * n + b]) dist[a * n + b] = via;
      }
    }
  }

  auto isFirstDeclarer = [&](std::size_t x, const MethodSignature& sig) {
    if (!h.at(x).declares(sig)) return false;
    for (std::size_t y = 0; y < n; ++y) {
      if (y != x && dist[x * n + y] != kInf && h.at(y).declares(sig)) {
        return false;
      }
    }
    return true;
  };

  OriginMap out;
  for (const auto& edge : cg.edges()) {
    if (out.entries.contains(edge.target)) continue;
    const auto& target = cg.node(edge.target);
    const std::size_t t = h.indexOf(target.definingType);

    std::vector<std::pair<std::size_t, TypeId>> candidates;
    for (std::size_t x = 0; x < n; ++x) {
      if (dist[t * n + x] != kInf && isFirstDeclarer(x, target.signature)) {
        candidates.emplace_back(dist[t * n + x], h.at(x).id);
      }
    }
    if (candidates.empty()) {
      throw LookupError("type '" + target.definingType.value +
                        "' does not declare " + toString(target.signature));
    }
    std::sort(candidates.begin(), candidates.end());
    if (candidates.size() > 1) {
      OriginAmbiguity amb{edge.target, {}};
      for (const auto& c : candidates) amb.candidates.push_back(c.second);
      out.ambiguities.push_back(std::move(amb));
    }
    out.entries.emplace(edge.target,
                        OriginRef{candidates.front().second, target.signature});
  }
  std::sort(out.ambiguities.begin(), out.ambiguities.end(),
            [](const auto& a, const auto& b) { return a.target < b.target; });
  return out;
}

}  // namespace cgprune

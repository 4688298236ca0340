#include "cgprune/graph.hpp"

#include <algorithm>
#include <unordered_set>

namespace cgprune {

namespace {

void hashCombine(std::size_t& seed, std::size_t value) {
  seed ^= value + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2);
}

struct EdgeKeyHash {
  std::size_t operator()(const CallEdge& e) const noexcept {
    std::size_t seed = e.source;
    hashCombine(seed, e.target);
    hashCombine(seed, std::hash<std::string>{}(e.receiverType.value));
    return seed;
  }
};

// Iterative Tarjan over the resolved parent relation. Returns components that
// form a cycle (size > 1, or a self-loop).
std::vector<std::vector<std::size_t>> cyclicComponents(const TypeHierarchy& h) {
  const std::size_t n = h.size();
  constexpr std::size_t kUnvisited = static_cast<std::size_t>(-1);
  std::vector<std::size_t> index(n, kUnvisited), low(n, 0);
  std::vector<bool> onStack(n, false);
  std::vector<std::size_t> stack;
  std::vector<std::vector<std::size_t>> result;
  std::size_t counter = 0;

  struct Frame {
    std::size_t node;
    std::size_t next;
  };

  for (std::size_t root = 0; root < n; ++root) {
    if (index[root] != kUnvisited) continue;
    std::vector<Frame> frames{{root, 0}};
    index[root] = low[root] = counter++;
    stack.push_back(root);
    onStack[root] = true;

    while (!frames.empty()) {
      Frame& frame = frames.back();
      auto parents = h.parentsOf(frame.node);
      if (frame.next < parents.size()) {
        std::size_t w = parents[frame.next++];
        if (index[w] == kUnvisited) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          onStack[w] = true;
          frames.push_back({w, 0});
        } else if (onStack[w]) {
          low[frame.node] = std::min(low[frame.node], index[w]);
        }
        continue;
      }

      std::size_t v = frame.node;
      if (low[v] == index[v]) {
        std::vector<std::size_t> component;
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          onStack[w] = false;
          component.push_back(w);
        } while (w != v);
        auto ps = h.parentsOf(v);
        bool selfLoop = std::find(ps.begin(), ps.end(), v) != ps.end();
        if (component.size() > 1 || selfLoop) {
          result.push_back(std::move(component));
        }
      }
      frames.pop_back();
      if (!frames.empty()) {
        std::size_t u = frames.back().node;
        low[u] = std::min(low[u], low[v]);
      }
    }
  }
  return result;
}

}  // namespace

std::string toString(const MethodSignature& sig) {
  std::string out = sig.name;
  out += '(';
  for (std::size_t i = 0; i < sig.paramTypes.size(); ++i) {
    if (i > 0) out += ',';
    out += sig.paramTypes[i];
  }
  out += "):";
  out += sig.returnType;
  return out;
}

MethodSignature parseSignature(std::string_view text) {
  auto lparen = text.find('(');
  auto rparen = text.rfind(')');
  if (lparen == std::string_view::npos || rparen == std::string_view::npos ||
      rparen < lparen || rparen + 1 >= text.size() || text[rparen + 1] != ':') {
    throw FormatError("malformed signature '" + std::string(text) +
                      "' (expected name(params):return)");
  }
  MethodSignature sig;
  sig.name = std::string(text.substr(0, lparen));
  if (sig.name.empty()) {
    throw FormatError("signature '" + std::string(text) + "' has no name");
  }
  std::string_view params = text.substr(lparen + 1, rparen - lparen - 1);
  while (!params.empty()) {
    auto comma = params.find(',');
    sig.paramTypes.emplace_back(params.substr(0, comma));
    if (comma == std::string_view::npos) break;
    params.remove_prefix(comma + 1);
  }
  sig.returnType = std::string(text.substr(rparen + 2));
  return sig;
}

std::size_t MethodSignatureHash::operator()(
    const MethodSignature& sig) const noexcept {
  std::hash<std::string> h;
  std::size_t seed = h(sig.name);
  for (const auto& p : sig.paramTypes) hashCombine(seed, h(p));
  hashCombine(seed, h(sig.returnType));
  return seed;
}

// --- TypeHierarchy ---------------------------------------------------------

TypeHierarchy::TypeHierarchy(std::vector<TypeNode> types,
                             std::string coreProjectId)
    : types_(std::move(types)), coreProjectId_(std::move(coreProjectId)) {
  index_.reserve(types_.size());
  for (std::size_t i = 0; i < types_.size(); ++i) {
    index_.try_emplace(types_[i].id, i);
  }
  parents_.resize(types_.size());
  children_.resize(types_.size());
  for (std::size_t i = 0; i < types_.size(); ++i) {
    for (const auto& p : types_[i].parents) {
      auto it = index_.find(p);
      if (it == index_.end()) continue;
      parents_[i].push_back(it->second);
      children_[it->second].push_back(i);
    }
  }
}

std::optional<std::size_t> TypeHierarchy::find(const TypeId& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t TypeHierarchy::indexOf(const TypeId& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) {
    throw LookupError("unknown type id '" + id.value + "'");
  }
  return it->second;
}

const TypeNode* TypeHierarchy::findByFqName(std::string_view fqName) const {
  for (const auto& t : types_) {
    if (t.fqName == fqName) return &t;
  }
  return nullptr;
}

std::vector<Violation> validateHierarchy(const TypeHierarchy& h) {
  std::vector<Violation> out;
  std::unordered_set<TypeId, TypeIdHash> seen;
  for (const auto& t : h.types()) {
    if (!seen.insert(t.id).second) {
      out.push_back({t.id.value, Rule::DuplicateTypeId, ""});
    }
    for (const auto& p : t.parents) {
      if (!h.contains(p)) {
        out.push_back({t.id.value, Rule::DanglingParent,
                       "parent '" + p.value + "' does not exist"});
      }
    }
    if (t.isCoreLib && t.projectId != h.coreProjectId()) {
      out.push_back({t.id.value, Rule::CoreProjectMismatch,
                     "core type in project '" + t.projectId + "', expected '" +
                         h.coreProjectId() + "'"});
    }
    for (const auto& sig : t.declaredSignatures) {
      if (sig.name.empty()) {
        out.push_back({t.id.value, Rule::EmptySignatureName, toString(sig)});
      }
    }
  }
  for (const auto& component : cyclicComponents(h)) {
    std::vector<std::string> ids;
    for (auto i : component) ids.push_back(h.at(i).id.value);
    std::sort(ids.begin(), ids.end());
    std::string members;
    for (const auto& id : ids) {
      if (!members.empty()) members += ",";
      members += id;
    }
    out.push_back({ids.front(), Rule::Cycle, "cycle through {" + members + "}"});
  }
  return out;
}

std::vector<AncestorEntry> ancestorEntries(const TypeHierarchy& h,
                                           std::size_t index) {
  std::vector<AncestorEntry> out;
  std::vector<bool> seen(h.size(), false);
  seen[index] = true;
  std::vector<std::size_t> level{index};
  std::uint32_t depth = 0;
  while (!level.empty()) {
    ++depth;
    std::vector<std::size_t> next;
    for (auto t : level) {
      for (auto p : h.parentsOf(t)) {
        if (!seen[p]) {
          seen[p] = true;
          next.push_back(p);
        }
      }
    }
    std::sort(next.begin(), next.end(), [&](std::size_t a, std::size_t b) {
      return h.at(a).id < h.at(b).id;
    });
    for (auto p : next) out.push_back({p, depth});
    level = std::move(next);
  }
  return out;
}

std::vector<TypeId> ancestorsOf(const TypeHierarchy& h, const TypeId& t) {
  std::vector<TypeId> out;
  for (const auto& e : ancestorEntries(h, h.indexOf(t))) {
    out.push_back(h.at(e.index).id);
  }
  return out;
}

bool isReflexiveDescendant(const TypeHierarchy& h, const TypeId& ancestor,
                           const TypeId& t) {
  const std::size_t a = h.indexOf(ancestor);
  const std::size_t start = h.indexOf(t);
  if (a == start) return true;
  std::vector<bool> seen(h.size(), false);
  std::vector<std::size_t> work{start};
  seen[start] = true;
  while (!work.empty()) {
    auto cur = work.back();
    work.pop_back();
    for (auto p : h.parentsOf(cur)) {
      if (p == a) return true;
      if (!seen[p]) {
        seen[p] = true;
        work.push_back(p);
      }
    }
  }
  return false;
}

std::vector<std::size_t> reflexiveDescendants(const TypeHierarchy& h,
                                              std::size_t index) {
  std::vector<bool> seen(h.size(), false);
  std::vector<std::size_t> out{index};
  seen[index] = true;
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (auto c : h.childrenOf(out[i])) {
      if (!seen[c]) {
        seen[c] = true;
        out.push_back(c);
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

TypeHierarchy markCorePackages(const TypeHierarchy& h,
                               std::span<const std::string> prefixes) {
  std::vector<TypeNode> types(h.types().begin(), h.types().end());
  for (auto& t : types) {
    for (const auto& prefix : prefixes) {
      if (!prefix.empty() && t.packageName.starts_with(prefix)) {
        t.isCoreLib = true;
        t.projectId = h.coreProjectId();
        break;
      }
    }
  }
  return TypeHierarchy(std::move(types), h.coreProjectId());
}

AncestorCache::AncestorCache(const TypeHierarchy& h)
    : h_(&h), cache_(h.size()) {}

const std::vector<std::size_t>& AncestorCache::reflexiveAncestors(
    std::size_t index) {
  auto& slot = cache_.at(index);
  if (!slot) {
    std::vector<std::size_t> set{index};
    for (const auto& e : ancestorEntries(*h_, index)) set.push_back(e.index);
    std::sort(set.begin(), set.end());
    slot = std::move(set);
  }
  return *slot;
}

bool AncestorCache::isReflexiveAncestor(std::size_t ancestor,
                                        std::size_t index) {
  const auto& set = reflexiveAncestors(index);
  return std::binary_search(set.begin(), set.end(), ancestor);
}

// --- CallGraph -------------------------------------------------------------

CallGraph::CallGraph()
    : nodes_(std::make_shared<const std::vector<MethodNode>>()) {}

CallGraph::CallGraph(std::vector<MethodNode> nodes, std::vector<CallEdge> edges)
    : nodes_(std::make_shared<const std::vector<MethodNode>>(std::move(nodes))) {
  std::vector<Violation> dangling;
  const auto n = nodes_->size();
  std::unordered_set<CallEdge, EdgeKeyHash> seen;
  seen.reserve(edges.size());
  edges_.reserve(edges.size());
  for (auto& e : edges) {
    if (e.source >= n || e.target >= n) {
      dangling.push_back({std::to_string(e.source) + "->" +
                              std::to_string(e.target),
                          Rule::UnknownType, "edge endpoint is not a node"});
      continue;
    }
    if (seen.insert(e).second) {
      edges_.push_back(std::move(e));
    } else {
      ++duplicates_;
    }
  }
  if (!dangling.empty()) throw ValidationError(std::move(dangling));
}

CallGraph CallGraph::withEdgeSubset(std::vector<CallEdge> subset) const {
  CallGraph out;
  out.nodes_ = nodes_;
  out.edges_ = std::move(subset);
  return out;
}

std::optional<NodeId> CallGraph::findNode(const TypeId& type,
                                          const MethodSignature& sig) const {
  for (std::size_t i = 0; i < nodes_->size(); ++i) {
    const auto& n = (*nodes_)[i];
    if (n.definingType == type && n.signature == sig) {
      return static_cast<NodeId>(i);
    }
  }
  return std::nullopt;
}

std::vector<Violation> validateCallGraph(const CallGraph& cg,
                                         const TypeHierarchy& h) {
  std::vector<Violation> out;
  std::set<std::pair<TypeId, MethodSignature>> seen;
  for (std::size_t i = 0; i < cg.nodeCount(); ++i) {
    const auto& n = cg.node(static_cast<NodeId>(i));
    const auto subject = "node " + std::to_string(i);
    if (!h.contains(n.definingType)) {
      out.push_back({subject, Rule::UnknownType,
                     "unknown type '" + n.definingType.value + "'"});
      continue;
    }
    if (!h.at(n.definingType).declares(n.signature)) {
      out.push_back({subject, Rule::UndeclaredSignature,
                     n.definingType.value + " does not declare " +
                         toString(n.signature)});
    }
    if (!seen.emplace(n.definingType, n.signature).second) {
      out.push_back({subject, Rule::DuplicateMethod,
                     n.definingType.value + "." + toString(n.signature)});
    }
  }
  std::unordered_set<TypeId, TypeIdHash> reported;
  for (const auto& e : cg.edges()) {
    if (!h.contains(e.receiverType) && reported.insert(e.receiverType).second) {
      out.push_back({e.receiverType.value, Rule::UnknownType,
                     "unknown receiver type '" + e.receiverType.value + "'"});
    }
  }
  return out;
}

namespace {

void buildAdjacency(const CallGraph& cg, bool reversed,
                    std::vector<std::size_t>& offsets,
                    std::vector<NodeId>& targets) {
  const auto n = cg.nodeCount();
  offsets.assign(n + 1, 0);
  for (const auto& e : cg.edges()) {
    ++offsets[(reversed ? e.target : e.source) + 1];
  }
  for (std::size_t i = 0; i < n; ++i) offsets[i + 1] += offsets[i];
  targets.resize(cg.edgeCount());
  std::vector<std::size_t> cursor(offsets.begin(), offsets.end() - 1);
  for (const auto& e : cg.edges()) {
    auto from = reversed ? e.target : e.source;
    targets[cursor[from]++] = reversed ? e.source : e.target;
  }
}

}  // namespace

Adjacency forwardAdjacency(const CallGraph& cg) {
  Adjacency a;
  buildAdjacency(cg, false, a.offsets_, a.targets_);
  return a;
}

Adjacency reverseAdjacency(const CallGraph& cg) {
  Adjacency a;
  buildAdjacency(cg, true, a.offsets_, a.targets_);
  return a;
}

}  // namespace cgprune

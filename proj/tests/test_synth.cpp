#include <map>
#include <sstream>
#include <tuple>
#include <stdexcept>

#include "doctest.h"
#include "cgprune/io.hpp"
#include "cgprune/origins.hpp"
#include "cgprune/synth.hpp"
#include "fixture.hpp"
#include "oracles.hpp"

using namespace cgprune;
using namespace cgprune::testing;

namespace {

std::string bundleText(const GenParams& p) {
  const auto h = generateHierarchy(p);
  std::ostringstream out;
  writeBundle(out, h, generateCallGraphCHA(h, p));
  return out.str();
}

}  // namespace

TEST_CASE("GenParams::validate") {
  GenParams p;
  CHECK_NOTHROW(p.validate());
  auto bad = p;
  bad.typeCount = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = p;
  bad.overrideProbability = 1.5;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = p;
  bad.callSitesPerMethod = {4, 2};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = p;
  bad.coreTypeFraction = -0.1;
  CHECK_THROWS_AS(generateHierarchy(bad), std::invalid_argument);
}

TEST_CASE("a single type is a root") {
  GenParams p;
  p.typeCount = 1;
  const auto h = generateHierarchy(p);
  REQUIRE(h.size() == 1);
  CHECK(h.at(std::size_t{0}).parents.empty());
  CHECK(validateHierarchy(h).empty());

  // Every method in a single-type hierarchy is its own origin.
  p.freshDeclarationProbability = 1.0;
  const auto h1 = generateHierarchy(p);
  const auto cg = generateCallGraphCHA(h1, p);
  for (const auto& [node, origin] : bruteForceOrigins(cg, h1).entries) {
    CHECK(origin.originType == h1.at(std::size_t{0}).id);
  }
}

TEST_CASE("generation is deterministic per seed") {
  GenParams p;
  p.seed = 77;
  CHECK(bundleText(p) == bundleText(p));
  auto q = p;
  q.seed = 78;
  CHECK(bundleText(p) != bundleText(q));
}

TEST_CASE("generated hierarchies are well formed") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    GenParams p;
    p.typeCount = 120;
    p.maxParentsPerType = 4;
    p.seed = seed;
    const auto h = generateHierarchy(p);
    CHECK(validateHierarchy(h).empty());
    std::size_t core = 0;
    for (const auto& t : h.types()) {
      CHECK(t.parents.size() <= p.maxParentsPerType);
      if (t.isCoreLib) {
        ++core;
        CHECK(t.projectId == kSyntheticCoreProject);
        for (const auto& parent : t.parents) CHECK(h.at(parent).isCoreLib);
      }
    }
    CHECK(core == 24);
  }
}

TEST_CASE("overrideProbability 0 makes every declaration a fresh self-origin") {
  GenParams p;
  p.typeCount = 80;
  p.overrideProbability = 0.0;
  p.seed = 3;
  const auto h = generateHierarchy(p);
  for (const auto& t : h.types()) {
    for (const auto& s : t.declaredSignatures) {
      for (const auto& a : ancestorsOf(h, t.id)) CHECK_FALSE(h.at(a).declares(s));
    }
  }
}

TEST_CASE("CHA expansion") {
  SUBCASE("one call site fans out to every declaring descendant of the receiver") {
    // R declares f; three subtypes override; one more subtype does not.
    std::vector<TypeNode> types;
    auto add = [&](const char* id, std::vector<TypeId> parents, bool declares) {
      TypeNode t;
      t.id = tid(id);
      t.fqName = std::string("x.") + id;
      t.parents = std::move(parents);
      if (declares) t.declaredSignatures.insert(sig("f", "V"));
      t.projectId = "app";
      t.packageName = "x";
      types.push_back(std::move(t));
    };
    add("R", {}, true);
    add("S1", {tid("R")}, true);
    add("S2", {tid("R")}, true);
    add("S3", {tid("S1")}, true);
    add("S4", {tid("R")}, false);
    const TypeHierarchy h(types, "jre");
    const std::map<TypeId, std::size_t> coneSize{
        {tid("R"), 4}, {tid("S1"), 2}, {tid("S2"), 1}, {tid("S3"), 1}};

    bool sawRoot = false;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      GenParams p;
      p.callSitesPerMethod = {1, 1};
      p.seed = seed;
      const auto cg = generateCallGraphCHA(h, p);
      REQUIRE(cg.nodeCount() == 4);
      std::map<NodeId, std::size_t> perCaller;
      for (const auto& e : cg.edges()) ++perCaller[e.source];
      for (const auto& e : cg.edges()) {
        CHECK(perCaller.at(e.source) == coneSize.at(e.receiverType));
        sawRoot |= e.receiverType == tid("R");
      }
    }
    CHECK(sawRoot);
  }

  SUBCASE("no call sites means no edges") {
    GenParams p;
    p.callSitesPerMethod = {0, 0};
    const auto h = generateHierarchy(p);
    CHECK(generateCallGraphCHA(h, p).edgeCount() == 0);
  }

  SUBCASE("edges never undercount call sites") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      GenParams p;
      p.typeCount = 60;
      p.seed = seed;
      const auto h = generateHierarchy(p);
      const auto cg = generateCallGraphCHA(h, p);
      CHECK(validateCallGraph(cg, h).empty());
      CHECK(cg.collapsedDuplicates() == 0);

      // Group edges by (caller, receiver, signature): each group is one site.
      std::map<std::tuple<NodeId, TypeId, MethodSignature>, std::size_t> sites;
      for (const auto& e : cg.edges()) {
        ++sites[{e.source, e.receiverType, cg.node(e.target).signature}];
        CHECK(naiveDescends(h, e.receiverType, cg.node(e.target).definingType));
      }
      bool anyFanOut = false;
      for (const auto& [key, count] : sites) {
        const auto& [caller, receiver, s] = key;
        std::size_t declaring = 0;
        for (const auto& t : h.types()) {
          declaring += naiveDescends(h, receiver, t.id) && t.declares(s);
        }
        CHECK(count == declaring);
        anyFanOut |= count > 1;
      }
      CHECK(cg.edgeCount() >= sites.size());
      CHECK((cg.edgeCount() == sites.size()) == !anyFanOut);
    }
  }
}

TEST_CASE("bruteForceOrigins agrees with the fixture hand-walk") {
  const auto o = bruteForceOrigins(F1::graph(), F1::hierarchy());
  CHECK(o.at(F1::myNext) == OriginRef{tid("T1"), F1::next()});
  CHECK(o.at(F1::libNext) == OriginRef{tid("T1"), F1::next()});
  CHECK(o.at(F1::myHelper) == OriginRef{tid("T2"), sig("helper", "void")});
  CHECK(o.entries == findOrigins(F1::graph(), F1::hierarchy()).entries);
}

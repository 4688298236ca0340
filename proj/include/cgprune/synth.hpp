#pragma once

// Seeded synthetic hierarchies and CHA-expanded call graphs.
//
// Every random draw comes from std::mt19937_64, whose output sequence is
// fixed by the C++ standard. Bounded integers use rejection sampling on the
// raw 64-bit output and probabilities compare (x >> 11) * 2^-53 against the
// threshold, so a seed reproduces the same graph on any conforming toolchain.

#include <cstdint>
#include <string>

#include "cgprune/graph.hpp"
#include "cgprune/origins.hpp"

namespace cgprune {

inline constexpr const char* kSyntheticCoreProject = "jre";
inline constexpr const char* kSyntheticApplicationProject = "p0";

struct CountRange {
  std::size_t min = 0;
  std::size_t max = 0;
};

struct GenParams {
  std::size_t typeCount = 50;
  std::size_t maxParentsPerType = 2;
  std::size_t signaturePoolSize = 8;
  /// Chance that a type redeclares a signature one of its ancestors declares.
  double overrideProbability = 0.5;
  /// Chance that a type introduces a signature no ancestor declares.
  double freshDeclarationProbability = 0.25;
  CountRange callSitesPerMethod{1, 3};
  /// Non-core projects p0..p{n-1}; p0 plays the application.
  std::size_t projectCount = 3;
  /// Leading share of types placed in the core library.
  double coreTypeFraction = 0.2;
  std::uint64_t seed = 1;

  /// Throws std::invalid_argument on out-of-range fields.
  void validate() const;
};

/// Types are generated in index order and draw parents only from earlier
/// types, so the result is acyclic by construction.
TypeHierarchy generateHierarchy(const GenParams& p);

/// For each method, sample distinct (receiverType, signature) call sites among
/// declared methods and expand each to one edge per reflexive descendant of
/// the receiver that declares the signature.
CallGraph generateCallGraphCHA(const TypeHierarchy& h, const GenParams& p);

/// Reference origin computation by exhaustive enumeration over an all-pairs
/// ancestor distance matrix. Cubic in the type count; meant for test-sized
/// hierarchies. Shares no traversal code with findOrigins.
OriginMap bruteForceOrigins(const CallGraph& cg, const TypeHierarchy& h);

}  // namespace cgprune

#pragma once

// The canonical six-type fixture used across the unit tests:
//
//   T0 java.lang.Object   (core)   hashCode() toString()
//   T1 java.util.Iterator (core)   next() hasNext()        extends T0
//   T2 com.app.a.MyIter   (app)    next() helper()         extends T1
//   T3 org.lib.b.LibIter  (lib)    next()                  extends T1
//   T4 com.app.b.Service  (app)    run() use()             extends T0
//   T5 com.app.c.Helper   (app)    fmt()                   extends T0
//
//   cs1a T4.run  -> T2.next    via T1
//   cs1b T4.run  -> T3.next    via T1
//   cs2  T2.next -> T2.helper  via T2
//   cs3  T2.helper -> T0.hashCode via T0
//   cs4  T4.use  -> T4.run     via T4
//   cs5  T3.next -> T4.run     via T4
//   cs6  T4.use  -> T5.fmt     via T5

#include <string>
#include <vector>

#include "cgprune/graph.hpp"

namespace cgprune::testing {

inline MethodSignature sig(std::string name, std::string ret,
                           std::vector<std::string> params = {}) {
  return MethodSignature{std::move(name), std::move(params), std::move(ret)};
}

inline TypeId tid(const char* id) { return TypeId{id}; }

struct F1 {
  // Node ids, in node-list order.
  static constexpr NodeId hashCode = 0;
  static constexpr NodeId toStr = 1;
  static constexpr NodeId iterNext = 2;
  static constexpr NodeId iterHasNext = 3;
  static constexpr NodeId myNext = 4;
  static constexpr NodeId myHelper = 5;
  static constexpr NodeId libNext = 6;
  static constexpr NodeId run = 7;
  static constexpr NodeId use = 8;
  static constexpr NodeId fmt = 9;

  static MethodSignature next() { return sig("next", "java.lang.Object"); }
  static MethodSignature runSig() { return sig("run", "void"); }

  static std::vector<TypeNode> types() {
    auto type = [](const char* id, const char* fq, std::vector<TypeId> parents,
                   std::vector<MethodSignature> sigs, const char* project,
                   const char* pkg, bool core) {
      TypeNode t;
      t.id = TypeId{id};
      t.fqName = fq;
      t.parents = std::move(parents);
      t.declaredSignatures.insert(sigs.begin(), sigs.end());
      t.projectId = project;
      t.packageName = pkg;
      t.isCoreLib = core;
      return t;
    };
    return {
        type("T0", "java.lang.Object", {},
             {sig("hashCode", "int"), sig("toString", "java.lang.String")},
             "jre", "java.lang", true),
        type("T1", "java.util.Iterator", {tid("T0")},
             {next(), sig("hasNext", "boolean")}, "jre", "java.util", true),
        type("T2", "com.app.a.MyIter", {tid("T1")},
             {next(), sig("helper", "void")}, "app", "com.app.a", false),
        type("T3", "org.lib.b.LibIter", {tid("T1")}, {next()}, "lib",
             "org.lib.b", false),
        type("T4", "com.app.b.Service", {tid("T0")},
             {runSig(), sig("use", "void")}, "app", "com.app.b", false),
        type("T5", "com.app.c.Helper", {tid("T0")},
             {sig("fmt", "java.lang.String")}, "app", "com.app.c", false),
    };
  }

  static TypeHierarchy hierarchy() { return TypeHierarchy(types(), "jre"); }

  static std::vector<MethodNode> nodes() {
    return {
        {tid("T0"), sig("hashCode", "int")},
        {tid("T0"), sig("toString", "java.lang.String")},
        {tid("T1"), next()},
        {tid("T1"), sig("hasNext", "boolean")},
        {tid("T2"), next()},
        {tid("T2"), sig("helper", "void")},
        {tid("T3"), next()},
        {tid("T4"), runSig()},
        {tid("T4"), sig("use", "void")},
        {tid("T5"), sig("fmt", "java.lang.String")},
    };
  }

  static std::vector<CallEdge> edges() {
    return {
        {run, myNext, tid("T1")},        // cs1a
        {run, libNext, tid("T1")},       // cs1b
        {myNext, myHelper, tid("T2")},   // cs2
        {myHelper, hashCode, tid("T0")}, // cs3
        {use, run, tid("T4")},           // cs4
        {libNext, run, tid("T4")},       // cs5
        {use, fmt, tid("T5")},           // cs6
    };
  }

  static CallGraph graph() { return CallGraph(nodes(), edges()); }
};

}  // namespace cgprune::testing

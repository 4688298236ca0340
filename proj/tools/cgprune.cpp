// cgprune command-line front end.
//
// Exit codes: 0 success, 2 usage error, 3 invalid input (format, validation or
// lookup), 4 runtime failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "cgprune/io.hpp"
#include "cgprune/localness.hpp"
#include "cgprune/origins.hpp"
#include "cgprune/pipeline.hpp"
#include "cgprune/pruning.hpp"
#include "cgprune/synth.hpp"
#include "cgprune/vuln.hpp"

namespace fs = std::filesystem;
using namespace cgprune;
using nlohmann::json;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitInput = 3;
constexpr int kExitRuntime = 4;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Inputs {
  std::string hierarchy;
  std::string graph;
  std::vector<std::string> corePrefixes;
};

void addInputs(CLI::App& cmd, Inputs& in) {
  cmd.add_option("--hierarchy", in.hierarchy,
                 "Hierarchy file (defaults to --graph for bundles)");
  cmd.add_option("--graph,-g", in.graph, "Call graph or bundle file")->required();
  cmd.add_option("--core-prefix", in.corePrefixes,
                 "Treat packages with this prefix as core library (repeatable)");
}

struct Loaded {
  TypeHierarchy h;
  CallGraph cg;
};

Loaded load(const Inputs& in) {
  const fs::path hPath = in.hierarchy.empty() ? in.graph : in.hierarchy;
  Loaded out;
  out.h = loadHierarchy(hPath);
  out.cg = loadCallGraph(in.graph, out.h);
  if (out.cg.collapsedDuplicates() > 0) {
    spdlog::warn("{}: collapsed {} duplicate edge(s)", in.graph,
                 out.cg.collapsedDuplicates());
  }
  if (!in.corePrefixes.empty()) out.h = markCorePackages(out.h, in.corePrefixes);
  return out;
}

/// Runs `write` against `path`, or stdout when the path is empty or "-".
template <typename Write>
void emit(const std::string& path, Write&& write) {
  if (path.empty() || path == "-") {
    write(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  write(out);
}

std::ifstream openText(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "' for reading");
  return in;
}

OriginFrequencyTable frequencies(const Loaded& g, OriginMap* keep = nullptr) {
  auto origins = findOrigins(g.cg, g.h);
  for (const auto& a : origins.ambiguities) {
    spdlog::debug("node {} has {} independent first declarers", a.target,
                  a.candidates.size());
  }
  if (!origins.ambiguities.empty()) {
    spdlog::info("{} target(s) with ambiguous origins", origins.ambiguities.size());
  }
  auto table = originEdgeFrequencies(g.cg, origins);
  if (keep) *keep = std::move(origins);
  return table;
}

struct ExclusionSource {
  std::optional<std::size_t> top;
  std::string path;

  bool given() const { return top.has_value() || !path.empty(); }

  ExclusionList resolve(const Loaded& g) const {
    if (!path.empty()) {
      auto in = openText(path);
      return readExclusionList(in, g.h, path);
    }
    return buildExclusionList(frequencies(g), top.value_or(0));
  }
};

void addExclusion(CLI::App& cmd, ExclusionSource& src) {
  auto* top = cmd.add_option("--top,-n", src.top, "Exclude the Top-N origins");
  auto* file = cmd.add_option("--exclusion", src.path, "Exclusion list file");
  top->excludes(file);
}

PruneMode parseMode(const std::string& mode) {
  if (mode == "exhaustive") return PruneMode::Exhaustive;
  if (mode == "selective") return PruneMode::Selective;
  throw UsageError("--mode must be exhaustive or selective");
}

struct PruneFlags {
  std::string mode = "exhaustive";
  double threshold = 0.95;
  OracleConfig oracle;
};

void addPruneFlags(CLI::App& cmd, PruneFlags& f) {
  cmd.add_option("--mode", f.mode, "exhaustive or selective")
      ->check(CLI::IsMember({"exhaustive", "selective"}))
      ->capture_default_str();
  cmd.add_option("--threshold", f.threshold, "Selective confidence threshold")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  cmd.add_option("--oracle", f.oracle.kind, "prune-all, keep-all or hashed")
      ->check(CLI::IsMember({"prune-all", "keep-all", "hashed"}))
      ->capture_default_str();
  cmd.add_option("--oracle-fraction", f.oracle.pruneFraction,
                 "Share of candidates the hashed oracle prunes")
      ->check(CLI::Range(0.0, 1.0));
  cmd.add_option("--oracle-confidence", f.oracle.confidence,
                 "Confidence reported by the stub oracles")
      ->check(CLI::Range(0.0, 1.0));
  cmd.add_option("--oracle-seed", f.oracle.seed, "Hashed oracle seed");
}

PruneResult runPrune(const Loaded& g, const ExclusionList& excl,
                     const PruneFlags& f) {
  if (parseMode(f.mode) == PruneMode::Exhaustive) {
    return pruneExhaustive(g.cg, excl, g.h);
  }
  const auto oracle = makeOracle(f.oracle);
  return pruneSelective(g.cg, excl, g.h, *oracle, f.threshold);
}

LocalnessOptions localnessOptions(const std::string& rule,
                                  const std::string& boundary) {
  LocalnessOptions o;
  o.hierarchyRule = rule == "strict" ? HierarchyRule::Strict
                                     : HierarchyRule::SharedNonCoreAncestor;
  o.boundary = boundary == "package" ? ProjectBoundary::Package
                                     : ProjectBoundary::Project;
  return o;
}

int run(int argc, char** argv) {
  CLI::App app{"Origin-guided call graph pruning and vulnerability reachability"};
  app.require_subcommand(1);
  std::string logLevel = "warn";
  app.add_option("--log-level", logLevel, "trace, debug, info, warn, error, off")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}))
      ->capture_default_str();

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a synthetic hierarchy and CHA call graph");
  GenParams gp;
  std::string genOut;
  gen->add_option("--types", gp.typeCount, "Number of types")->capture_default_str();
  gen->add_option("--max-parents", gp.maxParentsPerType, "Parents per type, at most")
      ->capture_default_str();
  gen->add_option("--pool", gp.signaturePoolSize, "Signature pool size")
      ->capture_default_str();
  gen->add_option("--override", gp.overrideProbability, "Override probability")
      ->capture_default_str();
  gen->add_option("--fresh", gp.freshDeclarationProbability,
                  "Fresh declaration probability")
      ->capture_default_str();
  gen->add_option("--sites-min", gp.callSitesPerMethod.min, "Call sites per method, min")
      ->capture_default_str();
  gen->add_option("--sites-max", gp.callSitesPerMethod.max, "Call sites per method, max")
      ->capture_default_str();
  gen->add_option("--projects", gp.projectCount, "Non-core projects")->capture_default_str();
  gen->add_option("--core-fraction", gp.coreTypeFraction, "Share of core types")
      ->capture_default_str();
  gen->add_option("--seed", gp.seed, "Generator seed")->capture_default_str();
  gen->add_option("--out,-o", genOut, "Bundle output path")->required();

  // origins
  auto* origins = app.add_subcommand("origins", "Rank origin methods by edge frequency");
  Inputs originsIn;
  std::string originsOut, exclusionOut;
  std::size_t exclusionTop = 10;
  addInputs(*origins, originsIn);
  origins->add_option("--out,-o", originsOut, "Frequency CSV (default stdout)");
  origins->add_option("--exclusion-out", exclusionOut, "Also write a Top-N exclusion list");
  origins->add_option("--top,-n", exclusionTop, "Size of the written exclusion list")
      ->capture_default_str();

  // derivatives
  auto* derivs = app.add_subcommand("derivatives", "Count unique derivatives per origin");
  Inputs derivsIn;
  std::string derivsOut;
  addInputs(*derivs, derivsIn);
  derivs->add_option("--out,-o", derivsOut, "Derivative CSV (default stdout)");

  // localness
  auto* local = app.add_subcommand("localness", "Localness levels and per-origin distribution");
  Inputs localIn;
  std::string localOut, labelsOut, rule = "shared-ancestor", boundary = "project";
  std::size_t localTop = 10;
  addInputs(*local, localIn);
  local->add_option("--top,-n", localTop, "Origins in the distribution")->capture_default_str();
  local->add_option("--rule", rule, "strict or shared-ancestor")
      ->check(CLI::IsMember({"strict", "shared-ancestor"}))
      ->capture_default_str();
  local->add_option("--boundary", boundary, "project or package")
      ->check(CLI::IsMember({"project", "package"}))
      ->capture_default_str();
  local->add_option("--out,-o", localOut, "Distribution CSV (default stdout)");
  local->add_option("--labels-out", labelsOut, "Per-node level CSV");

  // prune
  auto* prune = app.add_subcommand("prune", "Prune derivative edges of excluded origins");
  Inputs pruneIn;
  ExclusionSource pruneExcl;
  PruneFlags pruneFlags;
  std::string prunedOut, pruneReport;
  addInputs(*prune, pruneIn);
  addExclusion(*prune, pruneExcl);
  addPruneFlags(*prune, pruneFlags);
  prune->add_option("--out,-o", prunedOut, "Pruned bundle output path");
  prune->add_option("--report", pruneReport, "Result record (default stdout)");

  // vuln-sim
  auto* vuln = app.add_subcommand("vuln-sim", "Inject artificial vulnerabilities and propagate");
  Inputs vulnIn;
  ExclusionSource vulnExcl;
  PruneFlags vulnFlags;
  std::string appProject = kSyntheticApplicationProject, assignmentIn, assignmentOut,
              vulnReport;
  std::size_t cves = 100, warmup = 1, repetitions = 3;
  std::uint64_t cveSeed = 1;
  bool includeCore = false, witnesses = false;
  addInputs(*vuln, vulnIn);
  addExclusion(*vuln, vulnExcl);
  addPruneFlags(*vuln, vulnFlags);
  vuln->add_option("--app", appProject, "Application project id")->capture_default_str();
  vuln->add_option("--cves,-k", cves, "Vulnerabilities to inject")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  vuln->add_option("--seed", cveSeed, "Injection seed")->capture_default_str();
  vuln->add_flag("--include-core", includeCore, "Allow core-library nodes in the pool");
  vuln->add_option("--assignment", assignmentIn, "Read the assignment instead of sampling");
  vuln->add_option("--assignment-out", assignmentOut, "Write the assignment used");
  vuln->add_option("--warmup", warmup, "Untimed warm-up runs")->capture_default_str();
  vuln->add_option("--repetitions", repetitions, "Timed runs to average")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  vuln->add_flag("--witnesses", witnesses, "Include one witness path per pair");
  vuln->add_option("--report", vulnReport, "Result records (default stdout)");

  // pipeline
  auto* pipe = app.add_subcommand("pipeline", "Run the batch pipeline from a config file");
  std::string configPath, reportOut, aggregateOut, jsonOut;
  std::optional<std::size_t> jobs;
  bool noTiming = false;
  pipe->add_option("--config,-c", configPath, "Pipeline config (JSON)")->required();
  pipe->add_option("--out,-o", reportOut, "Per-graph report CSV (default stdout)");
  pipe->add_option("--aggregate", aggregateOut, "Aggregate CSV");
  pipe->add_option("--json", jsonOut, "Full report as JSON");
  pipe->add_option("--jobs,-j", jobs, "Graphs analyzed in parallel");
  pipe->add_flag("--no-timing", noTiming, "Omit timing columns");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }
  spdlog::set_level(spdlog::level::from_str(logLevel));
  spdlog::set_default_logger(spdlog::default_logger()->clone("cgprune"));

  if (gen->parsed()) {
    try {
      gp.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    const auto h = generateHierarchy(gp);
    const auto cg = generateCallGraphCHA(h, gp);
    saveBundle(genOut, h, cg);
    spdlog::info("wrote {} types, {} nodes, {} edges to {}", h.size(),
                 cg.nodeCount(), cg.edgeCount(), genOut);
  } else if (origins->parsed()) {
    const auto g = load(originsIn);
    const auto table = frequencies(g);
    emit(originsOut, [&](std::ostream& out) { writeFrequencyCsv(out, table, g.h); });
    if (!exclusionOut.empty()) {
      emit(exclusionOut, [&](std::ostream& out) {
        writeExclusionList(out, buildExclusionList(table, exclusionTop), g.h);
      });
    }
  } else if (derivs->parsed()) {
    const auto g = load(derivsIn);
    const auto rows = uniqueDerivativeCounts(g.cg, findOrigins(g.cg, g.h));
    emit(derivsOut, [&](std::ostream& out) { writeDerivativeCsv(out, rows, g.h); });
  } else if (local->parsed()) {
    const auto g = load(localIn);
    OriginMap originMap;
    const auto table = frequencies(g, &originMap);
    const auto labels = labelAll(g.cg, g.h, localnessOptions(rule, boundary));
    std::vector<OriginRef> top;
    for (std::size_t i = 0; i < std::min(localTop, table.rows.size()); ++i) {
      top.push_back(table.rows[i].origin);
    }
    const auto dist = localnessDistribution(originMap, labels, top);
    emit(localOut, [&](std::ostream& out) { writeLocalnessCsv(out, dist, g.h); });
    if (!labelsOut.empty()) {
      emit(labelsOut, [&](std::ostream& out) { writeLabelsCsv(out, g.cg, labels); });
    }
  } else if (prune->parsed()) {
    if (!pruneExcl.given()) throw UsageError("prune needs --top or --exclusion");
    const auto g = load(pruneIn);
    const auto result = runPrune(g, pruneExcl.resolve(g), pruneFlags);
    if (!prunedOut.empty()) saveBundle(prunedOut, g.h, result.prunedGraph);
    emit(pruneReport, [&](std::ostream& out) { out << toJson(result).dump() << '\n'; });
  } else if (vuln->parsed()) {
    const auto g = load(vulnIn);
    const ProjectRoleMap roles{appProject, !includeCore};
    VulnerabilityAssignment assignment;
    if (!assignmentIn.empty()) {
      auto in = openText(assignmentIn);
      assignment = readAssignment(in, assignmentIn);
      for (NodeId n : assignment.vulnerableNodes) {
        if (n >= g.cg.nodeCount()) {
          throw LookupError(assignmentIn + ": node " + std::to_string(n) +
                            " is not in the graph");
        }
      }
    } else {
      assignment = injectArtificialCves(g.cg, g.h, roles, cves, cveSeed);
    }
    if (!assignmentOut.empty()) {
      emit(assignmentOut, [&](std::ostream& out) { writeAssignment(out, assignment); });
    }
    const PropagationOptions opts{warmup, repetitions, witnesses};
    const auto base = propagate(g.cg, g.h, assignment, roles, opts);
    json report{{"base", toJson(base)}};
    if (vulnExcl.given()) {
      const auto pruned = runPrune(g, vulnExcl.resolve(g), vulnFlags);
      const auto after = propagate(pruned.prunedGraph, g.h, assignment, roles, opts);
      report["prune"] = toJson(pruned);
      report["pruned"] = toJson(after);
      report["delta"] = toJson(compare(base, after));
    }
    emit(vulnReport, [&](std::ostream& out) { out << report.dump(2) << '\n'; });
  } else if (pipe->parsed()) {
    auto config = loadPipelineConfig(configPath);
    if (jobs) config.jobs = *jobs;
    const auto report = runPipeline(config);
    emit(reportOut, [&](std::ostream& out) { writeReportCsv(out, report, !noTiming); });
    if (!aggregateOut.empty()) {
      emit(aggregateOut,
           [&](std::ostream& out) { writeAggregateCsv(out, report, !noTiming); });
    }
    if (!jsonOut.empty()) {
      emit(jsonOut, [&](std::ostream& out) {
        out << reportToJson(report, !noTiming).dump(2) << '\n';
      });
    }
    for (const auto& s : report.summaries) {
      if (s.status != "ok") return kExitRuntime;
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const UsageError& e) {
    spdlog::error("{}", e.what());
    return kExitUsage;
  } catch (const ValidationError& e) {
    spdlog::error("{}", e.what());
    return kExitInput;
  } catch (const FormatError& e) {
    spdlog::error("{}", e.what());
    return kExitInput;
  } catch (const LookupError& e) {
    spdlog::error("{}", e.what());
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    spdlog::error("{}", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitRuntime;
  }
}

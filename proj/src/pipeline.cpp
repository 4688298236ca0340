#include "cgprune/pipeline.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <spdlog/spdlog.h>

#include "cgprune/io.hpp"
#include "cgprune/vuln.hpp"

namespace cgprune {

using nlohmann::json;

namespace {

std::string number(double v) {
  std::ostringstream out;
  out << std::setprecision(10) << v;
  return out.str();
}

template <typename T>
void readOptional(const json& j, const char* key, T& target) {
  if (auto it = j.find(key); it != j.end()) {
    try {
      target = it->get<T>();
    } catch (const json::exception&) {
      throw FormatError(std::string("config field '") + key +
                        "' has the wrong type");
    }
  }
}

GenParams parseGenParams(const json& j) {
  GenParams p;
  readOptional(j, "typeCount", p.typeCount);
  readOptional(j, "maxParentsPerType", p.maxParentsPerType);
  readOptional(j, "signaturePoolSize", p.signaturePoolSize);
  readOptional(j, "overrideProbability", p.overrideProbability);
  readOptional(j, "freshDeclarationProbability", p.freshDeclarationProbability);
  readOptional(j, "projectCount", p.projectCount);
  readOptional(j, "coreTypeFraction", p.coreTypeFraction);
  readOptional(j, "seed", p.seed);
  if (auto it = j.find("callSitesPerMethod"); it != j.end()) {
    if (it->is_number_unsigned()) {
      p.callSitesPerMethod = {it->get<std::size_t>(), it->get<std::size_t>()};
    } else if (it->is_array() && it->size() == 2) {
      p.callSitesPerMethod = {(*it)[0].get<std::size_t>(),
                              (*it)[1].get<std::size_t>()};
    } else {
      throw FormatError("config field 'callSitesPerMethod' must be a count or "
                        "a [min, max] pair");
    }
  }
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError(e.what());
  }
  return p;
}

struct GraphOutcome {
  GraphSummary summary;
  std::vector<GraphRecord> records;
};

GraphOutcome analyzeGraph(const PipelineConfig& config,
                          const GraphSource& source) {
  GraphOutcome out;
  out.summary.graph = source.name;
  try {
    TypeHierarchy h;
    CallGraph cg;
    if (source.synthetic) {
      h = generateHierarchy(*source.synthetic);
      cg = generateCallGraphCHA(h, *source.synthetic);
    } else {
      h = loadHierarchy(source.hierarchy);
      cg = loadCallGraph(source.callGraph, h);
    }
    if (!config.corePrefixes.empty()) {
      h = markCorePackages(h, config.corePrefixes);
    }
    out.summary.nodes = cg.nodeCount();
    out.summary.edges = cg.edgeCount();
    out.summary.collapsedDuplicates = cg.collapsedDuplicates();

    const auto origins = findOrigins(cg, h);
    const auto table = originEdgeFrequencies(cg, origins);
    const auto derivatives = uniqueDerivativeCounts(cg, origins);
    const auto labels = labelAll(cg, h, config.localness);
    out.summary.ambiguousOrigins = origins.ambiguities.size();

    std::vector<OriginRef> top;
    for (std::size_t i = 0;
         i < std::min(config.summaryOrigins, table.rows.size()); ++i) {
      top.push_back(table.rows[i].origin);
    }
    const auto dist = localnessDistribution(origins, labels, top);
    std::map<OriginRef, std::size_t> derivativeCount;
    for (const auto& d : derivatives) {
      derivativeCount[d.origin] = d.derivativeCount;
    }
    for (std::size_t i = 0; i < top.size(); ++i) {
      out.summary.topOrigins.push_back({originLabel(h, top[i]),
                                        table.rows[i].edgeCount,
                                        derivativeCount[top[i]],
                                        dist.rows[i].frequency});
    }

    const ProjectRoleMap roles{
        source.applicationProject.value_or(config.applicationProject),
        config.excludeCoreFromPool};
    const auto assignment =
        injectArtificialCves(cg, h, roles, config.cves, config.cveSeed);
    out.summary.vulnerable = assignment.vulnerableNodes.size();
    const PropagationOptions timing{config.warmup, config.repetitions, false};
    const auto base = propagate(cg, h, assignment, roles, timing);

    std::unique_ptr<PruneDecisionOracle> oracle;
    if (config.mode == PruneMode::Selective) oracle = makeOracle(config.oracle);

    for (std::size_t n : config.sweep) {
      const auto excl = buildExclusionList(table, n);
      const auto pruned =
          config.mode == PruneMode::Exhaustive
              ? pruneExhaustive(cg, excl, h)
              : pruneSelective(cg, excl, h, *oracle, config.threshold);
      const auto reach = propagate(pruned.prunedGraph, h, assignment, roles,
                                   timing);
      const auto delta = compare(base, reach);

      GraphRecord r;
      r.graph = source.name;
      r.topN = n;
      r.nodes = pruned.prunedGraph.nodeCount();
      r.edges = pruned.prunedGraph.edgeCount();
      r.candidateEdges = pruned.candidateEdges;
      r.prunedEdges = pruned.prunedEdges;
      r.reduction = pruned.reductionRatio;
      r.reachablePairs = reach.reachablePairs;
      r.reachableFraction = reach.reachableVulnFraction;
      r.pairDelta = delta.pairDelta;
      r.fractionDelta = delta.fractionDelta;
      r.analysisSeconds = seconds(reach.elapsed);
      r.pruneSeconds = seconds(pruned.elapsed);
      out.records.push_back(std::move(r));
    }
  } catch (const std::exception& e) {
    spdlog::error("graph '{}' skipped: {}", source.name, e.what());
    out.summary.status = std::string("error: ") + e.what();
    out.records.clear();
    for (std::size_t n : config.sweep) {
      GraphRecord r;
      r.graph = source.name;
      r.topN = n;
      r.status = out.summary.status;
      out.records.push_back(std::move(r));
    }
  }
  return out;
}

}  // namespace

std::unique_ptr<PruneDecisionOracle> makeOracle(const OracleConfig& config) {
  if (config.kind == "prune-all") {
    return std::make_unique<PruneAllOracle>(config.confidence);
  }
  if (config.kind == "keep-all") return std::make_unique<KeepAllOracle>();
  if (config.kind == "hashed") {
    return std::make_unique<HashedOracle>(config.seed, config.pruneFraction,
                                          config.confidence);
  }
  throw std::invalid_argument("unknown oracle kind '" + config.kind +
                              "' (expected prune-all, keep-all or hashed)");
}

PipelineConfig parsePipelineConfig(const json& j,
                                   const std::filesystem::path& baseDir) {
  if (!j.is_object()) throw FormatError("pipeline config must be a JSON object");
  PipelineConfig c;
  readOptional(j, "corpus", c.corpus);
  readOptional(j, "sweep", c.sweep);
  readOptional(j, "threshold", c.threshold);
  readOptional(j, "cves", c.cves);
  readOptional(j, "cveSeed", c.cveSeed);
  readOptional(j, "applicationProject", c.applicationProject);
  readOptional(j, "excludeCoreFromPool", c.excludeCoreFromPool);
  readOptional(j, "warmup", c.warmup);
  readOptional(j, "repetitions", c.repetitions);
  readOptional(j, "corePrefixes", c.corePrefixes);
  readOptional(j, "summaryOrigins", c.summaryOrigins);
  readOptional(j, "jobs", c.jobs);

  std::string mode = "exhaustive";
  readOptional(j, "mode", mode);
  if (mode == "exhaustive") {
    c.mode = PruneMode::Exhaustive;
  } else if (mode == "selective") {
    c.mode = PruneMode::Selective;
  } else {
    throw FormatError("config field 'mode' must be exhaustive or selective");
  }
  if (!(c.threshold >= 0.0 && c.threshold <= 1.0)) {
    throw FormatError("config field 'threshold' must lie in [0,1]");
  }
  if (c.cves == 0) throw FormatError("config field 'cves' must be positive");

  if (auto it = j.find("oracle"); it != j.end()) {
    readOptional(*it, "kind", c.oracle.kind);
    readOptional(*it, "pruneFraction", c.oracle.pruneFraction);
    readOptional(*it, "confidence", c.oracle.confidence);
    readOptional(*it, "seed", c.oracle.seed);
  }
  if (auto it = j.find("localness"); it != j.end()) {
    std::string rule = "shared-ancestor";
    std::string boundary = "project";
    readOptional(*it, "hierarchyRule", rule);
    readOptional(*it, "boundary", boundary);
    if (rule == "strict") {
      c.localness.hierarchyRule = HierarchyRule::Strict;
    } else if (rule == "shared-ancestor") {
      c.localness.hierarchyRule = HierarchyRule::SharedNonCoreAncestor;
    } else {
      throw FormatError("localness.hierarchyRule must be strict or shared-ancestor");
    }
    if (boundary == "project") {
      c.localness.boundary = ProjectBoundary::Project;
    } else if (boundary == "package") {
      c.localness.boundary = ProjectBoundary::Package;
    } else {
      throw FormatError("localness.boundary must be project or package");
    }
  }

  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : baseDir / path;
  };
  if (auto it = j.find("graphs"); it != j.end()) {
    if (!it->is_array()) throw FormatError("config field 'graphs' must be a list");
    for (const auto& g : *it) {
      GraphSource src;
      readOptional(g, "name", src.name);
      std::string bundle, hierarchy, callGraph;
      readOptional(g, "bundle", bundle);
      readOptional(g, "hierarchy", hierarchy);
      readOptional(g, "callGraph", callGraph);
      if (!bundle.empty()) hierarchy = callGraph = bundle;
      if (hierarchy.empty() || callGraph.empty()) {
        throw FormatError("graph entries need 'bundle' or both 'hierarchy' and "
                          "'callGraph'");
      }
      src.hierarchy = resolve(hierarchy);
      src.callGraph = resolve(callGraph);
      if (src.name.empty()) src.name = src.callGraph.stem().string();
      if (auto app = g.find("applicationProject"); app != g.end()) {
        src.applicationProject = app->get<std::string>();
      }
      c.graphs.push_back(std::move(src));
    }
  }
  if (auto it = j.find("synthetic"); it != j.end()) {
    std::size_t count = 1;
    std::uint64_t seed = 1;
    readOptional(*it, "count", count);
    readOptional(*it, "seed", seed);
    GenParams params = parseGenParams(it->value("params", json::object()));
    for (std::size_t i = 0; i < count; ++i) {
      GraphSource src;
      params.seed = seed + i;
      src.name = "synthetic-" + std::to_string(params.seed);
      src.synthetic = params;
      c.graphs.push_back(std::move(src));
    }
  }
  if (c.graphs.empty()) throw FormatError("pipeline config names no graphs");
  return c;
}

PipelineConfig loadPipelineConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return parsePipelineConfig(j, path.parent_path());
}

ColumnStats columnStats(const std::vector<double>& values) {
  ColumnStats s;
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double sq = 0.0;
    for (double v : values) sq += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(sq / static_cast<double>(values.size() - 1));
  }
  return s;
}

std::vector<AggregateRow> AnalysisReport::aggregates() const {
  std::map<std::size_t, std::vector<const GraphRecord*>> byTopN;
  std::vector<std::size_t> order;
  for (const auto& r : records) {
    if (!byTopN.contains(r.topN)) order.push_back(r.topN);
    auto& bucket = byTopN[r.topN];
    if (r.ok()) bucket.push_back(&r);
  }
  std::vector<AggregateRow> out;
  for (std::size_t n : order) {
    const auto& bucket = byTopN[n];
    auto stats = [&](auto member) {
      std::vector<double> values;
      for (const auto* r : bucket) values.push_back(static_cast<double>(member(*r)));
      return columnStats(values);
    };
    AggregateRow row;
    row.topN = n;
    row.graphs = bucket.size();
    row.nodes = stats([](const GraphRecord& r) { return r.nodes; });
    row.edges = stats([](const GraphRecord& r) { return r.edges; });
    row.reduction = stats([](const GraphRecord& r) { return r.reduction; });
    row.pairs = stats([](const GraphRecord& r) { return r.reachablePairs; });
    row.fraction = stats([](const GraphRecord& r) { return r.reachableFraction; });
    row.analysisSeconds =
        stats([](const GraphRecord& r) { return r.analysisSeconds; });
    row.pruneSeconds = stats([](const GraphRecord& r) { return r.pruneSeconds; });
    out.push_back(row);
  }
  return out;
}

AnalysisReport runPipeline(const PipelineConfig& config) {
  std::vector<GraphOutcome> outcomes(config.graphs.size());
  const std::size_t workers =
      std::max<std::size_t>(1, std::min(config.jobs, config.graphs.size()));
  if (workers == 1) {
    for (std::size_t i = 0; i < config.graphs.size(); ++i) {
      outcomes[i] = analyzeGraph(config, config.graphs[i]);
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (auto i = next++; i < config.graphs.size(); i = next++) {
          outcomes[i] = analyzeGraph(config, config.graphs[i]);
        }
      });
    }
  }

  AnalysisReport report;
  report.corpus = config.corpus;
  for (auto& o : outcomes) {
    report.summaries.push_back(std::move(o.summary));
    for (auto& r : o.records) report.records.push_back(std::move(r));
  }
  return report;
}

void writeReportCsv(std::ostream& out, const AnalysisReport& report,
                    bool includeTiming) {
  out << "corpus,graph,top_n,status,nodes,edges,candidate_edges,pruned_edges,"
         "reduction,reachable_pairs,reachable_fraction,pair_delta,"
         "fraction_delta";
  if (includeTiming) out << ",analysis_seconds,prune_seconds";
  out << '\n';
  for (const auto& r : report.records) {
    out << csvField(report.corpus) << ',' << csvField(r.graph) << ',' << r.topN
        << ',' << csvField(r.status) << ',' << r.nodes << ',' << r.edges << ','
        << r.candidateEdges << ',' << r.prunedEdges << ',' << number(r.reduction)
        << ',' << r.reachablePairs << ',' << number(r.reachableFraction) << ','
        << r.pairDelta << ',' << number(r.fractionDelta);
    if (includeTiming) {
      out << ',' << number(r.analysisSeconds) << ',' << number(r.pruneSeconds);
    }
    out << '\n';
  }
}

void writeAggregateCsv(std::ostream& out, const AnalysisReport& report,
                       bool includeTiming) {
  out << "top_n,graphs,nodes_mean,nodes_sd,edges_mean,edges_sd,reduction_mean,"
         "reduction_sd,pairs_mean,pairs_sd,fraction_mean,fraction_sd";
  if (includeTiming) {
    out << ",analysis_seconds_mean,analysis_seconds_sd,prune_seconds_mean,"
           "prune_seconds_sd";
  }
  out << '\n';
  for (const auto& a : report.aggregates()) {
    out << a.topN << ',' << a.graphs;
    auto put = [&](const ColumnStats& s) {
      out << ',' << number(s.mean) << ',' << number(s.stddev);
    };
    put(a.nodes);
    put(a.edges);
    put(a.reduction);
    put(a.pairs);
    put(a.fraction);
    if (includeTiming) {
      put(a.analysisSeconds);
      put(a.pruneSeconds);
    }
    out << '\n';
  }
}

json reportToJson(const AnalysisReport& report, bool includeTiming) {
  auto stats = [](const ColumnStats& s) {
    return json{{"mean", s.mean}, {"sd", s.stddev}};
  };
  json records = json::array();
  for (const auto& r : report.records) {
    json rec{{"graph", r.graph},
             {"topN", r.topN},
             {"status", r.status},
             {"nodes", r.nodes},
             {"edges", r.edges},
             {"candidateEdges", r.candidateEdges},
             {"prunedEdges", r.prunedEdges},
             {"reduction", r.reduction},
             {"reachablePairs", r.reachablePairs},
             {"reachableFraction", r.reachableFraction},
             {"pairDelta", r.pairDelta},
             {"fractionDelta", r.fractionDelta}};
    if (includeTiming) {
      rec["analysisSeconds"] = r.analysisSeconds;
      rec["pruneSeconds"] = r.pruneSeconds;
    }
    records.push_back(std::move(rec));
  }
  json aggregates = json::array();
  for (const auto& a : report.aggregates()) {
    json agg{{"topN", a.topN},          {"graphs", a.graphs},
             {"nodes", stats(a.nodes)}, {"edges", stats(a.edges)},
             {"reduction", stats(a.reduction)}, {"pairs", stats(a.pairs)},
             {"fraction", stats(a.fraction)}};
    if (includeTiming) {
      agg["analysisSeconds"] = stats(a.analysisSeconds);
      agg["pruneSeconds"] = stats(a.pruneSeconds);
    }
    aggregates.push_back(std::move(agg));
  }
  json summaries = json::array();
  for (const auto& s : report.summaries) {
    json origins = json::array();
    for (const auto& o : s.topOrigins) {
      origins.push_back({{"origin", o.origin},
                         {"edgeCount", o.edgeCount},
                         {"derivatives", o.derivatives},
                         {"localness", o.localness}});
    }
    summaries.push_back({{"graph", s.graph},
                         {"status", s.status},
                         {"nodes", s.nodes},
                         {"edges", s.edges},
                         {"collapsedDuplicates", s.collapsedDuplicates},
                         {"ambiguousOrigins", s.ambiguousOrigins},
                         {"vulnerable", s.vulnerable},
                         {"topOrigins", std::move(origins)}});
  }
  return json{{"corpus", report.corpus},
              {"records", std::move(records)},
              {"aggregates", std::move(aggregates)},
              {"graphs", std::move(summaries)}};
}

}  // namespace cgprune

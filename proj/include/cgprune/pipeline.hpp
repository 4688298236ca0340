#pragma once

// End-to-end batch run: load or generate each graph, find origins, rank them,
// label localness, then for every Top-N in the sweep prune, inject artificial
// vulnerabilities and compare reachability against the unpruned graph.

#include <array>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cgprune/localness.hpp"
#include "cgprune/pruning.hpp"
#include "cgprune/synth.hpp"
#include "json.hpp"

namespace cgprune {

enum class PruneMode { Exhaustive, Selective };

struct OracleConfig {
  std::string kind = "prune-all";  // prune-all | keep-all | hashed
  double pruneFraction = 0.5;      // hashed only
  double confidence = 1.0;
  std::uint64_t seed = 0;
};

/// Throws std::invalid_argument for an unknown kind.
std::unique_ptr<PruneDecisionOracle> makeOracle(const OracleConfig& config);

struct GraphSource {
  std::string name;
  std::filesystem::path hierarchy;  // may equal callGraph for bundles
  std::filesystem::path callGraph;
  std::optional<GenParams> synthetic;
  std::optional<std::string> applicationProject;
};

struct PipelineConfig {
  std::string corpus = "corpus";
  std::vector<GraphSource> graphs;
  std::vector<std::size_t> sweep = {1, 2, 3, 5, 10, 25, 50, 100, 1000};
  PruneMode mode = PruneMode::Exhaustive;
  double threshold = 0.95;
  OracleConfig oracle;
  std::size_t cves = 100;
  std::uint64_t cveSeed = 1;
  std::string applicationProject = kSyntheticApplicationProject;
  bool excludeCoreFromPool = true;
  std::size_t warmup = 1;
  std::size_t repetitions = 3;
  std::vector<std::string> corePrefixes;
  LocalnessOptions localness;
  std::size_t summaryOrigins = 10;
  std::size_t jobs = 1;
};

/// Relative paths resolve against `baseDir`. Throws FormatError.
PipelineConfig parsePipelineConfig(const nlohmann::json& config,
                                   const std::filesystem::path& baseDir);
PipelineConfig loadPipelineConfig(const std::filesystem::path& path);

struct GraphRecord {
  std::string graph;
  std::size_t topN = 0;
  std::string status = "ok";
  std::size_t nodes = 0;
  std::size_t edges = 0;
  std::size_t candidateEdges = 0;
  std::size_t prunedEdges = 0;
  double reduction = 0.0;
  std::size_t reachablePairs = 0;
  double reachableFraction = 0.0;
  std::int64_t pairDelta = 0;
  double fractionDelta = 0.0;
  double analysisSeconds = 0.0;
  double pruneSeconds = 0.0;

  bool ok() const { return status == "ok"; }
};

struct OriginSummary {
  std::string origin;
  std::size_t edgeCount = 0;
  std::size_t derivatives = 0;
  std::array<double, 4> localness{};
};

struct GraphSummary {
  std::string graph;
  std::string status = "ok";
  std::size_t nodes = 0;
  std::size_t edges = 0;
  std::size_t collapsedDuplicates = 0;
  std::size_t ambiguousOrigins = 0;
  std::size_t vulnerable = 0;
  std::vector<OriginSummary> topOrigins;
};

struct ColumnStats {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation; 0 for a single value
};

ColumnStats columnStats(const std::vector<double>& values);

struct AggregateRow {
  std::size_t topN = 0;
  std::size_t graphs = 0;
  ColumnStats nodes, edges, reduction, pairs, fraction, analysisSeconds,
      pruneSeconds;
};

struct AnalysisReport {
  std::string corpus;
  std::vector<GraphRecord> records;  // graph order, then sweep order
  std::vector<GraphSummary> summaries;

  /// Per-Top-N mean and standard deviation over successful records.
  std::vector<AggregateRow> aggregates() const;
};

AnalysisReport runPipeline(const PipelineConfig& config);

void writeReportCsv(std::ostream& out, const AnalysisReport& report,
                    bool includeTiming = true);
void writeAggregateCsv(std::ostream& out, const AnalysisReport& report,
                       bool includeTiming = true);
nlohmann::json reportToJson(const AnalysisReport& report,
                            bool includeTiming = true);

}  // namespace cgprune

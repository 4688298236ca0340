#pragma once

// Interchange formats.
//
// Graphs travel as JSON lines: one header record, then type records, node
// records and edge records, in that order. A file may carry only the
// hierarchy part, only the call graph part, or both (a "bundle").
//
//   {"kind":"header","format":"cgprune","schema":1,"coreProject":"jre","projects":[...]}
//   {"kind":"type","id":"T1","fqName":"java.util.Iterator","parents":["T0"],
//    "project":"jre","package":"java.util","core":true,"methods":["next():java.lang.Object"]}
//   {"kind":"node","id":0,"type":"T1","method":"next():java.lang.Object"}
//   {"kind":"edge","source":0,"target":3,"receiver":"T1"}
//
// Node ids must appear as 0, 1, 2, ... in file order.

#include <filesystem>
#include <iosfwd>
#include <string>

#include "cgprune/graph.hpp"
#include "cgprune/localness.hpp"
#include "cgprune/origins.hpp"
#include "cgprune/pruning.hpp"
#include "cgprune/vuln.hpp"
#include "json.hpp"

namespace cgprune {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kFormatName = "cgprune";

TypeHierarchy readHierarchy(std::istream& in, const std::string& source);
CallGraph readCallGraph(std::istream& in, const TypeHierarchy& h,
                        const std::string& source);

void writeHierarchy(std::ostream& out, const TypeHierarchy& h);
void writeCallGraph(std::ostream& out, const CallGraph& cg,
                    const TypeHierarchy& h);
void writeBundle(std::ostream& out, const TypeHierarchy& h, const CallGraph& cg);

TypeHierarchy loadHierarchy(const std::filesystem::path& path);
CallGraph loadCallGraph(const std::filesystem::path& path,
                        const TypeHierarchy& h);
void saveHierarchy(const std::filesystem::path& path, const TypeHierarchy& h);
void saveCallGraph(const std::filesystem::path& path, const CallGraph& cg,
                   const TypeHierarchy& h);
void saveBundle(const std::filesystem::path& path, const TypeHierarchy& h,
                const CallGraph& cg);

// Exclusion lists: `signature<TAB>originTypeFqName` per line; lines starting
// with '#' are comments, `# top-n=<N>` restores declaredSize.
ExclusionList readExclusionList(std::istream& in, const TypeHierarchy& h,
                                const std::string& source);
void writeExclusionList(std::ostream& out, const ExclusionList& excl,
                        const TypeHierarchy& h);

// Assignments: `# seed=<S> requested=<K>` then one node id per line.
VulnerabilityAssignment readAssignment(std::istream& in,
                                       const std::string& source);
void writeAssignment(std::ostream& out, const VulnerabilityAssignment& a);

/// `fqName.signature`, the human-facing name of an origin.
std::string originLabel(const TypeHierarchy& h, const OriginRef& origin);
std::string csvField(const std::string& value);

void writeFrequencyCsv(std::ostream& out, const OriginFrequencyTable& table,
                       const TypeHierarchy& h);
void writeDerivativeCsv(std::ostream& out, const std::vector<DerivativeRow>& rows,
                        const TypeHierarchy& h);
void writeLocalnessCsv(std::ostream& out, const LocalnessDistribution& dist,
                       const TypeHierarchy& h);
void writeLabelsCsv(std::ostream& out, const CallGraph& cg,
                    const std::vector<LocalnessLevel>& labels);

nlohmann::json toJson(const PruneResult& r);
nlohmann::json toJson(const ReachabilityResult& r);
nlohmann::json toJson(const DeltaReport& d);

double seconds(std::chrono::nanoseconds d);

}  // namespace cgprune

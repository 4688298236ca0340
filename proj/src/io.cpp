#include "cgprune/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace cgprune {

using nlohmann::json;

namespace {

enum class Section { Header, Types, Nodes, Edges };

int sectionOrder(Section s) { return static_cast<int>(s); }

struct Position {
  const std::string& source;
  std::size_t line;

  std::string prefix() const {
    return source + ":" + std::to_string(line) + ": ";
  }
};

[[noreturn]] void formatError(const Position& pos, const std::string& msg) {
  throw FormatError(pos.prefix() + msg);
}

template <typename T>
T field(const json& record, const char* name, const Position& pos) {
  auto it = record.find(name);
  if (it == record.end()) formatError(pos, std::string("missing field '") + name + "'");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    formatError(pos, std::string("field '") + name + "' has the wrong type");
  }
}

MethodSignature signatureField(const json& record, const char* name,
                               const Position& pos) {
  try {
    return parseSignature(field<std::string>(record, name, pos));
  } catch (const FormatError& e) {
    formatError(pos, e.what());
  }
}

// Streams records one line at a time and enforces header-first and
// type/node/edge ordering.
template <typename OnRecord>
void scanRecords(std::istream& in, const std::string& source,
                 OnRecord&& onRecord) {
  std::string line;
  std::size_t lineNo = 0;
  Section current = Section::Header;
  bool sawHeader = false;
  while (std::getline(in, line)) {
    ++lineNo;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Position pos{source, lineNo};
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      formatError(pos, std::string("malformed JSON record: ") + e.what());
    }
    if (!record.is_object()) formatError(pos, "record is not a JSON object");
    const auto kind = field<std::string>(record, "kind", pos);

    Section section;
    if (kind == "header") {
      section = Section::Header;
    } else if (kind == "type") {
      section = Section::Types;
    } else if (kind == "node") {
      section = Section::Nodes;
    } else if (kind == "edge") {
      section = Section::Edges;
    } else {
      formatError(pos, "unknown record kind '" + kind + "'");
    }

    if (!sawHeader) {
      if (section != Section::Header) {
        formatError(pos, "first record must be the header");
      }
      const auto format = field<std::string>(record, "format", pos);
      if (format != kFormatName) {
        formatError(pos, "unknown format '" + format + "'");
      }
      const int schema = field<int>(record, "schema", pos);
      if (schema != kSchemaVersion) {
        throw SchemaVersionError(pos.prefix().substr(0, pos.prefix().size() - 2),
                                 schema, kSchemaVersion);
      }
      sawHeader = true;
    } else if (section == Section::Header) {
      formatError(pos, "duplicate header record");
    } else if (sectionOrder(section) < sectionOrder(current)) {
      formatError(pos, "'" + kind + "' record out of order (expected header, "
                       "types, nodes, edges)");
    }
    current = section;
    onRecord(section, record, pos);
  }
  if (!sawHeader) {
    throw FormatError(source + ": missing header record");
  }
}

json headerRecord(const TypeHierarchy& h) {
  std::set<std::string> projects;
  for (const auto& t : h.types()) projects.insert(t.projectId);
  projects.insert(h.coreProjectId());
  return json{{"kind", "header"},
              {"format", kFormatName},
              {"schema", kSchemaVersion},
              {"coreProject", h.coreProjectId()},
              {"projects", projects}};
}

void writeTypes(std::ostream& out, const TypeHierarchy& h) {
  for (const auto& t : h.types()) {
    std::vector<std::string> parents;
    for (const auto& p : t.parents) parents.push_back(p.value);
    std::vector<std::string> methods;
    for (const auto& m : t.declaredSignatures) methods.push_back(toString(m));
    json record{{"kind", "type"},       {"id", t.id.value},
                {"fqName", t.fqName},   {"parents", parents},
                {"project", t.projectId}, {"package", t.packageName},
                {"core", t.isCoreLib},  {"methods", methods}};
    out << record.dump() << '\n';
  }
}

void writeNodesAndEdges(std::ostream& out, const CallGraph& cg) {
  for (NodeId i = 0; i < cg.nodeCount(); ++i) {
    const auto& n = cg.node(i);
    json record{{"kind", "node"},
                {"id", i},
                {"type", n.definingType.value},
                {"method", toString(n.signature)}};
    out << record.dump() << '\n';
  }
  for (const auto& e : cg.edges()) {
    json record{{"kind", "edge"},
                {"source", e.source},
                {"target", e.target},
                {"receiver", e.receiverType.value}};
    out << record.dump() << '\n';
  }
}

std::ifstream openInput(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "' for reading");
  return in;
}

std::ofstream openOutput(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  return out;
}

}  // namespace

TypeHierarchy readHierarchy(std::istream& in, const std::string& source) {
  std::vector<TypeNode> types;
  std::string coreProject;
  std::set<std::string> projects;
  bool sawTypes = false;
  scanRecords(in, source, [&](Section section, const json& r,
                              const Position& pos) {
    if (section == Section::Header) {
      coreProject = field<std::string>(r, "coreProject", pos);
      auto list = field<std::vector<std::string>>(r, "projects", pos);
      projects.insert(list.begin(), list.end());
      return;
    }
    if (section != Section::Types) return;
    sawTypes = true;
    TypeNode t;
    t.id = TypeId{field<std::string>(r, "id", pos)};
    t.fqName = field<std::string>(r, "fqName", pos);
    for (auto& p : field<std::vector<std::string>>(r, "parents", pos)) {
      t.parents.push_back(TypeId{std::move(p)});
    }
    t.projectId = field<std::string>(r, "project", pos);
    t.packageName = field<std::string>(r, "package", pos);
    t.isCoreLib = field<bool>(r, "core", pos);
    if (!projects.empty() && !projects.contains(t.projectId)) {
      formatError(pos, "project '" + t.projectId +
                           "' is missing from the header project table");
    }
    auto methods = r.find("methods");
    if (methods == r.end() || !methods->is_array()) {
      formatError(pos, "missing field 'methods'");
    }
    for (const auto& m : *methods) {
      if (!m.is_string()) formatError(pos, "method entries must be strings");
      try {
        t.declaredSignatures.insert(parseSignature(m.get<std::string>()));
      } catch (const FormatError& e) {
        formatError(pos, e.what());
      }
    }
    types.push_back(std::move(t));
  });
  if (!sawTypes) throw FormatError(source + ": no type records");

  TypeHierarchy h(std::move(types), coreProject);
  if (auto violations = validateHierarchy(h); !violations.empty()) {
    throw ValidationError(source + ": invalid hierarchy", std::move(violations));
  }
  return h;
}

CallGraph readCallGraph(std::istream& in, const TypeHierarchy& h,
                        const std::string& source) {
  std::vector<MethodNode> nodes;
  std::vector<CallEdge> edges;
  scanRecords(in, source, [&](Section section, const json& r,
                              const Position& pos) {
    if (section == Section::Nodes) {
      const auto id = field<std::uint64_t>(r, "id", pos);
      if (id != nodes.size()) {
        formatError(pos, "node id " + std::to_string(id) + " out of sequence "
                         "(expected " + std::to_string(nodes.size()) + ")");
      }
      nodes.push_back({TypeId{field<std::string>(r, "type", pos)},
                       signatureField(r, "method", pos)});
    } else if (section == Section::Edges) {
      const auto src = field<std::uint64_t>(r, "source", pos);
      const auto tgt = field<std::uint64_t>(r, "target", pos);
      if (src >= nodes.size() || tgt >= nodes.size()) {
        formatError(pos, "edge endpoint " +
                             std::to_string(src >= nodes.size() ? src : tgt) +
                             " is not a declared node");
      }
      edges.push_back({static_cast<NodeId>(src), static_cast<NodeId>(tgt),
                       TypeId{field<std::string>(r, "receiver", pos)}});
    }
  });

  CallGraph cg(std::move(nodes), std::move(edges));
  if (auto violations = validateCallGraph(cg, h); !violations.empty()) {
    throw ValidationError(source + ": invalid call graph", std::move(violations));
  }
  return cg;
}

void writeHierarchy(std::ostream& out, const TypeHierarchy& h) {
  out << headerRecord(h).dump() << '\n';
  writeTypes(out, h);
}

void writeCallGraph(std::ostream& out, const CallGraph& cg,
                    const TypeHierarchy& h) {
  out << headerRecord(h).dump() << '\n';
  writeNodesAndEdges(out, cg);
}

void writeBundle(std::ostream& out, const TypeHierarchy& h,
                 const CallGraph& cg) {
  out << headerRecord(h).dump() << '\n';
  writeTypes(out, h);
  writeNodesAndEdges(out, cg);
}

TypeHierarchy loadHierarchy(const std::filesystem::path& path) {
  auto in = openInput(path);
  return readHierarchy(in, path.string());
}

CallGraph loadCallGraph(const std::filesystem::path& path,
                        const TypeHierarchy& h) {
  auto in = openInput(path);
  return readCallGraph(in, h, path.string());
}

void saveHierarchy(const std::filesystem::path& path, const TypeHierarchy& h) {
  auto out = openOutput(path);
  writeHierarchy(out, h);
}

void saveCallGraph(const std::filesystem::path& path, const CallGraph& cg,
                   const TypeHierarchy& h) {
  auto out = openOutput(path);
  writeCallGraph(out, cg, h);
}

void saveBundle(const std::filesystem::path& path, const TypeHierarchy& h,
                const CallGraph& cg) {
  auto out = openOutput(path);
  writeBundle(out, h, cg);
}

// --- exclusion lists -------------------------------------------------------

ExclusionList readExclusionList(std::istream& in, const TypeHierarchy& h,
                                const std::string& source) {
  ExclusionList list;
  bool sawSize = false;
  std::string line;
  std::size_t lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    Position pos{source, lineNo};
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      constexpr std::string_view kTag = "# top-n=";
      if (line.starts_with(kTag)) {
        std::string_view digits(line);
        digits.remove_prefix(kTag.size());
        auto [ptr, ec] = std::from_chars(digits.data(),
                                         digits.data() + digits.size(),
                                         list.declaredSize);
        if (ec != std::errc{} || ptr != digits.data() + digits.size()) {
          formatError(pos, "malformed top-n header");
        }
        sawSize = true;
      }
      continue;
    }
    auto tab = line.find('\t');
    if (tab == std::string::npos) {
      formatError(pos, "expected 'signature<TAB>originTypeFqName'");
    }
    MethodSignature sig;
    try {
      sig = parseSignature(std::string_view(line).substr(0, tab));
    } catch (const FormatError& e) {
      formatError(pos, e.what());
    }
    const std::string fq = line.substr(tab + 1);
    const TypeNode* match = nullptr;
    for (const auto& t : h.types()) {
      if (t.fqName != fq) continue;
      if (match) formatError(pos, "type name '" + fq + "' is ambiguous");
      match = &t;
    }
    if (!match) throw LookupError(pos.prefix() + "unknown type '" + fq + "'");
    list.bySignature[sig].insert(match->id);
  }
  if (!sawSize) list.declaredSize = list.entryCount();
  return list;
}

void writeExclusionList(std::ostream& out, const ExclusionList& excl,
                        const TypeHierarchy& h) {
  out << "# top-n=" << excl.declaredSize << '\n';
  for (const auto& [sig, types] : excl.bySignature) {
    for (const auto& t : types) {
      out << toString(sig) << '\t' << h.at(t).fqName << '\n';
    }
  }
}

// --- assignments -----------------------------------------------------------

VulnerabilityAssignment readAssignment(std::istream& in,
                                       const std::string& source) {
  VulnerabilityAssignment a;
  std::string line;
  std::size_t lineNo = 0;
  bool sawHeader = false;
  while (std::getline(in, line)) {
    ++lineNo;
    Position pos{source, lineNo};
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      std::istringstream fields(line.substr(1));
      std::string token;
      while (fields >> token) {
        auto eq = token.find('=');
        if (eq == std::string::npos) continue;
        const auto key = token.substr(0, eq);
        const auto value = token.substr(eq + 1);
        try {
          if (key == "seed") {
            a.seed = std::stoull(value);
            sawHeader = true;
          } else if (key == "requested") {
            a.requestedCount = std::stoull(value);
          }
        } catch (const std::exception&) {
          formatError(pos, "malformed header value '" + token + "'");
        }
      }
      continue;
    }
    NodeId id = 0;
    auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), id);
    if (ec != std::errc{} || ptr != line.data() + line.size()) {
      formatError(pos, "expected a node id, got '" + line + "'");
    }
    a.vulnerableNodes.push_back(id);
  }
  if (!sawHeader) throw FormatError(source + ": missing '# seed=' header");
  std::sort(a.vulnerableNodes.begin(), a.vulnerableNodes.end());
  a.vulnerableNodes.erase(
      std::unique(a.vulnerableNodes.begin(), a.vulnerableNodes.end()),
      a.vulnerableNodes.end());
  return a;
}

void writeAssignment(std::ostream& out, const VulnerabilityAssignment& a) {
  out << "# seed=" << a.seed << " requested=" << a.requestedCount << '\n';
  for (NodeId n : a.vulnerableNodes) out << n << '\n';
}

// --- CSV and records -------------------------------------------------------

std::string originLabel(const TypeHierarchy& h, const OriginRef& origin) {
  const auto idx = h.find(origin.originType);
  const std::string& type = idx ? h.at(*idx).fqName : origin.originType.value;
  return type + "." + toString(origin.signature);
}

std::string csvField(const std::string& value) {
  if (value.find_first_of(",\"\n") == std::string::npos) return value;
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void writeFrequencyCsv(std::ostream& out, const OriginFrequencyTable& table,
                       const TypeHierarchy& h) {
  out << "rank,origin,origin_type,signature,edge_count\n";
  std::size_t rank = 0;
  for (const auto& row : table.rows) {
    out << ++rank << ',' << csvField(originLabel(h, row.origin)) << ','
        << csvField(row.origin.originType.value) << ','
        << csvField(toString(row.origin.signature)) << ',' << row.edgeCount
        << '\n';
  }
}

void writeDerivativeCsv(std::ostream& out,
                        const std::vector<DerivativeRow>& rows,
                        const TypeHierarchy& h) {
  out << "rank,origin,origin_type,signature,derivatives\n";
  std::size_t rank = 0;
  for (const auto& row : rows) {
    out << ++rank << ',' << csvField(originLabel(h, row.origin)) << ','
        << csvField(row.origin.originType.value) << ','
        << csvField(toString(row.origin.signature)) << ','
        << row.derivativeCount << '\n';
  }
}

void writeLocalnessCsv(std::ostream& out, const LocalnessDistribution& dist,
                       const TypeHierarchy& h) {
  out << "origin,level0,level1,level2,level3,derivatives\n";
  std::ostringstream num;
  num << std::setprecision(6) << std::fixed;
  for (const auto& row : dist.rows) {
    out << csvField(originLabel(h, row.origin));
    for (double f : row.frequency) {
      num.str({});
      num << f;
      out << ',' << (row.empty() ? std::string() : num.str());
    }
    out << ',' << row.derivativeCount << '\n';
  }
}

void writeLabelsCsv(std::ostream& out, const CallGraph& cg,
                    const std::vector<LocalnessLevel>& labels) {
  out << "node,type,signature,level\n";
  for (NodeId i = 0; i < cg.nodeCount(); ++i) {
    const auto& n = cg.node(i);
    out << i << ',' << csvField(n.definingType.value) << ','
        << csvField(toString(n.signature)) << ',' << toInt(labels.at(i))
        << '\n';
  }
}

double seconds(std::chrono::nanoseconds d) {
  return std::chrono::duration<double>(d).count();
}

json toJson(const PruneResult& r) {
  return json{{"record", "prune"},
              {"nodes", r.prunedGraph.nodeCount()},
              {"originalEdges", r.originalEdges},
              {"edges", r.prunedGraph.edgeCount()},
              {"candidateEdges", r.candidateEdges},
              {"prunedEdges", r.prunedEdges},
              {"oracleFailures", r.oracleFailures},
              {"reductionRatio", r.reductionRatio},
              {"elapsedSeconds", seconds(r.elapsed)}};
}

json toJson(const ReachabilityResult& r) {
  json out{{"record", "reachability"},
           {"pairs", r.reachablePairs},
           {"reachedVulnerable", r.reachedVulnerable},
           {"vulnerable", r.vulnerableCount},
           {"fraction", r.reachableVulnFraction},
           {"elapsedSeconds", seconds(r.elapsed)}};
  if (!r.pairs.empty()) {
    json pairs = json::array();
    for (const auto& p : r.pairs) {
      pairs.push_back({{"application", p.application},
                       {"vulnerable", p.vulnerable},
                       {"witness", p.witness}});
    }
    out["witnesses"] = std::move(pairs);
  }
  return out;
}

json toJson(const DeltaReport& d) {
  return json{{"record", "delta"},
              {"pairDelta", d.pairDelta},
              {"fractionDelta", d.fractionDelta},
              {"elapsedDeltaSeconds", seconds(d.elapsedDelta)},
              {"speedup", std::isfinite(d.speedup) ? json(d.speedup) : json(nullptr)}};
}

}  // namespace cgprune

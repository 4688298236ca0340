#include "cgprune/errors.hpp"

namespace cgprune {

const char* ruleName(Rule rule) {
  switch (rule) {
    case Rule::DuplicateTypeId: return "duplicate-type-id";
    case Rule::DanglingParent: return "dangling-parent";
    case Rule::Cycle: return "cycle";
    case Rule::CoreProjectMismatch: return "core-project-mismatch";
    case Rule::UnknownType: return "unknown-type";
    case Rule::UndeclaredSignature: return "undeclared-signature";
    case Rule::DuplicateMethod: return "duplicate-method";
    case Rule::EmptySignatureName: return "empty-signature-name";
  }
  return "unknown";
}

std::string describe(const std::vector<Violation>& violations) {
  std::string out;
  for (const auto& v : violations) {
    if (!out.empty()) out += "; ";
    out += v.subject;
    out += ": ";
    out += ruleName(v.rule);
    if (!v.message.empty()) {
      out += " (" + v.message + ")";
    }
  }
  return out;
}

ValidationError::ValidationError(std::vector<Violation> violations)
    : ValidationError("validation failed", std::move(violations)) {}

ValidationError::ValidationError(const std::string& prefix,
                                 std::vector<Violation> violations)
    : Error(prefix + ": " + describe(violations)),
      violations_(std::move(violations)) {}

SchemaVersionError::SchemaVersionError(const std::string& where, int found,
                                       int expected)
    : FormatError(where + ": unsupported schema version " +
                  std::to_string(found) + " (expected " +
                  std::to_string(expected) + ")"),
      found_(found),
      expected_(expected) {}

}  // namespace cgprune

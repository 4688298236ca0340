#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace cgprune {

/// Which structural rule a hierarchy or call graph broke.
enum class Rule {
  DuplicateTypeId,
  DanglingParent,
  Cycle,
  CoreProjectMismatch,
  UnknownType,
  UndeclaredSignature,
  DuplicateMethod,
  EmptySignatureName,
};

const char* ruleName(Rule rule);

struct Violation {
  std::string subject;  // offending typeId or node id
  Rule rule;
  std::string message;
};

std::string describe(const std::vector<Violation>& violations);

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An id (type, node, signature) that does not resolve.
class LookupError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<Violation> violations);
  ValidationError(const std::string& prefix, std::vector<Violation> violations);

  const std::vector<Violation>& violations() const { return violations_; }

 private:
  std::vector<Violation> violations_;
};

/// Malformed input record; the message carries `source:line:` when known.
class FormatError : public Error {
 public:
  using Error::Error;
};

class SchemaVersionError : public FormatError {
 public:
  SchemaVersionError(const std::string& where, int found, int expected);

  int found() const { return found_; }
  int expected() const { return expected_; }

 private:
  int found_;
  int expected_;
};

}  // namespace cgprune

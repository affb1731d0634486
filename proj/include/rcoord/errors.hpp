#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace rcoord {

/// Entry state outside the admissible speed band; no exit-time window exists.
class InfeasibleEntryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A plan was asked to do something its construction rules out
/// (e.g. inverting position on a plan whose speed crosses zero).
class ContractViolationError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Coordinator protocol breach: out-of-order arrival, duplicate in-flight vehicle.
class ProtocolError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Scenario document rejected. `kind` separates malformed text from
/// schema/invariant failures so callers can map them to distinct exit codes;
/// `field` addresses the offending location ("arrivals[2].speed").
class ScenarioError : public std::runtime_error {
 public:
  enum class Kind { syntax, unknown_field, dangling_reference, invariant };

  ScenarioError(Kind kind, std::string field, const std::string& message)
      : std::runtime_error(field.empty() ? message : field + ": " + message),
        kind_(kind),
        field_(std::move(field)) {}

  Kind kind() const noexcept { return kind_; }
  const std::string& field() const noexcept { return field_; }

 private:
  Kind kind_;
  std::string field_;
};

/// File-level failure (missing or unreadable input/output).
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& path, const std::string& message)
      : std::runtime_error(path + ": " + message), path_(path) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace rcoord

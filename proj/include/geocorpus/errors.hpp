#pragma once

#include <stdexcept>
#include <string>

namespace geocorpus {

// Exit codes used by the CLI: 0 success, 1 fatal config/IO, 2 contract violation.
enum class ExitCode : int { ok = 0, fatal = 1, contract = 2 };

// Unrecoverable configuration or I/O problem (missing file, bad format tag, ...).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// A caller broke a documented precondition (dimension mismatch, bad scope, ...).
class ContractError : public std::logic_error {
 public:
  explicit ContractError(const std::string& what) : std::logic_error(what) {}
};

// A statistic is mathematically undefined on the given input (constant series,
// fewer than the minimum pairs). Reported, never silently coerced to 0.
class UndefinedStatError : public std::runtime_error {
 public:
  explicit UndefinedStatError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace geocorpus

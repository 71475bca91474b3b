#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace moralmap {

/// Invalid configuration or parameters supplied by the caller.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input data that violates a file schema or a data invariant.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Mathematical precondition violation (zero norm, empty set, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A pipeline stage failed; carries the stage name.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

/// Collects non-fatal warnings from an operation.
struct Warnings {
  std::vector<std::string> messages;

  void add(std::string message) { messages.push_back(std::move(message)); }
  bool empty() const noexcept { return messages.empty(); }
};

inline void warn(Warnings* sink, std::string message) {
  if (sink != nullptr) sink->add(std::move(message));
}

}  // namespace moralmap

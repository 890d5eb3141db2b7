#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <variant>

namespace carbonfisc {

// Hard failures. The CLI maps each family to its own exit status.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Soft outcomes: absence and degenerate inputs are values, not exceptions.
enum class IssueKind {
  MissingSeries,
  MissingObservation,
  DegenerateBaseline,
  NonpositivePrice,
  NotGlobal,
  MissingCountry,
};

inline const char* to_string(IssueKind k) {
  switch (k) {
    case IssueKind::MissingSeries: return "missing series";
    case IssueKind::MissingObservation: return "missing observation";
    case IssueKind::DegenerateBaseline: return "degenerate baseline";
    case IssueKind::NonpositivePrice: return "nonpositive price";
    case IssueKind::NotGlobal: return "not a World-region pair";
    case IssueKind::MissingCountry: return "missing country";
  }
  return "unknown";
}

struct Issue {
  IssueKind kind;
  std::string detail;

  std::string message() const {
    return detail.empty() ? std::string(to_string(kind))
                          : std::string(to_string(kind)) + ": " + detail;
  }
};

template <typename T>
class Expected {
 public:
  Expected(T value) : state_(std::move(value)) {}
  Expected(Issue issue) : state_(std::move(issue)) {}

  bool has_value() const noexcept { return std::holds_alternative<T>(state_); }
  explicit operator bool() const noexcept { return has_value(); }

  const T& value() const& {
    if (!has_value()) throw InvariantError("Expected::value on " + issue().message());
    return std::get<T>(state_);
  }
  T& value() & {
    if (!has_value()) throw InvariantError("Expected::value on " + issue().message());
    return std::get<T>(state_);
  }
  const T& operator*() const& { return value(); }
  const T* operator->() const { return &value(); }

  const Issue& issue() const { return std::get<Issue>(state_); }

 private:
  std::variant<T, Issue> state_;
};

}  // namespace carbonfisc

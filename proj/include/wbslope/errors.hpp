#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace wbs {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an input value was violated.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// A curvature or derivative that must be nonzero (or of a fixed sign) was not.
class DegenerateError : public Error {
 public:
  using Error::Error;
};

/// A sampled curve does not resolve the low-SNR region well enough.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

/// Malformed file or missing CSV column / config key.
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// The integer bandwidth search hit its cap. Carries the best candidate seen.
class SearchExhausted : public Error {
 public:
  SearchExhausted(long long best_b, double best_residual)
      : Error("bandwidth search exhausted; best b=" + std::to_string(best_b) +
              " residual=" + std::to_string(best_residual)),
        best_b_(best_b),
        best_residual_(best_residual) {}

  long long best_b() const noexcept { return best_b_; }
  double best_residual() const noexcept { return best_residual_; }

 private:
  long long best_b_;
  double best_residual_;
};

/// No perfect matching of weak pairs; `violating_set` is a Hall witness on the
/// first half of the users.
class BoundUnavailable : public Error {
 public:
  BoundUnavailable(const std::string& what, std::vector<int> violating_set)
      : Error(what), violating_set_(std::move(violating_set)) {}

  const std::vector<int>& violating_set() const noexcept { return violating_set_; }

 private:
  std::vector<int> violating_set_;
};

}  // namespace wbs

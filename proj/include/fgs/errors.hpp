#pragma once

#include <stdexcept>
#include <string>

namespace fgs {

// Violated precondition on an argument (dimension mismatch, bad index, ...).
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Invalid experiment or model configuration. The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The requested quantity cannot be computed for this input, e.g. the exact
// MUCOLA kernel for a non-binary vocabulary or a state space over the cap.
// The CLI maps this to exit code 3.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnsupportedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Chain has no unique stationary distribution (reducible or periodic).
class NoUniqueStationaryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotReversibleError : public std::runtime_error {
 public:
  NotReversibleError(const std::string& what, long long from, long long to,
                     double residual)
      : std::runtime_error(what), from_(from), to_(to), residual_(residual) {}

  long long from() const { return from_; }
  long long to() const { return to_; }
  double residual() const { return residual_; }

 private:
  long long from_;
  long long to_;
  double residual_;
};

}  // namespace fgs

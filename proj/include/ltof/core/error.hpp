#pragma once

#include <stdexcept>
#include <string>

namespace ltof {

/// A precondition of an operation was violated by the caller (shape mismatch,
/// stale tape, missing targets, ...).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Training produced non-finite values.
class TrainingDivergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// KKT system at a solution is singular or too ill-conditioned to differentiate.
class DegenerateSystem : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical solver failed (non-finite iterate, infeasible problem, no convergence).
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file or configuration.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define LTOF_REQUIRE(cond, msg)                                                   \
  do {                                                                            \
    if (!(cond)) throw ::ltof::ContractViolation(std::string(__func__) + ": " + (msg)); \
  } while (0)

}  // namespace ltof

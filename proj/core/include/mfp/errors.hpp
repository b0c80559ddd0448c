#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace mfp {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed scenario text (bad JSON, wrong types, missing keys).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// A well-formed scenario that breaks a domain invariant. `field()` names the
/// offending key path, e.g. "futures[1].p".
class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& message)
      : Error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class CombinatorialLimitExceeded : public Error {
 public:
  CombinatorialLimitExceeded(std::size_t requested, std::size_t cap)
      : Error("joint future count " + std::to_string(requested) +
              " exceeds cap " + std::to_string(cap)),
        requested_(requested),
        cap_(cap) {}
  std::size_t requested() const noexcept { return requested_; }
  std::size_t cap() const noexcept { return cap_; }

 private:
  std::size_t requested_;
  std::size_t cap_;
};

class InfeasibleCorridor : public Error {
 public:
  using Error::Error;
};

/// approximate_profile could not find any profile inside the band.
class Infeasible : public Error {
 public:
  using Error::Error;
};

/// The split worklist exceeded its bound of T splits. Indicates a bug.
class RecursionDepthExceeded : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// Pointwise intersection of the futures' corridors is empty inside the
/// locked prefix; the requested lock length is too long.
class EmptyPrefixBand : public Error {
 public:
  EmptyPrefixBand(std::size_t step)
      : Error("prefix corridor intersection empty at step " +
              std::to_string(step)),
        step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

/// Prefix/suffix seam of an extracted plan is discontinuous.
class SeamViolation : public Error {
 public:
  using Error::Error;
};

class NoCorridor : public Error {
 public:
  explicit NoCorridor(std::size_t future_index)
      : Error("future " + std::to_string(future_index) +
              " has no feasible corridor"),
        future_index_(future_index) {}
  std::size_t future_index() const noexcept { return future_index_; }

 private:
  std::size_t future_index_;
};

class NoFeasibleLock : public Error {
 public:
  using Error::Error;
};

class NoPlan : public Error {
 public:
  using Error::Error;
};

/// An enumerated property failed; the message names the offending case.
class AssertionFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace mfp

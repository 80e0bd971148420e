#pragma once

#include <stdexcept>
#include <string>

namespace regimekit {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Precondition violations on statistical inputs (k > n, empty series, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Comparing answers of different kinds; indicates a corrupt log or a wrong
// benchmark binding.
class KindMismatchError : public Error {
 public:
  using Error::Error;
};

// Contingency table with an all-zero row or column.
class DegenerateTableError : public Error {
 public:
  using Error::Error;
};

// Trend test on a series with no variance (pooled rate 0 or 1, or collapsed
// scores).
class ZeroVarianceError : public Error {
 public:
  using Error::Error;
};

// Config file rejected: unknown key, invariant violation, bad template.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Replay backend asked for a (item, round, agent) key not in the fixture.
class FixtureMissError : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent log data: missing rounds, ragged round coverage,
// empty or mixed cohorts, unreadable rows.
class DataError : public Error {
 public:
  using Error::Error;
};

// No simulator parameter setting can reach the requested calibration targets.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

}  // namespace regimekit

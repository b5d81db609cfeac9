// util/errors.h
//
// Exception taxonomy shared across the toolkit.  The command-line driver
// maps these onto process exit codes (usage=1, data=2, numeric=3).

#ifndef DEMIST_UTIL_ERRORS_H_
#define DEMIST_UTIL_ERRORS_H_

#include <stdexcept>
#include <string>

namespace demist {

// Bad flags or flag combinations that the option parser itself cannot catch.
struct UsageError : std::runtime_error {
  explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

// Unreadable or ill-formed files, format mismatches, inconsistent datasets.
struct DataError : std::runtime_error {
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Non-finite values the algorithm cannot recover from (e.g. every cell of a
// training sweep diverged).
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace demist

#endif  // DEMIST_UTIL_ERRORS_H_

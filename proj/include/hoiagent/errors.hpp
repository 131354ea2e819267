#pragma once

#include <stdexcept>

namespace hoiagent {

/// Raised when an input document (vocabulary, dataset, corpus line) breaks
/// its format contract. The message names the offending entry.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a remote backend (policy, tool, embedding service) cannot be
/// reached or answers with a malformed payload.
class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hoiagent

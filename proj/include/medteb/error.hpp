#pragma once

#include <stdexcept>
#include <string>

namespace medteb {

// Base of every error raised by the library. The CLI maps each subclass to a
// process exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input, schema mismatch, violated precondition. Exit code 2.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Embedding or paraphrase provider failed (transport, protocol, lookup miss). Exit code 3.
class ProviderError : public Error {
 public:
  using Error::Error;
};

// A benchmark task failed while evaluating. Exit code 4.
class TaskError : public Error {
 public:
  using Error::Error;
};

inline int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ValidationError*>(&e) != nullptr) return 2;
  if (dynamic_cast<const ProviderError*>(&e) != nullptr) return 3;
  if (dynamic_cast<const TaskError*>(&e) != nullptr) return 4;
  return 1;
}

}  // namespace medteb

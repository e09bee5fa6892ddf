#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace fairot {

// Error taxonomy shared by the library and the CLI. Every failure carries a
// stable class identifier so tools can branch on it without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(std::string error_class, const std::string& message)
      : std::runtime_error(message), class_(std::move(error_class)) {}

  const std::string& error_class() const noexcept { return class_; }

 private:
  std::string class_;
};

// Invalid in-memory inputs: bad labels, empty cells, degenerate slices,
// out-of-range parameters.
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& message) : Error("validation", message) {}
};

// Dataset/model structure does not match what the operation expects
// (missing columns, dimensionality mismatch).
class SchemaError : public Error {
 public:
  explicit SchemaError(const std::string& message) : Error("schema", message) {}
};

// A serialized artifact (model file, config file, tabular input) is
// malformed, truncated, or has an unsupported version.
class FormatError : public Error {
 public:
  explicit FormatError(const std::string& message) : Error("format", message) {}
};

// The operating system refused an I/O operation.
class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error("io", message) {}
};

}  // namespace fairot

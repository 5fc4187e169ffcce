#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace loco {

enum class ErrorKind {
  InvalidField,
  InvalidTrace,
  InsufficientData,
  DegenerateSample,
  Parse,
  Validation,
  InvalidState,
  FileNotFound,
  MalformedConfig,
  PortInUse,
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace loco

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tmkit {

enum class ErrorCode {
  InvalidName,
  DuplicateId,
  UnknownId,
  InvalidKind,
  IllegalFlow,
  RedundantTrigger,
  DisconnectedCover,
  ChronoCycle,
  InvalidDuration,
  NoEvents,
  TooManyInputs,
  UnknownInput,
  InvalidConfig,
  MalformedJson,
};

std::string_view to_string(ErrorCode code);

class ModelError : public std::runtime_error {
 public:
  ModelError(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace tmkit

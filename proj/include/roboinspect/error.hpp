#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace roboinspect {

/// Domain error categories. The CLI maps every one of these to exit code 1.
enum class Errc {
  UnknownTask,
  EmptyDemo,
  ConstraintTaskMismatch,
  MissingSimResult,
  MissingOrderVerdict,
  UnknownTarget,
  PlacementExhausted,
  Transport,
  MissingApiKey,
  MalformedResponse,
  ConfigError,
  EmptyCell,
  NoFailures,
  FixtureShapeMismatch,
  FixtureError,
  InvalidArgument,
};

constexpr std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::UnknownTask: return "UnknownTask";
    case Errc::EmptyDemo: return "EmptyDemo";
    case Errc::ConstraintTaskMismatch: return "ConstraintTaskMismatch";
    case Errc::MissingSimResult: return "MissingSimResult";
    case Errc::MissingOrderVerdict: return "MissingOrderVerdict";
    case Errc::UnknownTarget: return "UnknownTarget";
    case Errc::PlacementExhausted: return "PlacementExhausted";
    case Errc::Transport: return "Transport";
    case Errc::MissingApiKey: return "MissingApiKey";
    case Errc::MalformedResponse: return "MalformedResponse";
    case Errc::ConfigError: return "ConfigError";
    case Errc::EmptyCell: return "EmptyCell";
    case Errc::NoFailures: return "NoFailures";
    case Errc::FixtureShapeMismatch: return "FixtureShapeMismatch";
    case Errc::FixtureError: return "FixtureError";
    case Errc::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace roboinspect

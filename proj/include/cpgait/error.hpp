#pragma once

#include <stdexcept>
#include <string>

namespace cpgait {

/// Malformed or inconsistent user input (bad config, invalid parameters).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Failure of a numerical procedure. Carries the originating module and a
/// reason tag so drivers can report a diagnostic without parsing text.
class NumericalError : public std::runtime_error {
 public:
  enum class Reason {
    kStiffFailure,
    kBlowUp,
    kNoConvergence,
    kAssumptionViolation,
    kDegenerate,
    kSingular,
    kInsufficientEvents,
    kBranchLost,
    kInconsistency,
    kGridMismatch,
    kKickTooLarge,
  };

  NumericalError(std::string module, Reason reason, const std::string& what)
      : std::runtime_error(module + ": " + what), module_(std::move(module)), reason_(reason) {}

  const std::string& module() const noexcept { return module_; }
  Reason reason() const noexcept { return reason_; }

 private:
  std::string module_;
  Reason reason_;
};

const char* to_string(NumericalError::Reason reason) noexcept;

}  // namespace cpgait

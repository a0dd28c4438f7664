#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mmo {

enum class ErrorKind {
  Validation,
  NoEquilibria,
  DegenerateEquilibrium,
  ClassificationFailed,
  StepSizeUnderflow,
  TimeBudgetExceeded,
  NullclineCrossing,
  FocusTooClose,
  TangentialCrossing,
  OnStableManifold,
  HitStableManifold,
  ConditionViolated,
  NotMonotone,
  BisectionFailure,
  InvalidRational,
  InsufficientIntersections,
  EmptyPreimage,
  WidthUnderflow,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Validation: return "Validation";
    case ErrorKind::NoEquilibria: return "NoEquilibria";
    case ErrorKind::DegenerateEquilibrium: return "DegenerateEquilibrium";
    case ErrorKind::ClassificationFailed: return "ClassificationFailed";
    case ErrorKind::StepSizeUnderflow: return "StepSizeUnderflow";
    case ErrorKind::TimeBudgetExceeded: return "TimeBudgetExceeded";
    case ErrorKind::NullclineCrossing: return "NullclineCrossing";
    case ErrorKind::FocusTooClose: return "FocusTooClose";
    case ErrorKind::TangentialCrossing: return "TangentialCrossing";
    case ErrorKind::OnStableManifold: return "OnStableManifold";
    case ErrorKind::HitStableManifold: return "HitStableManifold";
    case ErrorKind::ConditionViolated: return "ConditionViolated";
    case ErrorKind::NotMonotone: return "NotMonotone";
    case ErrorKind::BisectionFailure: return "BisectionFailure";
    case ErrorKind::InvalidRational: return "InvalidRational";
    case ErrorKind::InsufficientIntersections: return "InsufficientIntersections";
    case ErrorKind::EmptyPreimage: return "EmptyPreimage";
    case ErrorKind::WidthUnderflow: return "WidthUnderflow";
  }
  return "Unknown";
}

// Single exception type for the library; `kind` is what callers branch on.
// `index` carries the iteration step or recursion depth where relevant.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what, std::optional<std::size_t> index = std::nullopt)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind), index_(index) {}

  ErrorKind kind() const noexcept { return kind_; }
  std::optional<std::size_t> index() const noexcept { return index_; }

 private:
  ErrorKind kind_;
  std::optional<std::size_t> index_;
};

}  // namespace mmo

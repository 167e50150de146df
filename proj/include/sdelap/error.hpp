#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sdelap {

enum class ErrorKind {
  NonFinite,
  Singular,
  SupportViolation,
  InvalidGrid,
  StructureViolation,
  NotPositiveDefinite,
  NoConvergence,
  DomainExit,
  HessianNotPD,
  InvalidArgument,
  Config,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::Singular: return "Singular";
    case ErrorKind::SupportViolation: return "SupportViolation";
    case ErrorKind::InvalidGrid: return "InvalidGrid";
    case ErrorKind::StructureViolation: return "StructureViolation";
    case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::DomainExit: return "DomainExit";
    case ErrorKind::HessianNotPD: return "HessianNotPD";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::Config: return "Config";
  }
  return "Unknown";
}

}  // namespace sdelap

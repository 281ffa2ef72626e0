#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace crosslist {

enum class ErrorKind {
  // market_data
  SchemaMismatch,
  MissingField,
  NonPositiveMarketCap,
  DuplicateCode,
  UnparsableDate,
  UnparsableNumber,
  DuplicateDate,
  NonPositivePrice,
  UnsortedInputAfterParse,
  EmptyIntersection,
  EventAfterPanelEnd,
  FileNotFound,
  // stats_core
  SeriesTooShort,
  WindowTooLarge,
  DegenerateSample,
  // linear_models
  RankDeficient,
  TooFewObservations,
  AllZeroResiduals,
  TooManyLags,
  ExactFitNoVariance,
  // garch
  InvalidSpec,
  NonFiniteLikelihood,
  NonStationaryParameters,
  // event_study
  InvalidWindows,
  WindowOutOfData,
  UnknownFirm,
  MisalignedOffsets,
  // cli
  InvalidConfig,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::SchemaMismatch: return "SchemaMismatch";
    case ErrorKind::MissingField: return "MissingField";
    case ErrorKind::NonPositiveMarketCap: return "NonPositiveMarketCap";
    case ErrorKind::DuplicateCode: return "DuplicateCode";
    case ErrorKind::UnparsableDate: return "UnparsableDate";
    case ErrorKind::UnparsableNumber: return "UnparsableNumber";
    case ErrorKind::DuplicateDate: return "DuplicateDate";
    case ErrorKind::NonPositivePrice: return "NonPositivePrice";
    case ErrorKind::UnsortedInputAfterParse: return "UnsortedInputAfterParse";
    case ErrorKind::EmptyIntersection: return "EmptyIntersection";
    case ErrorKind::EventAfterPanelEnd: return "EventAfterPanelEnd";
    case ErrorKind::FileNotFound: return "FileNotFound";
    case ErrorKind::SeriesTooShort: return "SeriesTooShort";
    case ErrorKind::WindowTooLarge: return "WindowTooLarge";
    case ErrorKind::DegenerateSample: return "DegenerateSample";
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::TooFewObservations: return "TooFewObservations";
    case ErrorKind::AllZeroResiduals: return "AllZeroResiduals";
    case ErrorKind::TooManyLags: return "TooManyLags";
    case ErrorKind::ExactFitNoVariance: return "ExactFitNoVariance";
    case ErrorKind::InvalidSpec: return "InvalidSpec";
    case ErrorKind::NonFiniteLikelihood: return "NonFiniteLikelihood";
    case ErrorKind::NonStationaryParameters: return "NonStationaryParameters";
    case ErrorKind::InvalidWindows: return "InvalidWindows";
    case ErrorKind::WindowOutOfData: return "WindowOutOfData";
    case ErrorKind::UnknownFirm: return "UnknownFirm";
    case ErrorKind::MisalignedOffsets: return "MisalignedOffsets";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

/// Every failure raised by the library carries a machine-readable kind so
/// callers (and the CLI exit-code mapping) can branch without parsing text.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace crosslist

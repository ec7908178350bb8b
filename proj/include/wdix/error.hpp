#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace wdix {

enum class ErrorCode {
  InvalidArgument,
  UnknownIndicator,
  NetworkFailure,
  CacheCorrupt,
  IoFailure,
  EmptyPanel,
  SchemaMismatch,
  UnknownGroupVar,
  SeriesTooShort,
  NonIncreasingTime,
  LengthMismatch,
  SingleCountry,
  UnlabeledCountry,
  AllPairsMissing,
  UnknownCountry,
  UnknownMetric,
  EmptyGroup,
  UnknownPlot,
  PortInUse,
  DataDirMissing,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::UnknownIndicator: return "UnknownIndicator";
    case ErrorCode::NetworkFailure: return "NetworkFailure";
    case ErrorCode::CacheCorrupt: return "CacheCorrupt";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::EmptyPanel: return "EmptyPanel";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::UnknownGroupVar: return "UnknownGroupVar";
    case ErrorCode::SeriesTooShort: return "SeriesTooShort";
    case ErrorCode::NonIncreasingTime: return "NonIncreasingTime";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::SingleCountry: return "SingleCountry";
    case ErrorCode::UnlabeledCountry: return "UnlabeledCountry";
    case ErrorCode::AllPairsMissing: return "AllPairsMissing";
    case ErrorCode::UnknownCountry: return "UnknownCountry";
    case ErrorCode::UnknownMetric: return "UnknownMetric";
    case ErrorCode::EmptyGroup: return "EmptyGroup";
    case ErrorCode::UnknownPlot: return "UnknownPlot";
    case ErrorCode::PortInUse: return "PortInUse";
    case ErrorCode::DataDirMissing: return "DataDirMissing";
  }
  return "Unknown";
}

// Environmental failures (transport, disk, sockets) as opposed to bad input.
constexpr bool is_io_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::NetworkFailure:
    case ErrorCode::CacheCorrupt:
    case ErrorCode::IoFailure:
    case ErrorCode::PortInUse:
    case ErrorCode::DataDirMissing:
      return true;
    default:
      return false;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace wdix

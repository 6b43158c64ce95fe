#ifndef EMST_ERROR_HPP
#define EMST_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace emst
{

enum class ErrorCode
{
  EmptyDataset,
  InvalidCoordinate,
  DimensionMismatch,
  UnsupportedDimension,
  InvalidParameter,
  InvalidIndex,
  NothingToFind,
  NoOutgoingEdge,
  OracleCapExceeded,
  InternalInvariantViolation,
  ParseError,
  IoError,
};

constexpr std::string_view to_string(ErrorCode code) noexcept
{
  switch (code)
  {
  case ErrorCode::EmptyDataset:
    return "EmptyDataset";
  case ErrorCode::InvalidCoordinate:
    return "InvalidCoordinate";
  case ErrorCode::DimensionMismatch:
    return "DimensionMismatch";
  case ErrorCode::UnsupportedDimension:
    return "UnsupportedDimension";
  case ErrorCode::InvalidParameter:
    return "InvalidParameter";
  case ErrorCode::InvalidIndex:
    return "InvalidIndex";
  case ErrorCode::NothingToFind:
    return "NothingToFind";
  case ErrorCode::NoOutgoingEdge:
    return "NoOutgoingEdge";
  case ErrorCode::OracleCapExceeded:
    return "OracleCapExceeded";
  case ErrorCode::InternalInvariantViolation:
    return "InternalInvariantViolation";
  case ErrorCode::ParseError:
    return "ParseError";
  case ErrorCode::IoError:
    return "IoError";
  }
  return "Unknown";
}

/// All library failures are reported through this exception; `code()` is
/// the stable, machine-checkable part and `what()` carries the details.
class Error : public std::runtime_error
{
public:
  Error(ErrorCode code, std::string const &message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message)
      , _code(code)
  {
  }

  ErrorCode code() const noexcept { return _code; }

private:
  ErrorCode _code;
};

} // namespace emst

#endif

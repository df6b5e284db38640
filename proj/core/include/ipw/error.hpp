#pragma once

#include <stdexcept>
#include <string>

namespace ipw {

/// Error classes. Each maps to a distinct process exit code in the CLI.
enum class ErrorKind {
  contract = 2,
  config = 3,
  parse = 4,
  validation = 5,
  estimation = 6,
  separation = 7,
  threshold = 8,
  bandwidth = 9,
  resampling = 10,
  numerical = 11,
  io = 12,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
};

const char* to_string(ErrorKind kind) noexcept;

#define IPW_DEFINE_ERROR(Name, kind_value)                                 \
  class Name : public Error {                                              \
   public:                                                                 \
    explicit Name(const std::string& what) : Error(kind_value, what) {}    \
  };

/// Violated precondition of a library call (length mismatch, bad range).
IPW_DEFINE_ERROR(ContractError, ErrorKind::contract)
IPW_DEFINE_ERROR(ConfigError, ErrorKind::config)
IPW_DEFINE_ERROR(ParseError, ErrorKind::parse)
IPW_DEFINE_ERROR(ValidationError, ErrorKind::validation)
IPW_DEFINE_ERROR(EstimationError, ErrorKind::estimation)
/// The binary response is (quasi-)separated by the covariates.
IPW_DEFINE_ERROR(SeparationError, ErrorKind::separation)
IPW_DEFINE_ERROR(ThresholdError, ErrorKind::threshold)
IPW_DEFINE_ERROR(BandwidthError, ErrorKind::bandwidth)
IPW_DEFINE_ERROR(ResamplingError, ErrorKind::resampling)
IPW_DEFINE_ERROR(NumericalError, ErrorKind::numerical)
IPW_DEFINE_ERROR(IoError, ErrorKind::io)

#undef IPW_DEFINE_ERROR

}  // namespace ipw

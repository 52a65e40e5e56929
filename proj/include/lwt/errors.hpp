#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lwt {

/// Category of a failure. The CLI maps each category onto its own exit status.
enum class ErrorKind {
  dimension,
  argument,
  index,
  configuration,
  format,
  io,
  usage,
  numeric,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

#define LWT_DEFINE_ERROR(Name, Kind)                                   \
  class Name : public Error {                                          \
   public:                                                             \
    explicit Name(const std::string& message) : Error(Kind, message) {} \
  };

LWT_DEFINE_ERROR(DimensionError, ErrorKind::dimension)
LWT_DEFINE_ERROR(ArgumentError, ErrorKind::argument)
LWT_DEFINE_ERROR(IndexError, ErrorKind::index)
LWT_DEFINE_ERROR(ConfigError, ErrorKind::configuration)
LWT_DEFINE_ERROR(FormatError, ErrorKind::format)
LWT_DEFINE_ERROR(IoError, ErrorKind::io)
LWT_DEFINE_ERROR(UsageError, ErrorKind::usage)
LWT_DEFINE_ERROR(NumericError, ErrorKind::numeric)

#undef LWT_DEFINE_ERROR

}  // namespace lwt

#pragma once

#include <stdexcept>
#include <string>

namespace eelstm {

/// Broad failure classes. The CLI maps these onto process exit codes.
enum class ErrorKind {
  Shape,
  Range,
  Domain,
  Numeric,
  Config,
  Capacity,
  Io,
  Parse,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

#define EELSTM_DEFINE_ERROR(Name, Kind)                                   \
  class Name : public Error {                                             \
   public:                                                                \
    explicit Name(const std::string& what) : Error(ErrorKind::Kind, what) {} \
  };

EELSTM_DEFINE_ERROR(ShapeError, Shape)
EELSTM_DEFINE_ERROR(RangeError, Range)
EELSTM_DEFINE_ERROR(DomainError, Domain)
EELSTM_DEFINE_ERROR(NumericError, Numeric)
EELSTM_DEFINE_ERROR(ConfigError, Config)
EELSTM_DEFINE_ERROR(CapacityError, Capacity)
EELSTM_DEFINE_ERROR(IoError, Io)
EELSTM_DEFINE_ERROR(ParseError, Parse)

#undef EELSTM_DEFINE_ERROR

}  // namespace eelstm

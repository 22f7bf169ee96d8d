#pragma once

#include <stdexcept>
#include <string>

namespace drs {

// Error taxonomy shared by the C++ core and the C API layer. Every failure
// raised by the library derives from Error so callers can catch one type and
// still recover a stable category code.
enum class ErrorCode {
  invalid_argument = 1,  // bad parameter or malformed request
  io               = 2,  // file not found, unreadable, unwritable
  parse            = 3,  // syntactically bad input file
  validation       = 4,  // input parsed but violates a contract
  numeric          = 5,  // degenerate or non-finite numerical state
  internal         = 6,
};

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

struct InvalidArgumentError : Error {
  explicit InvalidArgumentError(const std::string& what)
      : Error(ErrorCode::invalid_argument, what) {}
};
struct IoError : Error {
  explicit IoError(const std::string& what) : Error(ErrorCode::io, what) {}
};
struct ParseError : Error {
  explicit ParseError(const std::string& what) : Error(ErrorCode::parse, what) {}
};
struct ValidationError : Error {
  explicit ValidationError(const std::string& what)
      : Error(ErrorCode::validation, what) {}
};
struct NumericError : Error {
  explicit NumericError(const std::string& what)
      : Error(ErrorCode::numeric, what) {}
};

}  // namespace drs

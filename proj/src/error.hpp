#pragma once

#include <stdexcept>
#include <string>

namespace yyf {

enum class ErrorCode {
  invalid_argument = 1,
  unknown_name,
  domain,
  numerical,
  io,
  parse,
  check_failed,
  internal,
};

/// Base error for the toolkit. The code maps one-to-one onto the C API status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, const std::string& what) {
  if (!cond) fail(ErrorCode::invalid_argument, what);
}

}  // namespace yyf

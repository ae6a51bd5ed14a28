#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tmis {

enum class ErrorCode {
  StaleTimestamp,
  TimestampMismatch,
  AuthFailure,
  DigestMismatch,
  BadSignature,
  InvalidPoint,
  UnknownPatient,
  UnknownDoctor,
  RecordIncomplete,
  SerialMismatch,
  MalformedMessage,
  UnexpectedMessage,
  AttackFailed,
};

std::string_view to_string(ErrorCode code);

// Every protocol abort and primitive failure is raised as an Error; the
// simulator converts them into abort records.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code), detail_(detail) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace tmis

#include "tmis/error.hpp"

namespace tmis {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::StaleTimestamp: return "StaleTimestamp";
    case ErrorCode::TimestampMismatch: return "TimestampMismatch";
    case ErrorCode::AuthFailure: return "AuthFailure";
    case ErrorCode::DigestMismatch: return "DigestMismatch";
    case ErrorCode::BadSignature: return "BadSignature";
    case ErrorCode::InvalidPoint: return "InvalidPoint";
    case ErrorCode::UnknownPatient: return "UnknownPatient";
    case ErrorCode::UnknownDoctor: return "UnknownDoctor";
    case ErrorCode::RecordIncomplete: return "RecordIncomplete";
    case ErrorCode::SerialMismatch: return "SerialMismatch";
    case ErrorCode::MalformedMessage: return "MalformedMessage";
    case ErrorCode::UnexpectedMessage: return "UnexpectedMessage";
    case ErrorCode::AttackFailed: return "AttackFailed";
  }
  return "Unknown";
}

}  // namespace tmis

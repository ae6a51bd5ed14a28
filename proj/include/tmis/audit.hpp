#pragma once

// Offline re-check of a transcript file. The secure-channel messages are in
// the transcript, so every key, S_i and signature can be recomputed from
// the file plus the identities and public keys in its header.

#include <string>
#include <vector>

#include "tmis/sim.hpp"

namespace tmis {

struct AuditCheck {
  std::string name;
  bool ok = false;
  std::string detail;
};

struct AuditReport {
  std::vector<AuditCheck> checks;  // stops at the first failure

  bool ok() const { return !checks.empty() && checks.back().ok; }
  const AuditCheck* failure() const { return ok() || checks.empty() ? nullptr : &checks.back(); }
};

AuditReport audit_transcript(const TranscriptFile& file);

}  // namespace tmis

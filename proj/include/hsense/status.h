#ifndef HSENSE_STATUS_H_
#define HSENSE_STATUS_H_

#include <optional>
#include <string_view>

#include "absl/status/status.h"

namespace hsense {

// Stage-level rejection reasons. The tag strings travel on the wire.
enum class Reason {
  kBadProof,
  kDuplicate,
  kStaleTime,
  kBadSignature,
  kNoCredit,
  kIdentifierSpent,
  kBadOpening,
  kOutOfOrderStep,
  kInsufficientBalance,
  kMalformed,
  kTransport,
};

std::string_view ReasonTag(Reason reason);
std::optional<Reason> ReasonFromTag(std::string_view tag);

// A status carrying `reason` as a payload; the message is prefixed with the tag.
absl::Status Reject(Reason reason, std::string_view detail = {});
std::optional<Reason> ReasonOf(const absl::Status& status);

}  // namespace hsense

#endif  // HSENSE_STATUS_H_

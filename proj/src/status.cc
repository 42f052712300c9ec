#include "hsense/status.h"

#include <array>
#include <utility>

#include "absl/strings/cord.h"
#include "hsense/strings.h"

namespace hsense {
namespace {

constexpr char kReasonPayloadUrl[] = "hsense/reason";

constexpr std::array<std::pair<Reason, std::string_view>, 11> kTags = {{
    {Reason::kBadProof, "bad-proof"},
    {Reason::kDuplicate, "duplicate"},
    {Reason::kStaleTime, "stale-time"},
    {Reason::kBadSignature, "bad-signature"},
    {Reason::kNoCredit, "no-credit"},
    {Reason::kIdentifierSpent, "identifier-spent"},
    {Reason::kBadOpening, "bad-opening"},
    {Reason::kOutOfOrderStep, "out-of-order-step"},
    {Reason::kInsufficientBalance, "insufficient-balance"},
    {Reason::kMalformed, "malformed"},
    {Reason::kTransport, "transport"},
}};

absl::StatusCode CodeFor(Reason reason) {
  switch (reason) {
    case Reason::kMalformed:
      return absl::StatusCode::kInvalidArgument;
    case Reason::kDuplicate:
    case Reason::kIdentifierSpent:
      return absl::StatusCode::kAlreadyExists;
    case Reason::kNoCredit:
      return absl::StatusCode::kNotFound;
    case Reason::kBadProof:
    case Reason::kBadSignature:
    case Reason::kBadOpening:
      return absl::StatusCode::kPermissionDenied;
    case Reason::kTransport:
      return absl::StatusCode::kUnavailable;
    case Reason::kStaleTime:
    case Reason::kOutOfOrderStep:
    case Reason::kInsufficientBalance:
      return absl::StatusCode::kFailedPrecondition;
  }
  return absl::StatusCode::kUnknown;
}

}  // namespace

std::string_view ReasonTag(Reason reason) {
  for (const auto& [r, tag] : kTags) {
    if (r == reason) return tag;
  }
  return "unknown";
}

std::optional<Reason> ReasonFromTag(std::string_view tag) {
  for (const auto& [r, t] : kTags) {
    if (t == tag) return r;
  }
  return std::nullopt;
}

absl::Status Reject(Reason reason, std::string_view detail) {
  std::string_view tag = ReasonTag(reason);
  absl::Status status(CodeFor(reason),
                      detail.empty() ? std::string(tag)
                                     : Cat(tag, ": ", detail));
  status.SetPayload(kReasonPayloadUrl, absl::Cord(std::string(tag)));
  return status;
}

std::optional<Reason> ReasonOf(const absl::Status& status) {
  auto payload = status.GetPayload(kReasonPayloadUrl);
  if (!payload) return std::nullopt;
  return ReasonFromTag(std::string(*payload));
}

}  // namespace hsense

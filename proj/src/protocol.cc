#include "hsense/protocol.h"

#include <array>
#include <utility>

#include "absl/status/status.h"
#include "hsense/strings.h"
#include "hsense/hash.h"

namespace hsense {
namespace {

constexpr std::string_view kProtocolTag = "hsense/1";
constexpr std::size_t kMaxSpaceIdLength = 128;

constexpr std::array<std::pair<Stage, std::string_view>, 9> kStageTags = {{
    {Stage::kSetup, "setup"},
    {Stage::kRegister, "register"},
    {Stage::kSubmit, "submit"},
    {Stage::kClaimOpen, "claim-open"},
    {Stage::kClaimReveal, "claim-reveal"},
    {Stage::kClaimRefresh, "claim-refresh"},
    {Stage::kInquireOpen, "inquire-open"},
    {Stage::kInquireReveal, "inquire-reveal"},
    {Stage::kInquireRefresh, "inquire-refresh"},
}};

}  // namespace

std::string_view StageTag(Stage stage) {
  for (const auto& [s, tag] : kStageTags) {
    if (s == stage) return tag;
  }
  return "unknown";
}

std::optional<Stage> StageFromTag(std::string_view tag) {
  for (const auto& [s, t] : kStageTags) {
    if (t == tag) return s;
  }
  return std::nullopt;
}

std::string_view AvailabilityTag(Availability a) {
  switch (a) {
    case Availability::kAvailable:
      return "available";
    case Availability::kOccupied:
      return "occupied";
    case Availability::kUnconfirmed:
      return "unconfirmed";
  }
  return "unconfirmed";
}

std::optional<Availability> AvailabilityFromTag(std::string_view tag) {
  for (Availability a : {Availability::kAvailable, Availability::kOccupied,
                         Availability::kUnconfirmed}) {
    if (AvailabilityTag(a) == tag) return a;
  }
  return std::nullopt;
}

absl::StatusOr<Group> ValidateBundle(const PublicBundle& bundle) {
  absl::StatusOr<Group> group = Group::FromParams(bundle.params);
  if (!group.ok()) return group.status();
  if (group->fingerprint() != bundle.fingerprint) {
    return absl::InvalidArgumentError("params fingerprint mismatch");
  }
  if (bundle.hash_id != kHashId) {
    return absl::InvalidArgumentError("unsupported hash identifier");
  }
  if (bundle.key.n <= 1 || bundle.key.e <= 1) {
    return absl::InvalidArgumentError("malformed server public key");
  }
  if (bundle.nn_bits < 1 ||
      mpz_class(1) << bundle.nn_bits >= bundle.params.p) {
    return absl::InvalidArgumentError("balance bit width does not fit p");
  }
  if (bundle.epsilon < 0) {
    return absl::InvalidArgumentError("negative aggregation window");
  }
  return group;
}

bool IsValidSpaceId(std::string_view space) {
  if (space.empty() || space.size() > kMaxSpaceIdLength) return false;
  for (unsigned char c : space) {
    if (c < 0x20 || c == 0x7F || c == '|') return false;
  }
  return true;
}

Scalar TicketMask(const Group& group, std::string_view space,
                  std::int64_t slot) {
  return group.HashToScalar(Cat(space, "|", EncodeSlot(slot)));
}

std::string ProofContext(const Group& group, Stage stage,
                         std::string_view session, std::string_view detail) {
  return Cat(kProtocolTag, "|", StageTag(stage), "|", session, "|",
                      group.fingerprint(), "|", detail);
}

std::string SubmissionContext(const Group& group, std::string_view space,
                              std::int64_t slot, int availability) {
  return ProofContext(group, Stage::kSubmit, "",
                      Cat(space, "|", slot, "|", availability));
}

std::string ClaimContext(const Group& group, std::string_view session,
                         std::string_view space, std::int64_t slot) {
  return ProofContext(group, Stage::kClaimOpen, session,
                      Cat(space, "|", slot));
}

std::string InquiryContext(const Group& group, std::string_view session) {
  return ProofContext(group, Stage::kInquireOpen, session, "");
}

}  // namespace hsense

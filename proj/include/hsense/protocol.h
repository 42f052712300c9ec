#ifndef HSENSE_PROTOCOL_H_
#define HSENSE_PROTOCOL_H_

// Message types shared by the crowdsensing server and its clients, and the
// endpoint interface both the in-process server and the network stub
// implement.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "hsense/commitment.h"
#include "hsense/group.h"
#include "hsense/sigma.h"
#include "hsense/signature.h"

namespace hsense {

enum class Stage {
  kSetup,
  kRegister,
  kSubmit,
  kClaimOpen,
  kClaimReveal,
  kClaimRefresh,
  kInquireOpen,
  kInquireReveal,
  kInquireRefresh,
};

std::string_view StageTag(Stage stage);
std::optional<Stage> StageFromTag(std::string_view tag);

enum class Availability { kAvailable, kOccupied, kUnconfirmed };

std::string_view AvailabilityTag(Availability a);
std::optional<Availability> AvailabilityFromTag(std::string_view tag);

// Everything a client needs to take part, published at setup.
struct PublicBundle {
  GroupParams params;
  std::string fingerprint;
  PublicKey key;
  std::string hash_id;
  std::uint64_t b0 = 0;
  std::uint64_t c_q = 1;
  int nn_bits = kDefaultNonNegativeBits;
  std::int64_t epsilon = 0;
};

// Rebuilds the group and checks the bundle is internally consistent.
absl::StatusOr<Group> ValidateBundle(const PublicBundle& bundle);

// Space identifiers end up in hash inputs and journal lines.
bool IsValidSpaceId(std::string_view space);

// H(j | t): the public mask of a ticket.
Scalar TicketMask(const Group& group, std::string_view space,
                  std::int64_t slot);

// Domain separation for every Fiat-Shamir proof in the protocol.
std::string ProofContext(const Group& group, Stage stage,
                         std::string_view session, std::string_view detail);
std::string SubmissionContext(const Group& group, std::string_view space,
                              std::int64_t slot, int availability);
std::string ClaimContext(const Group& group, std::string_view session,
                         std::string_view space, std::int64_t slot);
std::string InquiryContext(const Group& group, std::string_view session);

struct RegistrationRequest {
  Commitment cm_s_prime;
  Commitment cm_q;
};

struct RegistrationReply {
  Scalar s_double_prime;
  Signature sig;
};

struct DataEntry {
  std::string space;
  std::int64_t slot = 0;
  Commitment ticket;
  int availability = 0;
};

struct Submission {
  DataEntry entry;
  CmProof proof;  // known-mask proof of s behind the ticket
};

struct ClaimOpenRequest {
  std::string session;
  std::string space;
  std::int64_t slot = 0;
  Commitment ticket;
  CredentialPublic credential;
  LinkProof proof;
};

struct CreditOffer {
  std::string space;
  std::int64_t slot = 0;
  Commitment ticket;
  std::uint64_t credit = 0;
};

struct RevealRequest {
  std::string session;
  Scalar q;
  Scalar r_q;
};

struct RefreshRequest {
  std::string session;
  Commitment cm_q_new;
};

struct InquiryOpenRequest {
  std::string session;
  CredentialPublic credential;
  CmProof proof;         // knowledge of s in cm_s
  NNProof balance_proof; // b - c_q >= 0
  std::vector<std::string> spaces;
};

struct SpaceStatus {
  std::string space;
  Availability status = Availability::kUnconfirmed;
  friend bool operator==(const SpaceStatus&, const SpaceStatus&) = default;
};

struct InquiryResult {
  std::vector<SpaceStatus> statuses;
  Signature sig;
};

class ServerEndpoint {
 public:
  virtual ~ServerEndpoint() = default;

  virtual absl::StatusOr<PublicBundle> Setup() = 0;
  virtual absl::StatusOr<RegistrationReply> Register(
      const RegistrationRequest& request) = 0;
  virtual absl::Status Submit(const Submission& submission) = 0;
  virtual absl::StatusOr<CreditOffer> ClaimOpen(
      const ClaimOpenRequest& request) = 0;
  virtual absl::Status ClaimReveal(const RevealRequest& request) = 0;
  virtual absl::StatusOr<Signature> ClaimRefresh(
      const RefreshRequest& request) = 0;
  virtual absl::Status InquiryOpen(const InquiryOpenRequest& request) = 0;
  virtual absl::Status InquiryReveal(const RevealRequest& request) = 0;
  virtual absl::StatusOr<InquiryResult> InquiryRefresh(
      const RefreshRequest& request) = 0;
};

}  // namespace hsense

#endif  // HSENSE_PROTOCOL_H_

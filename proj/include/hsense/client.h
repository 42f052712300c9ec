#ifndef HSENSE_CLIENT_H_
#define HSENSE_CLIENT_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "absl/status/statusor.h"
#include "hsense/group.h"
#include "hsense/protocol.h"
#include "hsense/random.h"
#include "hsense/signature.h"

namespace hsense {

// Registration material the client keeps until the server replies.
struct PendingRegistration {
  Scalar s_prime;
  Scalar r_s;
  Scalar q;
  Scalar r_q;
  Commitment cm_s_prime;
  Commitment cm_q;
};

// The user agent. Single-session: at most one claim or inquiry in flight.
class Client {
 public:
  static absl::StatusOr<Client> Create(PublicBundle bundle, SecureRng rng);

  const Group& group() const { return group_; }
  const PublicBundle& bundle() const { return bundle_; }
  bool registered() const { return registered_; }
  const CredentialSecret& secret() const { return secret_; }
  const CredentialPublic& credential() const { return credential_; }
  std::uint64_t balance() const { return balance_; }
  const std::map<std::pair<std::string, std::int64_t>, int>& pending_tickets()
      const {
    return pending_;
  }

  // Registration.
  RegistrationRequest BeginRegistration();
  absl::Status FinishRegistration(const RegistrationReply& reply);
  absl::Status Register(ServerEndpoint& server);

  // Submission. Remembers (space, slot) for a later claim.
  absl::StatusOr<Submission> MakeSubmission(const std::string& space,
                                            std::int64_t slot,
                                            int availability);
  absl::Status Submit(ServerEndpoint& server, const std::string& space,
                      std::int64_t slot, int availability);
  Commitment TicketFor(const std::string& space, std::int64_t slot) const;

  // Claim, one step at a time. The local credential only changes in
  // FinishClaim; an abort before ClaimReveal leaves it usable.
  absl::StatusOr<ClaimOpenRequest> ClaimOpen(const std::string& space,
                                             std::int64_t slot);
  absl::StatusOr<RevealRequest> ClaimReveal(const CreditOffer& offer);
  RefreshRequest ClaimRefresh();
  absl::Status FinishClaim(const Signature& sig);
  // Drives all three steps; returns the credit gained.
  absl::StatusOr<std::uint64_t> Claim(ServerEndpoint& server,
                                      const std::string& space,
                                      std::int64_t slot);

  // Inquiry. Refused locally when the balance is below c_q.
  absl::StatusOr<InquiryOpenRequest> InquiryOpen(
      const std::vector<std::string>& spaces);
  RevealRequest InquiryReveal();
  RefreshRequest InquiryRefresh();
  absl::Status FinishInquiry(const InquiryResult& result);
  absl::StatusOr<std::vector<SpaceStatus>> Inquire(
      ServerEndpoint& server, const std::vector<std::string>& spaces);

  // Drops the in-flight session, if any.
  void Abort() { session_.reset(); }

  // Drops pending tickets older than the retention window at `now`.
  void PruneTickets(std::int64_t now);

  // Tagged-line persistence, same family as the server journal.
  std::string Serialize() const;
  static absl::StatusOr<Client> Deserialize(std::string_view text,
                                            SecureRng rng);
  absl::Status Save(const std::string& path) const;
  static absl::StatusOr<Client> Load(const std::string& path, SecureRng rng);

 private:
  enum class SessionKind { kClaim, kInquiry };
  struct Session {
    SessionKind kind = SessionKind::kClaim;
    std::string id;
    int step = 0;  // 1 opened, 2 revealed, 3 refresh sent
    std::pair<std::string, std::int64_t> ticket_key;
    std::uint64_t credit = 0;
    Scalar q_new;
    Scalar r_q_new;
    Commitment cm_q_new;
  };

  Client(PublicBundle bundle, Group group, SecureRng rng);
  std::string NewSessionId();
  RefreshRequest PrepareRefresh();
  absl::Status AdoptCredential(const Signature& sig, const Scalar& new_b);

  PublicBundle bundle_;
  Group group_;
  SecureRng rng_;
  bool registered_ = false;
  std::optional<PendingRegistration> registration_;
  CredentialSecret secret_;
  CredentialPublic credential_;
  std::uint64_t balance_ = 0;
  std::map<std::pair<std::string, std::int64_t>, int> pending_;
  std::optional<Session> session_;
};

// A sensor holds an ordinary credential; its periodic readings go through the
// same submission path as crowdsensed ones.
absl::Status IngestIotReading(Client& sensor, ServerEndpoint& server,
                              const std::string& space, std::int64_t slot,
                              int availability);

}  // namespace hsense

#endif  // HSENSE_CLIENT_H_

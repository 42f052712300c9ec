#ifndef HSENSE_SERVER_H_
#define HSENSE_SERVER_H_

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "absl/status/statusor.h"
#include "hsense/group.h"
#include "hsense/journal.h"
#include "hsense/protocol.h"
#include "hsense/random.h"
#include "hsense/signature.h"

namespace hsense {

struct ServerConfig {
  ServerConfig(Group group, ServerKeys keys)
      : group(std::move(group)), keys(std::move(keys)) {}

  Group group;
  ServerKeys keys;
  std::uint64_t b0 = 0;
  std::uint64_t c_q = 1;
  std::uint64_t credit_per_entry = 1;
  std::int64_t epsilon = 0;          // aggregation half-window, in slots
  double slot_length_s = 60.0;
  int nn_bits = kDefaultNonNegativeBits;
  std::chrono::milliseconds session_timeout{30000};
  std::string journal_path;          // empty: no persistence
  // Current time slot. Defaults to wall-clock seconds / slot_length_s.
  std::function<std::int64_t()> clock;
  std::string rng_seed;              // empty: seed from the system
};

// The crowdsensing server. Holds the data-entry table T_D, the eligible
// credit table T_C and the spent-identifier table T_Q. Safe for concurrent
// use: proofs are verified outside the locks, and every check-then-mutate on
// the tables happens under one lock.
class Server : public ServerEndpoint {
 public:
  static absl::StatusOr<std::unique_ptr<Server>> Create(ServerConfig config);

  const Group& group() const { return config_.group; }
  const ServerConfig& config() const { return config_; }
  std::int64_t Now() const;

  // ServerEndpoint.
  absl::StatusOr<PublicBundle> Setup() override;
  absl::StatusOr<RegistrationReply> Register(
      const RegistrationRequest& request) override;
  absl::Status Submit(const Submission& submission) override;
  absl::StatusOr<CreditOffer> ClaimOpen(const ClaimOpenRequest& request) override;
  absl::Status ClaimReveal(const RevealRequest& request) override;
  absl::StatusOr<Signature> ClaimRefresh(const RefreshRequest& request) override;
  absl::Status InquiryOpen(const InquiryOpenRequest& request) override;
  absl::Status InquiryReveal(const RevealRequest& request) override;
  absl::StatusOr<InquiryResult> InquiryRefresh(
      const RefreshRequest& request) override;

  PublicBundle bundle() const;

  // Accepts a data entry observed at time slot `now`.
  absl::Status HandleSubmission(const DataEntry& entry, const CmProof& proof,
                                std::int64_t now);

  // Majority vote over slots [slot - eps, slot + eps]; ties and empty windows
  // are unconfirmed. Records the status and makes every entry at `slot` that
  // agrees with a decided vote eligible for credit (at most once per ticket).
  Availability Aggregate(const std::string& space, std::int64_t slot);

  // Moves the clock forward. Windows that can no longer receive entries are
  // aggregated, and entries older than the retention window are dropped.
  void AdvanceTo(std::int64_t now);

  // Status at a slot, computed from the current window contents.
  Availability StatusAt(const std::string& space, std::int64_t slot) const;
  // Status of the most recent slot with entries for `space`.
  Availability LatestStatus(const std::string& space) const;

  // Introspection for tests and benchmarks.
  std::size_t data_entry_count() const;
  std::size_t pending_credit_count() const;
  std::size_t spent_identifier_count() const;
  std::uint64_t credits_issued() const;
  std::uint64_t credits_claimed() const;
  bool IsSpent(const Scalar& q) const;
  // Every table in the journal's text form plus the availability map.
  std::string DumpState() const;

 private:
  using EntryKey = std::tuple<std::string, std::int64_t, std::string>;
  struct StoredEntry {
    std::string ticket;  // encoded group element
    int availability;
  };
  enum class Step { kOpened, kRevealed };
  struct Session {
    Stage kind;
    Step step;
    std::chrono::steady_clock::time_point opened_at;
    CredentialPublic credential;
    EntryKey credit_key;
    std::uint64_t credit = 0;
    std::vector<std::string> spaces;
  };

  explicit Server(ServerConfig config);
  absl::Status Replay();
  absl::Status JournalAppend(const std::vector<std::string_view>& fields);

  Availability ComputeStatusLocked(const std::string& space,
                                   std::int64_t slot) const;
  Availability AggregateLocked(const std::string& space, std::int64_t slot);
  void AdvanceLocked(std::int64_t now);

  absl::StatusOr<Session> TakeSession(const std::string& id, Stage kind,
                                      Step expected);
  absl::Status OpenSession(const std::string& id, Session session);
  void PutSession(const std::string& id, Session session);
  absl::Status Reveal(const RevealRequest& request, Stage kind);
  absl::Status SpendIdentifier(const Scalar& q, const EntryKey* credit_key);

  ServerConfig config_;
  std::unique_ptr<Journal> journal_;

  mutable std::mutex rng_mu_;
  SecureRng rng_;

  mutable std::mutex mu_;
  std::map<std::string, std::map<std::int64_t, std::vector<StoredEntry>>>
      table_d_;
  std::set<EntryKey> table_d_keys_;
  std::map<EntryKey, std::uint64_t> table_c_;
  std::set<EntryKey> credited_;
  std::set<std::string> table_q_;
  std::map<std::pair<std::string, std::int64_t>, Availability> availability_;
  std::map<std::string, std::int64_t> finalized_through_;
  std::int64_t current_slot_;
  std::uint64_t credits_issued_ = 0;
  std::uint64_t credits_claimed_ = 0;

  std::mutex session_mu_;
  std::map<std::string, Session> sessions_;
  std::map<std::string, std::chrono::steady_clock::time_point> used_sessions_;
};

}  // namespace hsense

#endif  // HSENSE_SERVER_H_

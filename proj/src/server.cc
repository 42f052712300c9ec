#include "hsense/server.h"

#include <algorithm>
#include <sstream>

#include "absl/status/status.h"

#include "hsense/strings.h"
#include "hsense/commitment.h"
#include "hsense/hash.h"
#include "hsense/status.h"

namespace hsense {
namespace {

std::int64_t WallClockSlot(double slot_length_s) {
  using namespace std::chrono;
  const double secs =
      duration<double>(system_clock::now().time_since_epoch()).count();
  return static_cast<std::int64_t>(secs / slot_length_s);
}

}  // namespace

Server::Server(ServerConfig config)
    : config_(std::move(config)),
      rng_(config_.rng_seed.empty() ? SecureRng::FromSystem()
                                    : SecureRng::FromSeed(config_.rng_seed)),
      current_slot_(std::numeric_limits<std::int64_t>::min()) {
  if (!config_.clock) {
    const double len = config_.slot_length_s;
    config_.clock = [len] { return WallClockSlot(len); };
  }
}

absl::StatusOr<std::unique_ptr<Server>> Server::Create(ServerConfig config) {
  if (config.epsilon < 0) {
    return absl::InvalidArgumentError("epsilon must be non-negative");
  }
  if (config.slot_length_s <= 0) {
    return absl::InvalidArgumentError("slot length must be positive");
  }
  if (config.nn_bits < 1 || config.nn_bits > 62 ||
      mpz_class(1) << config.nn_bits >= config.group.order()) {
    return absl::InvalidArgumentError("balance bit width does not fit p");
  }
  const std::uint64_t limit = std::uint64_t{1} << config.nn_bits;
  if (config.b0 >= limit || config.c_q >= limit ||
      config.credit_per_entry >= limit) {
    return absl::InvalidArgumentError("amounts must fit the balance width");
  }
  std::unique_ptr<Server> server(new Server(std::move(config)));
  if (!server->config_.journal_path.empty()) {
    if (absl::Status s = server->Replay(); !s.ok()) return s;
    absl::StatusOr<std::unique_ptr<Journal>> journal =
        Journal::Open(server->config_.journal_path);
    if (!journal.ok()) return journal.status();
    server->journal_ = *std::move(journal);
  }
  return server;
}

std::int64_t Server::Now() const { return config_.clock(); }

absl::Status Server::Replay() {
  absl::StatusOr<std::vector<std::vector<std::string>>> records =
      Journal::ReadRecords(config_.journal_path);
  if (!records.ok()) return records.status();
  const Group& group = config_.group;
  auto bad = [](std::size_t line) {
    return absl::DataLossError(Cat("corrupt journal record ", line));
  };
  std::size_t line = 0;
  for (const std::vector<std::string>& r : *records) {
    ++line;
    const std::string& tag = r[0];
    if (tag == "TQ" && r.size() == 2) {
      absl::StatusOr<Scalar> q = group.DecodeScalarHex(r[1]);
      if (!q.ok()) return bad(line);
      table_q_.insert(group.Encode(*q));
      continue;
    }
    if ((tag != "TD" && tag != "TC" && tag != "XC") || r.size() < 4) {
      return bad(line);
    }
    std::optional<std::int64_t> slot = ParseInt<std::int64_t>(r[2]);
    absl::StatusOr<GroupElement> ticket = group.DecodeElementHex(r[3]);
    if (!slot || !ticket.ok()) return bad(line);
    EntryKey key{r[1], *slot, group.Encode(*ticket)};
    if (tag == "TD" && r.size() == 5) {
      std::optional<int> a = ParseInt<int>(r[4]);
      if (!a || (*a != 0 && *a != 1)) return bad(line);
      if (table_d_keys_.insert(key).second) {
        table_d_[r[1]][*slot].push_back({std::get<2>(key), *a});
      }
      current_slot_ = std::max(current_slot_, *slot);
    } else if (tag == "TC" && r.size() == 5) {
      std::optional<std::uint64_t> credit = ParseInt<std::uint64_t>(r[4]);
      if (!credit) return bad(line);
      credited_.insert(key);
      table_c_[key] = *credit;
      credits_issued_ += *credit;
    } else if (tag == "XC" && r.size() == 4) {
      auto it = table_c_.find(key);
      if (it != table_c_.end()) {
        credits_claimed_ += it->second;
        table_c_.erase(it);
      }
    } else {
      return bad(line);
    }
  }
  // Restore availability for everything replayed; windows already closed
  // are re-aggregated (credits dedupe on credited_).
  for (const auto& [space, slots] : table_d_) {
    for (const auto& [slot, entries] : slots) {
      availability_[{space, slot}] = ComputeStatusLocked(space, slot);
    }
  }
  return absl::OkStatus();
}

absl::Status Server::JournalAppend(const std::vector<std::string_view>& fields) {
  if (!journal_) return absl::OkStatus();
  return journal_->Append(fields);
}

PublicBundle Server::bundle() const {
  PublicBundle b;
  b.params = config_.group.params();
  b.fingerprint = config_.group.fingerprint();
  b.key = config_.keys.pub;
  b.hash_id = std::string(kHashId);
  b.b0 = config_.b0;
  b.c_q = config_.c_q;
  b.nn_bits = config_.nn_bits;
  b.epsilon = config_.epsilon;
  return b;
}

absl::StatusOr<PublicBundle> Server::Setup() { return bundle(); }

absl::StatusOr<RegistrationReply> Server::Register(
    const RegistrationRequest& request) {
  const Group& group = config_.group;
  Scalar s_double_prime;
  {
    std::lock_guard<std::mutex> lock(rng_mu_);
    s_double_prime = group.RandomScalar(rng_);
  }
  const Commitment cm_s = Combine(
      group, request.cm_s_prime,
      Commit(group, s_double_prime, group.MakeScalar(0)));
  const Commitment cm_b0 = Commit(
      group, group.MakeScalar(static_cast<std::int64_t>(config_.b0)),
      group.MakeScalar(0));
  return RegistrationReply{
      s_double_prime,
      SignCredential(group, config_.keys, cm_s, request.cm_q, cm_b0)};
}

absl::Status Server::Submit(const Submission& submission) {
  return HandleSubmission(submission.entry, submission.proof, Now());
}

absl::Status Server::HandleSubmission(const DataEntry& entry,
                                      const CmProof& proof, std::int64_t now) {
  const Group& group = config_.group;
  if (!IsValidSpaceId(entry.space) ||
      (entry.availability != 0 && entry.availability != 1)) {
    return Reject(Reason::kMalformed, "bad space id or availability bit");
  }
  {
    std::lock_guard<std::mutex> lock(mu_);
    AdvanceLocked(now);
    now = current_slot_;
  }
  if (entry.slot != now && entry.slot != now - 1) {
    return Reject(Reason::kStaleTime,
                  Cat("slot ", entry.slot, " at time ", now));
  }
  if (proof.mode != MaskMode::kKnown ||
      !VerifyCm(group, proof, entry.ticket,
                TicketMask(group, entry.space, entry.slot),
                SubmissionContext(group, entry.space, entry.slot,
                                  entry.availability))) {
    return Reject(Reason::kBadProof, "ticket proof failed");
  }

  std::lock_guard<std::mutex> lock(mu_);
  // The clock may have moved while verifying.
  if (entry.slot < current_slot_ - 1) {
    return Reject(Reason::kStaleTime, "window closed during verification");
  }
  EntryKey key{entry.space, entry.slot, group.Encode(entry.ticket.element)};
  if (!table_d_keys_.insert(key).second) {
    return Reject(Reason::kDuplicate, "entry already recorded");
  }
  table_d_[entry.space][entry.slot].push_back(
      {std::get<2>(key), entry.availability});
  const std::string slot_text = Cat(entry.slot);
  const std::string ticket_hex = HexEncode(std::get<2>(key));
  const std::string a_text = Cat(entry.availability);
  if (absl::Status s =
          JournalAppend({"TD", entry.space, slot_text, ticket_hex, a_text});
      !s.ok()) {
    return s;
  }
  for (std::int64_t t = entry.slot - config_.epsilon;
       t <= entry.slot + config_.epsilon; ++t) {
    availability_[{entry.space, t}] = ComputeStatusLocked(entry.space, t);
  }
  return absl::OkStatus();
}

Availability Server::ComputeStatusLocked(const std::string& space,
                                         std::int64_t slot) const {
  auto it = table_d_.find(space);
  if (it == table_d_.end()) return Availability::kUnconfirmed;
  std::size_t ones = 0;
  std::size_t zeros = 0;
  for (auto s = it->second.lower_bound(slot - config_.epsilon);
       s != it->second.end() && s->first <= slot + config_.epsilon; ++s) {
    for (const StoredEntry& e : s->second) {
      (e.availability ? ones : zeros)++;
    }
  }
  if (ones > zeros) return Availability::kAvailable;
  if (zeros > ones) return Availability::kOccupied;
  return Availability::kUnconfirmed;
}

Availability Server::AggregateLocked(const std::string& space,
                                     std::int64_t slot) {
  const Availability status = ComputeStatusLocked(space, slot);
  availability_[{space, slot}] = status;
  if (status == Availability::kUnconfirmed) return status;
  const int vote = status == Availability::kAvailable ? 1 : 0;

  auto space_it = table_d_.find(space);
  if (space_it == table_d_.end()) return status;
  auto slot_it = space_it->second.find(slot);
  if (slot_it == space_it->second.end()) return status;
  const std::string slot_text = Cat(slot);
  const std::string credit_text = Cat(config_.credit_per_entry);
  for (const StoredEntry& e : slot_it->second) {
    if (e.availability != vote) continue;
    EntryKey key{space, slot, e.ticket};
    if (!credited_.insert(key).second) continue;
    table_c_[key] = config_.credit_per_entry;
    credits_issued_ += config_.credit_per_entry;
    const std::string ticket_hex = HexEncode(e.ticket);
    // Journal failures here are not recoverable per request; the in-memory
    // state stays authoritative for this process.
    (void)JournalAppend({"TC", space, slot_text, ticket_hex, credit_text});
  }
  return status;
}

Availability Server::Aggregate(const std::string& space, std::int64_t slot) {
  std::lock_guard<std::mutex> lock(mu_);
  return AggregateLocked(space, slot);
}

void Server::AdvanceTo(std::int64_t now) {
  std::lock_guard<std::mutex> lock(mu_);
  AdvanceLocked(now);
}

void Server::AdvanceLocked(std::int64_t now) {
  if (now <= current_slot_) return;
  current_slot_ = now;
  const std::int64_t eps = config_.epsilon;
  // Slot t is final once no acceptable slot (now or now-1) lies in its window.
  const std::int64_t final_through = now - eps - 2;
  const std::int64_t keep_from = now - (2 * eps + 2);
  for (auto& [space, slots] : table_d_) {
    auto [fin, inserted] = finalized_through_.try_emplace(
        space, std::numeric_limits<std::int64_t>::min());
    for (auto& [slot, entries] : slots) {
      if (slot > final_through) break;
      if (slot > fin->second) AggregateLocked(space, slot);
    }
    fin->second = std::max(fin->second, final_through);
    while (!slots.empty() && slots.begin()->first < keep_from) {
      for (const StoredEntry& e : slots.begin()->second) {
        table_d_keys_.erase({space, slots.begin()->first, e.ticket});
      }
      slots.erase(slots.begin());
    }
  }
  for (auto it = availability_.begin(); it != availability_.end();) {
    it = it->first.second < keep_from ? availability_.erase(it) : std::next(it);
  }
}

Availability Server::StatusAt(const std::string& space,
                              std::int64_t slot) const {
  std::lock_guard<std::mutex> lock(mu_);
  return ComputeStatusLocked(space, slot);
}

Availability Server::LatestStatus(const std::string& space) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = table_d_.find(space);
  if (it == table_d_.end() || it->second.empty()) {
    return Availability::kUnconfirmed;
  }
  return ComputeStatusLocked(space, it->second.rbegin()->first);
}

absl::Status Server::OpenSession(const std::string& id, Session session) {
  if (id.empty() || id.size() > 128) {
    return Reject(Reason::kMalformed, "missing session nonce");
  }
  std::lock_guard<std::mutex> lock(session_mu_);
  const auto now = std::chrono::steady_clock::now();
  for (auto it = used_sessions_.begin(); it != used_sessions_.end();) {
    it = now - it->second > 2 * config_.session_timeout
             ? used_sessions_.erase(it)
             : std::next(it);
  }
  if (!used_sessions_.emplace(id, now).second) {
    return Reject(Reason::kOutOfOrderStep, "session nonce already used");
  }
  session.opened_at = now;
  sessions_.emplace(id, std::move(session));
  return absl::OkStatus();
}

absl::StatusOr<Server::Session> Server::TakeSession(const std::string& id,
                                                    Stage kind, Step expected) {
  std::lock_guard<std::mutex> lock(session_mu_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) {
    return Reject(Reason::kOutOfOrderStep, "no such session");
  }
  Session session = std::move(it->second);
  sessions_.erase(it);
  if (std::chrono::steady_clock::now() - session.opened_at >
      config_.session_timeout) {
    return Reject(Reason::kOutOfOrderStep, "session expired");
  }
  if (session.kind != kind || session.step != expected) {
    return Reject(Reason::kOutOfOrderStep, "unexpected step");
  }
  return session;
}

void Server::PutSession(const std::string& id, Session session) {
  std::lock_guard<std::mutex> lock(session_mu_);
  sessions_[id] = std::move(session);
}

absl::StatusOr<CreditOffer> Server::ClaimOpen(const ClaimOpenRequest& request) {
  const Group& group = config_.group;
  const CredentialPublic& cred = request.credential;
  if (!IsValidSpaceId(request.space)) {
    return Reject(Reason::kMalformed, "bad space id");
  }
  if (!VerifyCredential(group, config_.keys.pub, cred.cm_s, cred.cm_q,
                        cred.cm_b, cred.sig)) {
    return Reject(Reason::kBadSignature, "credential signature");
  }
  if (!VerifyLink(group, request.proof, cred.cm_s, request.ticket,
                  TicketMask(group, request.space, request.slot),
                  ClaimContext(group, request.session, request.space,
                               request.slot))) {
    return Reject(Reason::kBadProof, "ticket ownership proof");
  }
  EntryKey key{request.space, request.slot,
               group.Encode(request.ticket.element)};
  std::uint64_t credit;
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = table_c_.find(key);
    if (it == table_c_.end()) {
      return Reject(Reason::kNoCredit, "no eligible credit for ticket");
    }
    credit = it->second;
  }
  Session session{Stage::kClaimOpen, Step::kOpened, {}, cred, key, credit, {}};
  if (absl::Status s = OpenSession(request.session, std::move(session));
      !s.ok()) {
    return s;
  }
  return CreditOffer{request.space, request.slot, request.ticket, credit};
}

absl::Status Server::SpendIdentifier(const Scalar& q,
                                     const EntryKey* credit_key) {
  const Group& group = config_.group;
  std::lock_guard<std::mutex> lock(mu_);
  const std::string encoded = group.Encode(q);
  if (table_q_.contains(encoded)) {
    return Reject(Reason::kIdentifierSpent, "credential already used");
  }
  std::map<EntryKey, std::uint64_t>::iterator credit_it;
  if (credit_key) {
    credit_it = table_c_.find(*credit_key);
    if (credit_it == table_c_.end()) {
      return Reject(Reason::kNoCredit, "credit claimed concurrently");
    }
  }
  table_q_.insert(encoded);
  const std::string q_hex = HexEncode(encoded);
  if (absl::Status s = JournalAppend({"TQ", q_hex}); !s.ok()) return s;
  if (credit_key) {
    credits_claimed_ += credit_it->second;
    table_c_.erase(credit_it);
    const auto& [space, slot, ticket] = *credit_key;
    const std::string slot_text = Cat(slot);
    const std::string ticket_hex = HexEncode(ticket);
    if (absl::Status s = JournalAppend({"XC", space, slot_text, ticket_hex});
        !s.ok()) {
      return s;
    }
  }
  return absl::OkStatus();
}

absl::Status Server::Reveal(const RevealRequest& request, Stage kind) {
  absl::StatusOr<Session> session =
      TakeSession(request.session, kind, Step::kOpened);
  if (!session.ok()) return session.status();
  if (!VerifyOpening(config_.group, session->credential.cm_q,
                     {request.q, request.r_q})) {
    return Reject(Reason::kBadOpening, "identifier does not open cm_q");
  }
  // Spending q and consuming the credit record happen together; from here on
  // an abandoned session burns the identifier.
  if (absl::Status s = SpendIdentifier(
          request.q,
          kind == Stage::kClaimOpen ? &session->credit_key : nullptr);
      !s.ok()) {
    return s;
  }
  session->step = Step::kRevealed;
  PutSession(request.session, *std::move(session));
  return absl::OkStatus();
}

absl::Status Server::ClaimReveal(const RevealRequest& request) {
  return Reveal(request, Stage::kClaimOpen);
}

absl::StatusOr<Signature> Server::ClaimRefresh(const RefreshRequest& request) {
  absl::StatusOr<Session> session =
      TakeSession(request.session, Stage::kClaimOpen, Step::kRevealed);
  if (!session.ok()) return session.status();
  const Group& group = config_.group;
  const Commitment cm_b = Shift(
      group, session->credential.cm_b,
      group.MakeScalar(static_cast<std::int64_t>(session->credit)));
  return SignCredential(group, config_.keys, session->credential.cm_s,
                        request.cm_q_new, cm_b);
}

absl::Status Server::InquiryOpen(const InquiryOpenRequest& request) {
  const Group& group = config_.group;
  const CredentialPublic& cred = request.credential;
  for (const std::string& space : request.spaces) {
    if (!IsValidSpaceId(space)) {
      return Reject(Reason::kMalformed, "bad space id");
    }
  }
  if (!VerifyCredential(group, config_.keys.pub, cred.cm_s, cred.cm_q,
                        cred.cm_b, cred.sig)) {
    return Reject(Reason::kBadSignature, "credential signature");
  }
  const std::string context = InquiryContext(group, request.session);
  if (request.proof.mode != MaskMode::kHidden ||
      !VerifyCm(group, request.proof, cred.cm_s, std::nullopt, context)) {
    return Reject(Reason::kBadProof, "secret key proof");
  }
  const Commitment remaining = Shift(
      group, cred.cm_b,
      group.Neg(group.MakeScalar(static_cast<std::int64_t>(config_.c_q))));
  if (!VerifyNN(group, request.balance_proof, remaining, config_.nn_bits,
                context)) {
    return Reject(Reason::kInsufficientBalance, "balance proof");
  }
  Session session{Stage::kInquireOpen, Step::kOpened, {}, cred, {}, 0,
                  request.spaces};
  return OpenSession(request.session, std::move(session));
}

absl::Status Server::InquiryReveal(const RevealRequest& request) {
  return Reveal(request, Stage::kInquireOpen);
}

absl::StatusOr<InquiryResult> Server::InquiryRefresh(
    const RefreshRequest& request) {
  absl::StatusOr<Session> session =
      TakeSession(request.session, Stage::kInquireOpen, Step::kRevealed);
  if (!session.ok()) return session.status();
  const Group& group = config_.group;
  InquiryResult result;
  for (const std::string& space : session->spaces) {
    result.statuses.push_back({space, LatestStatus(space)});
  }
  const Commitment cm_b = Shift(
      group, session->credential.cm_b,
      group.Neg(group.MakeScalar(static_cast<std::int64_t>(config_.c_q))));
  result.sig = SignCredential(group, config_.keys, session->credential.cm_s,
                              request.cm_q_new, cm_b);
  return result;
}

std::size_t Server::data_entry_count() const {
  std::lock_guard<std::mutex> lock(mu_);
  return table_d_keys_.size();
}

std::size_t Server::pending_credit_count() const {
  std::lock_guard<std::mutex> lock(mu_);
  return table_c_.size();
}

std::size_t Server::spent_identifier_count() const {
  std::lock_guard<std::mutex> lock(mu_);
  return table_q_.size();
}

std::uint64_t Server::credits_issued() const {
  std::lock_guard<std::mutex> lock(mu_);
  return credits_issued_;
}

std::uint64_t Server::credits_claimed() const {
  std::lock_guard<std::mutex> lock(mu_);
  return credits_claimed_;
}

bool Server::IsSpent(const Scalar& q) const {
  std::lock_guard<std::mutex> lock(mu_);
  return table_q_.contains(config_.group.Encode(q));
}

std::string Server::DumpState() const {
  std::lock_guard<std::mutex> lock(mu_);
  std::ostringstream out;
  for (const auto& [space, slots] : table_d_) {
    for (const auto& [slot, entries] : slots) {
      for (const StoredEntry& e : entries) {
        out << "TD|" << space << '|' << slot << '|' << HexEncode(e.ticket)
            << '|' << e.availability << '\n';
      }
    }
  }
  for (const auto& [key, credit] : table_c_) {
    const auto& [space, slot, ticket] = key;
    out << "TC|" << space << '|' << slot << '|' << HexEncode(ticket) << '|'
        << credit << '\n';
  }
  for (const std::string& q : table_q_) out << "TQ|" << HexEncode(q) << '\n';
  for (const auto& [key, status] : availability_) {
    out << "AV|" << key.first << '|' << key.second << '|'
        << AvailabilityTag(status) << '\n';
  }
  return out.str();
}

}  // namespace hsense

#include "hsense/client.h"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "absl/status/status.h"
#include "hsense/commitment.h"
#include "hsense/hash.h"
#include "hsense/sigma.h"
#include "hsense/status.h"
#include "hsense/strings.h"

namespace hsense {
namespace {

std::string MpzHex(const mpz_class& v) { return v.get_str(16); }

std::optional<mpz_class> ParseMpzHex(std::string_view s) {
  if (s.empty()) return std::nullopt;
  mpz_class v;
  if (v.set_str(std::string(s), 16) != 0 || v < 0) return std::nullopt;
  return v;
}

absl::Status Corrupt(std::string_view what) {
  return absl::DataLossError(Cat("corrupt client state: ", what));
}

}  // namespace

Client::Client(PublicBundle bundle, Group group, SecureRng rng)
    : bundle_(std::move(bundle)), group_(std::move(group)), rng_(rng) {}

absl::StatusOr<Client> Client::Create(PublicBundle bundle, SecureRng rng) {
  absl::StatusOr<Group> group = ValidateBundle(bundle);
  if (!group.ok()) return group.status();
  return Client(std::move(bundle), *std::move(group), rng);
}

std::string Client::NewSessionId() { return HexEncode(rng_.Bytes(16)); }

RegistrationRequest Client::BeginRegistration() {
  PendingRegistration reg;
  reg.s_prime = group_.RandomScalar(rng_);
  reg.q = group_.RandomScalar(rng_);
  auto [cm_s_prime, s_open] = CommitRandom(group_, reg.s_prime, rng_);
  auto [cm_q, q_open] = CommitRandom(group_, reg.q, rng_);
  reg.r_s = s_open.r;
  reg.r_q = q_open.r;
  reg.cm_s_prime = cm_s_prime;
  reg.cm_q = cm_q;
  registration_ = reg;
  return RegistrationRequest{cm_s_prime, cm_q};
}

absl::Status Client::FinishRegistration(const RegistrationReply& reply) {
  if (!registration_) {
    return absl::FailedPreconditionError("no registration in progress");
  }
  const PendingRegistration& reg = *registration_;
  const Scalar zero = group_.MakeScalar(0);
  CredentialSecret secret{group_.Add(reg.s_prime, reply.s_double_prime),
                          reg.q,
                          group_.MakeScalar(
                              static_cast<std::int64_t>(bundle_.b0)),
                          reg.r_s,
                          reg.r_q,
                          zero};
  CredentialPublic pub{
      Combine(group_, reg.cm_s_prime, Commit(group_, reply.s_double_prime, zero)),
      reg.cm_q, Commit(group_, secret.b, zero), reply.sig};
  if (!VerifyCredential(group_, bundle_.key, pub.cm_s, pub.cm_q, pub.cm_b,
                        pub.sig)) {
    return Reject(Reason::kBadSignature, "registration reply");
  }
  secret_ = secret;
  credential_ = pub;
  balance_ = bundle_.b0;
  registered_ = true;
  registration_.reset();
  return absl::OkStatus();
}

absl::Status Client::Register(ServerEndpoint& server) {
  absl::StatusOr<RegistrationReply> reply =
      server.Register(BeginRegistration());
  if (!reply.ok()) return reply.status();
  return FinishRegistration(*reply);
}

Commitment Client::TicketFor(const std::string& space,
                             std::int64_t slot) const {
  return Commit(group_, secret_.s, TicketMask(group_, space, slot));
}

absl::StatusOr<Submission> Client::MakeSubmission(const std::string& space,
                                                  std::int64_t slot,
                                                  int availability) {
  if (!registered_) return absl::FailedPreconditionError("not registered");
  if (!IsValidSpaceId(space) || (availability != 0 && availability != 1)) {
    return Reject(Reason::kMalformed, "bad space id or availability bit");
  }
  const Scalar mask = TicketMask(group_, space, slot);
  const Commitment ticket = Commit(group_, secret_.s, mask);
  Submission sub;
  sub.entry = DataEntry{space, slot, ticket, availability};
  sub.proof = ProveCm(group_, Opening{secret_.s, mask}, ticket,
                      MaskMode::kKnown,
                      SubmissionContext(group_, space, slot, availability),
                      rng_);
  pending_[{space, slot}] = availability;
  return sub;
}

absl::Status Client::Submit(ServerEndpoint& server, const std::string& space,
                            std::int64_t slot, int availability) {
  absl::StatusOr<Submission> sub = MakeSubmission(space, slot, availability);
  if (!sub.ok()) return sub.status();
  return server.Submit(*sub);
}

absl::StatusOr<ClaimOpenRequest> Client::ClaimOpen(const std::string& space,
                                                   std::int64_t slot) {
  if (!registered_) return absl::FailedPreconditionError("not registered");
  if (session_) return absl::FailedPreconditionError("session in progress");
  if (!pending_.contains({space, slot})) {
    return absl::NotFoundError("no submitted ticket for that space and slot");
  }
  Session session;
  session.kind = SessionKind::kClaim;
  session.id = NewSessionId();
  session.step = 1;
  session.ticket_key = {space, slot};
  const Scalar mask = TicketMask(group_, space, slot);
  ClaimOpenRequest request;
  request.session = session.id;
  request.space = space;
  request.slot = slot;
  request.ticket = Commit(group_, secret_.s, mask);
  request.credential = credential_;
  request.proof = ProveLink(group_, Opening{secret_.s, secret_.r_s},
                            credential_.cm_s, request.ticket, mask,
                            ClaimContext(group_, session.id, space, slot), rng_);
  session_ = std::move(session);
  return request;
}

absl::StatusOr<RevealRequest> Client::ClaimReveal(const CreditOffer& offer) {
  if (!session_ || session_->kind != SessionKind::kClaim ||
      session_->step != 1) {
    return absl::FailedPreconditionError("no opened claim");
  }
  const auto& [space, slot] = session_->ticket_key;
  if (offer.space != space || offer.slot != slot ||
      !(offer.ticket == TicketFor(space, slot))) {
    return Reject(Reason::kMalformed, "offer does not match the claim");
  }
  session_->credit = offer.credit;
  session_->step = 2;
  return RevealRequest{session_->id, secret_.q, secret_.r_q};
}

RefreshRequest Client::PrepareRefresh() {
  session_->q_new = group_.RandomScalar(rng_);
  auto [cm_q, opening] = CommitRandom(group_, session_->q_new, rng_);
  session_->r_q_new = opening.r;
  session_->cm_q_new = cm_q;
  session_->step = 3;
  return RefreshRequest{session_->id, cm_q};
}

RefreshRequest Client::ClaimRefresh() { return PrepareRefresh(); }

absl::Status Client::AdoptCredential(const Signature& sig,
                                     const Scalar& new_b) {
  const Commitment cm_b = Commit(group_, new_b, secret_.r_b);
  if (!VerifyCredential(group_, bundle_.key, credential_.cm_s,
                        session_->cm_q_new, cm_b, sig)) {
    return Reject(Reason::kBadSignature, "refreshed credential");
  }
  secret_.q = session_->q_new;
  secret_.r_q = session_->r_q_new;
  secret_.b = new_b;
  credential_.cm_q = session_->cm_q_new;
  credential_.cm_b = cm_b;
  credential_.sig = sig;
  return absl::OkStatus();
}

absl::Status Client::FinishClaim(const Signature& sig) {
  if (!session_ || session_->kind != SessionKind::kClaim ||
      session_->step != 3) {
    return absl::FailedPreconditionError("no refreshed claim");
  }
  const Scalar new_b = group_.Add(
      secret_.b,
      group_.MakeScalar(static_cast<std::int64_t>(session_->credit)));
  if (absl::Status s = AdoptCredential(sig, new_b); !s.ok()) return s;
  balance_ += session_->credit;
  pending_.erase(session_->ticket_key);
  session_.reset();
  return absl::OkStatus();
}

absl::StatusOr<std::uint64_t> Client::Claim(ServerEndpoint& server,
                                            const std::string& space,
                                            std::int64_t slot) {
  absl::StatusOr<ClaimOpenRequest> open = ClaimOpen(space, slot);
  if (!open.ok()) return open.status();
  absl::StatusOr<CreditOffer> offer = server.ClaimOpen(*open);
  if (!offer.ok()) {
    Abort();
    return offer.status();
  }
  absl::StatusOr<RevealRequest> reveal = ClaimReveal(*offer);
  if (!reveal.ok()) {
    Abort();
    return reveal.status();
  }
  if (absl::Status s = server.ClaimReveal(*reveal); !s.ok()) {
    Abort();
    return s;
  }
  absl::StatusOr<Signature> sig = server.ClaimRefresh(ClaimRefresh());
  if (!sig.ok()) {
    Abort();
    return sig.status();
  }
  const std::uint64_t credit = session_->credit;
  if (absl::Status s = FinishClaim(*sig); !s.ok()) {
    Abort();
    return s;
  }
  return credit;
}

absl::StatusOr<InquiryOpenRequest> Client::InquiryOpen(
    const std::vector<std::string>& spaces) {
  if (!registered_) return absl::FailedPreconditionError("not registered");
  if (session_) return absl::FailedPreconditionError("session in progress");
  for (const std::string& space : spaces) {
    if (!IsValidSpaceId(space)) return Reject(Reason::kMalformed, "space id");
  }
  if (balance_ < bundle_.c_q) {
    return Reject(Reason::kInsufficientBalance,
                  Cat("balance ", balance_, " below inquiry cost ", bundle_.c_q));
  }
  Session session;
  session.kind = SessionKind::kInquiry;
  session.id = NewSessionId();
  session.step = 1;
  const std::string context = InquiryContext(group_, session.id);
  const Scalar cost = group_.MakeScalar(static_cast<std::int64_t>(bundle_.c_q));
  const Scalar remaining = group_.Sub(secret_.b, cost);
  InquiryOpenRequest request;
  request.session = session.id;
  request.credential = credential_;
  request.proof = ProveCm(group_, Opening{secret_.s, secret_.r_s},
                          credential_.cm_s, MaskMode::kHidden, context, rng_);
  absl::StatusOr<NNProof> nn = ProveNN(
      group_, Opening{remaining, secret_.r_b},
      Shift(group_, credential_.cm_b, group_.Neg(cost)), bundle_.nn_bits,
      context, rng_);
  if (!nn.ok()) return nn.status();
  request.balance_proof = *std::move(nn);
  request.spaces = spaces;
  session_ = std::move(session);
  return request;
}

RevealRequest Client::InquiryReveal() {
  session_->step = 2;
  return RevealRequest{session_->id, secret_.q, secret_.r_q};
}

RefreshRequest Client::InquiryRefresh() { return PrepareRefresh(); }

absl::Status Client::FinishInquiry(const InquiryResult& result) {
  if (!session_ || session_->kind != SessionKind::kInquiry ||
      session_->step != 3) {
    return absl::FailedPreconditionError("no refreshed inquiry");
  }
  const Scalar new_b = group_.Sub(
      secret_.b, group_.MakeScalar(static_cast<std::int64_t>(bundle_.c_q)));
  if (absl::Status s = AdoptCredential(result.sig, new_b); !s.ok()) return s;
  balance_ -= bundle_.c_q;
  session_.reset();
  return absl::OkStatus();
}

absl::StatusOr<std::vector<SpaceStatus>> Client::Inquire(
    ServerEndpoint& server, const std::vector<std::string>& spaces) {
  absl::StatusOr<InquiryOpenRequest> open = InquiryOpen(spaces);
  if (!open.ok()) return open.status();
  if (absl::Status s = server.InquiryOpen(*open); !s.ok()) {
    Abort();
    return s;
  }
  if (absl::Status s = server.InquiryReveal(InquiryReveal()); !s.ok()) {
    Abort();
    return s;
  }
  absl::StatusOr<InquiryResult> result = server.InquiryRefresh(InquiryRefresh());
  if (!result.ok()) {
    Abort();
    return result.status();
  }
  if (absl::Status s = FinishInquiry(*result); !s.ok()) {
    Abort();
    return s;
  }
  return result->statuses;
}

void Client::PruneTickets(std::int64_t now) {
  const std::int64_t keep_from = now - (2 * bundle_.epsilon + 2);
  std::erase_if(pending_,
                [&](const auto& kv) { return kv.first.second < keep_from; });
}

std::string Client::Serialize() const {
  std::ostringstream out;
  const GroupParams& p = bundle_.params;
  out << "BP|" << MpzHex(p.q) << '|' << MpzHex(p.p) << '|' << MpzHex(p.g)
      << '|' << MpzHex(p.h) << '|' << p.bits << '\n';
  out << "BK|" << MpzHex(bundle_.key.n) << '|' << MpzHex(bundle_.key.e)
      << '\n';
  out << "BC|" << bundle_.hash_id << '|' << bundle_.b0 << '|' << bundle_.c_q
      << '|' << bundle_.nn_bits << '|' << bundle_.epsilon << '|'
      << bundle_.fingerprint << '\n';
  if (registered_) {
    out << "CS|" << group_.EncodeHex(secret_.s) << '|'
        << group_.EncodeHex(secret_.q) << '|' << group_.EncodeHex(secret_.b)
        << '|' << group_.EncodeHex(secret_.r_s) << '|'
        << group_.EncodeHex(secret_.r_q) << '|'
        << group_.EncodeHex(secret_.r_b) << '|' << balance_ << '\n';
    out << "CP|" << group_.EncodeHex(credential_.cm_s.element) << '|'
        << group_.EncodeHex(credential_.cm_q.element) << '|'
        << group_.EncodeHex(credential_.cm_b.element) << '|'
        << HexEncode(credential_.sig) << '\n';
  }
  for (const auto& [key, a] : pending_) {
    out << "PT|" << key.first << '|' << key.second << '|' << a << '\n';
  }
  return out.str();
}

absl::StatusOr<Client> Client::Deserialize(std::string_view text,
                                           SecureRng rng) {
  PublicBundle bundle;
  std::optional<std::vector<std::string>> cs, cp;
  std::vector<std::vector<std::string>> tickets;
  int header_lines = 0;
  for (const std::string& line : Split(text, '\n')) {
    if (line.empty()) continue;
    std::vector<std::string> f = Split(line, '|');
    if (f[0] == "BP" && f.size() == 6) {
      auto q = ParseMpzHex(f[1]), p = ParseMpzHex(f[2]), g = ParseMpzHex(f[3]),
           h = ParseMpzHex(f[4]);
      auto bits = ParseInt<std::size_t>(f[5]);
      if (!q || !p || !g || !h || !bits) return Corrupt("params");
      bundle.params = GroupParams{*q, *p, *g, *h, *bits};
      ++header_lines;
    } else if (f[0] == "BK" && f.size() == 3) {
      auto n = ParseMpzHex(f[1]), e = ParseMpzHex(f[2]);
      if (!n || !e) return Corrupt("key");
      bundle.key = PublicKey{*n, *e};
      ++header_lines;
    } else if (f[0] == "BC" && f.size() == 7) {
      auto b0 = ParseInt<std::uint64_t>(f[2]);
      auto c_q = ParseInt<std::uint64_t>(f[3]);
      auto nn_bits = ParseInt<int>(f[4]);
      auto eps = ParseInt<std::int64_t>(f[5]);
      if (!b0 || !c_q || !nn_bits || !eps) return Corrupt("bundle");
      bundle.hash_id = f[1];
      bundle.b0 = *b0;
      bundle.c_q = *c_q;
      bundle.nn_bits = *nn_bits;
      bundle.epsilon = *eps;
      bundle.fingerprint = f[6];
      ++header_lines;
    } else if (f[0] == "CS" && f.size() == 8) {
      cs = f;
    } else if (f[0] == "CP" && f.size() == 5) {
      cp = f;
    } else if (f[0] == "PT" && f.size() == 4) {
      tickets.push_back(f);
    } else {
      return Corrupt(Cat("unknown record ", f[0]));
    }
  }
  if (header_lines != 3) return Corrupt("missing bundle");
  absl::StatusOr<Client> client = Create(std::move(bundle), rng);
  if (!client.ok()) return client.status();
  const Group& group = client->group_;
  if (cs.has_value() != cp.has_value()) return Corrupt("partial credential");
  if (cs) {
    std::vector<Scalar> v;
    for (int i = 1; i <= 6; ++i) {
      absl::StatusOr<Scalar> s = group.DecodeScalarHex((*cs)[i]);
      if (!s.ok()) return Corrupt("secret");
      v.push_back(*s);
    }
    auto balance = ParseInt<std::uint64_t>((*cs)[7]);
    std::vector<Commitment> c;
    for (int i = 1; i <= 3; ++i) {
      absl::StatusOr<GroupElement> e = group.DecodeElementHex((*cp)[i]);
      if (!e.ok()) return Corrupt("credential");
      c.push_back(Commitment{*e});
    }
    std::optional<std::string> sig = HexDecode((*cp)[4]);
    if (!balance || !sig) return Corrupt("credential");
    client->secret_ = CredentialSecret{v[0], v[1], v[2], v[3], v[4], v[5]};
    client->credential_ = CredentialPublic{c[0], c[1], c[2], *sig};
    client->balance_ = *balance;
    client->registered_ = true;
    if (!SecretOpensPublic(group, client->secret_, client->credential_) ||
        !(group.MakeScalar(static_cast<std::int64_t>(*balance)) ==
          client->secret_.b)) {
      return Corrupt("secret does not open credential");
    }
  }
  for (const auto& f : tickets) {
    auto slot = ParseInt<std::int64_t>(f[2]);
    auto a = ParseInt<int>(f[3]);
    if (!IsValidSpaceId(f[1]) || !slot || !a) return Corrupt("ticket");
    client->pending_[{f[1], *slot}] = *a;
  }
  return client;
}

absl::Status Client::Save(const std::string& path) const {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << Serialize();
    if (!out.flush()) return absl::UnavailableError("cannot write " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    return absl::UnavailableError("cannot replace " + path);
  }
  return absl::OkStatus();
}

absl::StatusOr<Client> Client::Load(const std::string& path, SecureRng rng) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return Deserialize(buf.str(), rng);
}

absl::Status IngestIotReading(Client& sensor, ServerEndpoint& server,
                              const std::string& space, std::int64_t slot,
                              int availability) {
  return sensor.Submit(server, space, slot, availability);
}

}  // namespace hsense

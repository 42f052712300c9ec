#include "hsense/wire.h"

#include <algorithm>
#include <set>
#include <utility>

#include "absl/status/status.h"
#include "hsense/hash.h"
#include "hsense/status.h"
#include "hsense/strings.h"
#include "json.hpp"

namespace hsense {
namespace {

using json = nlohmann::json;
using FieldSet = std::set<std::string>;

constexpr std::string_view kErrorField = "error";
constexpr std::string_view kMessageField = "message";

const FieldSet kCredentialFields = {"cm_b", "cm_q", "cm_s", "sig"};

FieldSet With(FieldSet base, std::initializer_list<std::string> extra) {
  base.insert(extra);
  return base;
}

const FieldSet& Schema(Stage stage, Direction dir) {
  static const auto* schemas = new std::map<std::pair<Stage, Direction>,
                                            FieldSet>{
      {{Stage::kSetup, Direction::kRequest}, {}},
      {{Stage::kSetup, Direction::kResponse},
       {"b0", "bits", "c_q", "e", "epsilon", "fingerprint", "g", "h",
        "hash_id", "n", "nn_bits", "p", "q"}},
      {{Stage::kRegister, Direction::kRequest}, {"cm_q", "cm_s_prime"}},
      {{Stage::kRegister, Direction::kResponse}, {"s_double_prime", "sig"}},
      {{Stage::kSubmit, Direction::kRequest},
       {"a", "proof_a", "proof_z_x", "slot", "space", "ticket"}},
      {{Stage::kSubmit, Direction::kResponse}, {}},
      {{Stage::kClaimOpen, Direction::kRequest},
       With(kCredentialFields, {"link_a_cred", "link_a_ticket", "link_z_r",
                                "link_z_x", "slot", "space", "ticket"})},
      {{Stage::kClaimOpen, Direction::kResponse},
       {"credit", "slot", "space", "ticket"}},
      {{Stage::kClaimReveal, Direction::kRequest}, {"q", "r_q"}},
      {{Stage::kClaimReveal, Direction::kResponse}, {}},
      {{Stage::kClaimRefresh, Direction::kRequest}, {"cm_q_new"}},
      {{Stage::kClaimRefresh, Direction::kResponse}, {"sig"}},
      {{Stage::kInquireOpen, Direction::kRequest},
       With(kCredentialFields,
            {"nn_a0", "nn_bit_commitments", "nn_branch_a", "nn_branch_beta",
             "nn_branch_z_r", "nn_branch_z_x", "nn_z_r", "proof_a",
             "proof_z_r", "proof_z_x", "spaces"})},
      {{Stage::kInquireOpen, Direction::kResponse}, {}},
      {{Stage::kInquireReveal, Direction::kRequest}, {"q", "r_q"}},
      {{Stage::kInquireReveal, Direction::kResponse}, {}},
      {{Stage::kInquireRefresh, Direction::kRequest}, {"cm_q_new"}},
      {{Stage::kInquireRefresh, Direction::kResponse},
       {"sig", "spaces", "statuses"}},
  };
  return schemas->at({stage, dir});
}

absl::Status Malformed(std::string_view detail) {
  return Reject(Reason::kMalformed, detail);
}

// Reads typed fields out of a body, keeping the first error.
class Reader {
 public:
  Reader(const WireMessage& msg, const Group* group)
      : msg_(msg), group_(group) {}

  const absl::Status& status() const { return status_; }

  std::string Str(const std::string& name) {
    auto it = msg_.body.find(name);
    if (it == msg_.body.end() ||
        !std::holds_alternative<std::string>(it->second)) {
      Fail(Cat("missing string field ", name));
      return {};
    }
    return std::get<std::string>(it->second);
  }

  std::vector<std::string> List(const std::string& name) {
    auto it = msg_.body.find(name);
    if (it == msg_.body.end() ||
        !std::holds_alternative<std::vector<std::string>>(it->second)) {
      Fail(Cat("missing list field ", name));
      return {};
    }
    return std::get<std::vector<std::string>>(it->second);
  }

  template <typename T>
  T Int(const std::string& name) {
    std::optional<T> v = ParseInt<T>(Str(name));
    if (!v) {
      Fail(Cat("bad integer field ", name));
      return T{};
    }
    return *v;
  }

  Scalar ScalarFrom(std::string_view hex, std::string_view name) {
    absl::StatusOr<Scalar> s = group_->DecodeScalarHex(hex);
    if (!s.ok()) {
      Fail(Cat("bad scalar field ", name));
      return {};
    }
    return *s;
  }
  Scalar Sc(const std::string& name) { return ScalarFrom(Str(name), name); }

  Commitment ElementFrom(std::string_view hex, std::string_view name) {
    absl::StatusOr<GroupElement> e = group_->DecodeElementHex(hex);
    if (!e.ok()) {
      Fail(Cat("bad group element field ", name));
      return {};
    }
    return Commitment{*e};
  }
  Commitment El(const std::string& name) {
    return ElementFrom(Str(name), name);
  }

  std::vector<Commitment> Elements(const std::string& name) {
    std::vector<Commitment> out;
    for (const std::string& hex : List(name)) out.push_back(ElementFrom(hex, name));
    return out;
  }
  std::vector<Scalar> Scalars(const std::string& name) {
    std::vector<Scalar> out;
    for (const std::string& hex : List(name)) out.push_back(ScalarFrom(hex, name));
    return out;
  }

  std::string Bytes(const std::string& name) {
    std::optional<std::string> b = HexDecode(Str(name));
    if (!b) {
      Fail(Cat("bad hex field ", name));
      return {};
    }
    return *b;
  }

  std::string Space(const std::string& name) {
    std::string s = Str(name);
    if (status_.ok() && !IsValidSpaceId(s)) Fail("bad space id");
    return s;
  }

  mpz_class Big(const std::string& name) {
    mpz_class v;
    const std::string s = Str(name);
    if (s.empty() || v.set_str(s, 16) != 0 || v < 0) {
      Fail(Cat("bad integer field ", name));
    }
    return v;
  }

  void Fail(std::string_view detail) {
    if (status_.ok()) status_ = Malformed(detail);
  }

 private:
  const WireMessage& msg_;
  const Group* group_;
  absl::Status status_;
};

WireMessage Make(Stage stage, std::string_view session) {
  WireMessage m;
  m.stage = stage;
  m.session = std::string(session);
  return m;
}

void PutCredential(const Group& group, WireMessage& m,
                   const CredentialPublic& cred) {
  m.body["cm_s"] = group.EncodeHex(cred.cm_s.element);
  m.body["cm_q"] = group.EncodeHex(cred.cm_q.element);
  m.body["cm_b"] = group.EncodeHex(cred.cm_b.element);
  m.body["sig"] = HexEncode(cred.sig);
}

CredentialPublic ReadCredential(Reader& r) {
  return CredentialPublic{r.El("cm_s"), r.El("cm_q"), r.El("cm_b"),
                          r.Bytes("sig")};
}

template <typename T>
absl::StatusOr<T> Finish(const WireMessage& msg, Direction dir, Reader& r,
                         T value) {
  if (absl::Status s = CheckSchema(msg, dir); !s.ok()) return s;
  if (!r.status().ok()) return r.status();
  return value;
}

}  // namespace

std::string EncodeWire(const WireMessage& msg) {
  json body = json::object();
  for (const auto& [name, value] : msg.body) {
    if (const auto* s = std::get_if<std::string>(&value)) {
      body[name] = *s;
    } else {
      body[name] = std::get<std::vector<std::string>>(value);
    }
  }
  json j = {{"version", msg.version},
            {"stage", std::string(StageTag(msg.stage))},
            {"session", msg.session},
            {"body", std::move(body)}};
  return j.dump();
}

absl::StatusOr<WireMessage> DecodeWire(std::string_view bytes) {
  json j = json::parse(bytes.begin(), bytes.end(), nullptr, false);
  if (j.is_discarded() || !j.is_object() || j.size() != 4 ||
      !j.contains("version") || !j.contains("stage") ||
      !j.contains("session") || !j.contains("body")) {
    return Malformed("not a wire message");
  }
  const json& version = j["version"];
  if (!version.is_number_integer() || version.get<int>() != kWireVersion) {
    return Malformed("unsupported wire version");
  }
  if (!j["stage"].is_string() || !j["session"].is_string() ||
      !j["body"].is_object()) {
    return Malformed("bad message header");
  }
  std::optional<Stage> stage = StageFromTag(j["stage"].get<std::string>());
  if (!stage) return Malformed("unknown stage");
  WireMessage msg;
  msg.stage = *stage;
  msg.session = j["session"].get<std::string>();
  for (const auto& [name, value] : j["body"].items()) {
    if (value.is_string()) {
      msg.body[name] = value.get<std::string>();
    } else if (value.is_array() &&
               std::all_of(value.begin(), value.end(),
                           [](const json& v) { return v.is_string(); })) {
      msg.body[name] = value.get<std::vector<std::string>>();
    } else {
      return Malformed(Cat("bad value for field ", name));
    }
  }
  return msg;
}

bool IsErrorBody(const WireMessage& msg) {
  return msg.body.size() == 2 && msg.body.contains(std::string(kErrorField)) &&
         msg.body.contains(std::string(kMessageField));
}

absl::Status CheckSchema(const WireMessage& msg, Direction direction) {
  if (direction == Direction::kResponse && IsErrorBody(msg)) {
    return absl::OkStatus();
  }
  const FieldSet& schema = Schema(msg.stage, direction);
  for (const auto& [name, value] : msg.body) {
    if (!schema.contains(name)) return Malformed(Cat("unknown field ", name));
  }
  for (const std::string& name : schema) {
    if (!msg.body.contains(name)) return Malformed(Cat("missing field ", name));
  }
  return absl::OkStatus();
}

WireMessage ErrorMessage(Stage stage, std::string_view session,
                         const absl::Status& status) {
  WireMessage m = Make(stage, session);
  std::optional<Reason> reason = ReasonOf(status);
  m.body[std::string(kErrorField)] =
      std::string(reason ? ReasonTag(*reason) : "internal");
  m.body[std::string(kMessageField)] = std::string(status.message());
  return m;
}

absl::Status ErrorFromMessage(const WireMessage& msg) {
  Reader r(msg, nullptr);
  const std::string tag = r.Str(std::string(kErrorField));
  std::string message = r.Str(std::string(kMessageField));
  if (!r.status().ok()) return r.status();
  std::optional<Reason> reason = ReasonFromTag(tag);
  if (!reason) return absl::InternalError(message);
  const std::string prefix = tag + ": ";
  if (message == tag) {
    message.clear();
  } else if (message.starts_with(prefix)) {
    message.erase(0, prefix.size());
  }
  return Reject(*reason, message);
}

WireMessage EncodeSetupRequest() { return Make(Stage::kSetup, ""); }

WireMessage EncodeRegistrationRequest(const Group& group,
                                      const RegistrationRequest& req) {
  WireMessage m = Make(Stage::kRegister, "");
  m.body["cm_s_prime"] = group.EncodeHex(req.cm_s_prime.element);
  m.body["cm_q"] = group.EncodeHex(req.cm_q.element);
  return m;
}

absl::StatusOr<RegistrationRequest> DecodeRegistrationRequest(
    const Group& group, const WireMessage& msg) {
  Reader r(msg, &group);
  RegistrationRequest req{r.El("cm_s_prime"), r.El("cm_q")};
  return Finish(msg, Direction::kRequest, r, req);
}

WireMessage EncodeSubmission(const Group& group, const Submission& sub) {
  WireMessage m = Make(Stage::kSubmit, "");
  m.body["space"] = sub.entry.space;
  m.body["slot"] = Cat(sub.entry.slot);
  m.body["ticket"] = group.EncodeHex(sub.entry.ticket.element);
  m.body["a"] = Cat(sub.entry.availability);
  m.body["proof_a"] = group.EncodeHex(sub.proof.a.element);
  m.body["proof_z_x"] = group.EncodeHex(sub.proof.z_x);
  return m;
}

absl::StatusOr<Submission> DecodeSubmission(const Group& group,
                                            const WireMessage& msg) {
  Reader r(msg, &group);
  Submission sub;
  sub.entry.space = r.Space("space");
  sub.entry.slot = r.Int<std::int64_t>("slot");
  sub.entry.ticket = r.El("ticket");
  sub.entry.availability = r.Int<int>("a");
  sub.proof.a = r.El("proof_a");
  sub.proof.z_x = r.Sc("proof_z_x");
  sub.proof.mode = MaskMode::kKnown;
  return Finish(msg, Direction::kRequest, r, std::move(sub));
}

WireMessage EncodeClaimOpen(const Group& group, const ClaimOpenRequest& req) {
  WireMessage m = Make(Stage::kClaimOpen, req.session);
  m.body["space"] = req.space;
  m.body["slot"] = Cat(req.slot);
  m.body["ticket"] = group.EncodeHex(req.ticket.element);
  PutCredential(group, m, req.credential);
  m.body["link_a_cred"] = group.EncodeHex(req.proof.credential.a.element);
  m.body["link_a_ticket"] = group.EncodeHex(req.proof.ticket.a.element);
  m.body["link_z_x"] = group.EncodeHex(req.proof.credential.z_x);
  m.body["link_z_r"] = group.EncodeHex(
      req.proof.credential.z_r.value_or(group.MakeScalar(0)));
  return m;
}

absl::StatusOr<ClaimOpenRequest> DecodeClaimOpen(const Group& group,
                                                 const WireMessage& msg) {
  Reader r(msg, &group);
  ClaimOpenRequest req;
  req.session = msg.session;
  req.space = r.Space("space");
  req.slot = r.Int<std::int64_t>("slot");
  req.ticket = r.El("ticket");
  req.credential = ReadCredential(r);
  const Scalar z_x = r.Sc("link_z_x");
  req.proof.credential =
      CmProof{r.El("link_a_cred"), z_x, r.Sc("link_z_r"), MaskMode::kHidden};
  req.proof.ticket =
      CmProof{r.El("link_a_ticket"), z_x, std::nullopt, MaskMode::kKnown};
  return Finish(msg, Direction::kRequest, r, std::move(req));
}

WireMessage EncodeReveal(const Group& group, Stage stage,
                         const RevealRequest& req) {
  WireMessage m = Make(stage, req.session);
  m.body["q"] = group.EncodeHex(req.q);
  m.body["r_q"] = group.EncodeHex(req.r_q);
  return m;
}

absl::StatusOr<RevealRequest> DecodeReveal(const Group& group,
                                           const WireMessage& msg) {
  Reader r(msg, &group);
  RevealRequest req{msg.session, r.Sc("q"), r.Sc("r_q")};
  return Finish(msg, Direction::kRequest, r, std::move(req));
}

WireMessage EncodeRefresh(const Group& group, Stage stage,
                          const RefreshRequest& req) {
  WireMessage m = Make(stage, req.session);
  m.body["cm_q_new"] = group.EncodeHex(req.cm_q_new.element);
  return m;
}

absl::StatusOr<RefreshRequest> DecodeRefresh(const Group& group,
                                             const WireMessage& msg) {
  Reader r(msg, &group);
  RefreshRequest req{msg.session, r.El("cm_q_new")};
  return Finish(msg, Direction::kRequest, r, std::move(req));
}

WireMessage EncodeInquiryOpen(const Group& group,
                              const InquiryOpenRequest& req) {
  WireMessage m = Make(Stage::kInquireOpen, req.session);
  PutCredential(group, m, req.credential);
  m.body["proof_a"] = group.EncodeHex(req.proof.a.element);
  m.body["proof_z_x"] = group.EncodeHex(req.proof.z_x);
  m.body["proof_z_r"] =
      group.EncodeHex(req.proof.z_r.value_or(group.MakeScalar(0)));
  std::vector<std::string> bits, a, z_x, beta, z_r;
  for (const Commitment& c : req.balance_proof.bit_commitments) {
    bits.push_back(group.EncodeHex(c.element));
  }
  for (const MbsProof& proof : req.balance_proof.bit_proofs) {
    for (const MbsBranch& branch : proof.branches) {
      a.push_back(group.EncodeHex(branch.a.element));
      z_x.push_back(group.EncodeHex(branch.z_x));
      beta.push_back(group.EncodeHex(branch.beta));
      z_r.push_back(group.EncodeHex(branch.z_r));
    }
  }
  m.body["nn_bit_commitments"] = std::move(bits);
  m.body["nn_branch_a"] = std::move(a);
  m.body["nn_branch_z_x"] = std::move(z_x);
  m.body["nn_branch_beta"] = std::move(beta);
  m.body["nn_branch_z_r"] = std::move(z_r);
  m.body["nn_a0"] = group.EncodeHex(req.balance_proof.a0.element);
  m.body["nn_z_r"] = group.EncodeHex(req.balance_proof.z_r);
  m.body["spaces"] = req.spaces;
  return m;
}

absl::StatusOr<InquiryOpenRequest> DecodeInquiryOpen(const Group& group,
                                                     const WireMessage& msg) {
  Reader r(msg, &group);
  InquiryOpenRequest req;
  req.session = msg.session;
  req.credential = ReadCredential(r);
  req.proof = CmProof{r.El("proof_a"), r.Sc("proof_z_x"), r.Sc("proof_z_r"),
                      MaskMode::kHidden};
  req.balance_proof.bit_commitments = r.Elements("nn_bit_commitments");
  const std::vector<Commitment> a = r.Elements("nn_branch_a");
  const std::vector<Scalar> z_x = r.Scalars("nn_branch_z_x");
  const std::vector<Scalar> beta = r.Scalars("nn_branch_beta");
  const std::vector<Scalar> z_r = r.Scalars("nn_branch_z_r");
  const std::size_t bits = req.balance_proof.bit_commitments.size();
  if (a.size() != 2 * bits || z_x.size() != 2 * bits ||
      beta.size() != 2 * bits || z_r.size() != 2 * bits) {
    r.Fail("bit proof lists have inconsistent lengths");
  } else {
    for (std::size_t i = 0; i < bits; ++i) {
      MbsProof proof;
      for (std::size_t k = 2 * i; k < 2 * i + 2; ++k) {
        proof.branches.push_back(MbsBranch{a[k], z_x[k], beta[k], z_r[k]});
      }
      req.balance_proof.bit_proofs.push_back(std::move(proof));
    }
  }
  req.balance_proof.a0 = r.El("nn_a0");
  req.balance_proof.z_r = r.Sc("nn_z_r");
  req.spaces = r.List("spaces");
  for (const std::string& space : req.spaces) {
    if (!IsValidSpaceId(space)) r.Fail("bad space id");
  }
  return Finish(msg, Direction::kRequest, r, std::move(req));
}

WireMessage EncodeBundle(const PublicBundle& b) {
  WireMessage m = Make(Stage::kSetup, "");
  m.body["q"] = b.params.q.get_str(16);
  m.body["p"] = b.params.p.get_str(16);
  m.body["g"] = b.params.g.get_str(16);
  m.body["h"] = b.params.h.get_str(16);
  m.body["bits"] = Cat(b.params.bits);
  m.body["fingerprint"] = b.fingerprint;
  m.body["n"] = b.key.n.get_str(16);
  m.body["e"] = b.key.e.get_str(16);
  m.body["hash_id"] = b.hash_id;
  m.body["b0"] = Cat(b.b0);
  m.body["c_q"] = Cat(b.c_q);
  m.body["nn_bits"] = Cat(b.nn_bits);
  m.body["epsilon"] = Cat(b.epsilon);
  return m;
}

absl::StatusOr<PublicBundle> DecodeBundle(const WireMessage& msg) {
  Reader r(msg, nullptr);
  PublicBundle b;
  b.params.q = r.Big("q");
  b.params.p = r.Big("p");
  b.params.g = r.Big("g");
  b.params.h = r.Big("h");
  b.params.bits = r.Int<std::size_t>("bits");
  b.fingerprint = r.Str("fingerprint");
  b.key.n = r.Big("n");
  b.key.e = r.Big("e");
  b.hash_id = r.Str("hash_id");
  b.b0 = r.Int<std::uint64_t>("b0");
  b.c_q = r.Int<std::uint64_t>("c_q");
  b.nn_bits = r.Int<int>("nn_bits");
  b.epsilon = r.Int<std::int64_t>("epsilon");
  return Finish(msg, Direction::kResponse, r, std::move(b));
}

WireMessage EncodeRegistrationReply(const Group& group,
                                    const RegistrationReply& reply) {
  WireMessage m = Make(Stage::kRegister, "");
  m.body["s_double_prime"] = group.EncodeHex(reply.s_double_prime);
  m.body["sig"] = HexEncode(reply.sig);
  return m;
}

absl::StatusOr<RegistrationReply> DecodeRegistrationReply(
    const Group& group, const WireMessage& msg) {
  Reader r(msg, &group);
  RegistrationReply reply{r.Sc("s_double_prime"), r.Bytes("sig")};
  return Finish(msg, Direction::kResponse, r, std::move(reply));
}

WireMessage EncodeAck(Stage stage, std::string_view session) {
  return Make(stage, session);
}

WireMessage EncodeCreditOffer(const Group& group, std::string_view session,
                              const CreditOffer& offer) {
  WireMessage m = Make(Stage::kClaimOpen, session);
  m.body["space"] = offer.space;
  m.body["slot"] = Cat(offer.slot);
  m.body["ticket"] = group.EncodeHex(offer.ticket.element);
  m.body["credit"] = Cat(offer.credit);
  return m;
}

absl::StatusOr<CreditOffer> DecodeCreditOffer(const Group& group,
                                              const WireMessage& msg) {
  Reader r(msg, &group);
  CreditOffer offer;
  offer.space = r.Space("space");
  offer.slot = r.Int<std::int64_t>("slot");
  offer.ticket = r.El("ticket");
  offer.credit = r.Int<std::uint64_t>("credit");
  return Finish(msg, Direction::kResponse, r, std::move(offer));
}

WireMessage EncodeSignatureReply(Stage stage, std::string_view session,
                                 const Signature& sig) {
  WireMessage m = Make(stage, session);
  m.body["sig"] = HexEncode(sig);
  return m;
}

absl::StatusOr<Signature> DecodeSignatureReply(const WireMessage& msg) {
  Reader r(msg, nullptr);
  Signature sig = r.Bytes("sig");
  return Finish(msg, Direction::kResponse, r, std::move(sig));
}

WireMessage EncodeInquiryResult(std::string_view session,
                                const InquiryResult& result) {
  WireMessage m = Make(Stage::kInquireRefresh, session);
  std::vector<std::string> spaces, statuses;
  for (const SpaceStatus& s : result.statuses) {
    spaces.push_back(s.space);
    statuses.emplace_back(AvailabilityTag(s.status));
  }
  m.body["spaces"] = std::move(spaces);
  m.body["statuses"] = std::move(statuses);
  m.body["sig"] = HexEncode(result.sig);
  return m;
}

absl::StatusOr<InquiryResult> DecodeInquiryResult(const WireMessage& msg) {
  Reader r(msg, nullptr);
  InquiryResult result;
  result.sig = r.Bytes("sig");
  const std::vector<std::string> spaces = r.List("spaces");
  const std::vector<std::string> statuses = r.List("statuses");
  if (spaces.size() != statuses.size()) {
    r.Fail("spaces and statuses differ in length");
  } else {
    for (std::size_t i = 0; i < spaces.size(); ++i) {
      std::optional<Availability> a = AvailabilityFromTag(statuses[i]);
      if (!a) {
        r.Fail("unknown availability tag");
        break;
      }
      result.statuses.push_back({spaces[i], *a});
    }
  }
  return Finish(msg, Direction::kResponse, r, std::move(result));
}

}  // namespace hsense

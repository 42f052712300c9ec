#include "hsense/sigma.h"

#include "absl/status/status.h"
#include "hsense/random.h"
#include "hsense/sigma_interactive.h"
#include "hsense/transcript.h"

namespace hsense {
namespace {

using interactive::CmProver;
using interactive::MbsProver;
using interactive::NNProver;

Scalar CmChallenge(const Group& group, std::string_view context,
                   const Commitment& a, const Commitment& c) {
  Transcript t(group, context);
  t.Append(a);
  t.Append(c);
  return t.Challenge();
}

// Everything the prover emits before the challenge: (a_j, z_x_j) per branch,
// then the statement.
Scalar MbsChallenge(const Group& group, std::string_view context,
                    const std::vector<MbsBranch>& first_move,
                    const Commitment& c, std::span<const Scalar> set) {
  Transcript t(group, context);
  for (const MbsBranch& branch : first_move) {
    t.Append(branch.a);
    t.Append(branch.z_x);
  }
  t.Append(c);
  for (const Scalar& member : set) t.Append(member);
  return t.Challenge();
}

Scalar NNChallenge(const Group& group, std::string_view context,
                   const NNProof& first_move, const Commitment& c) {
  Transcript t(group, context);
  t.Append(c);
  for (const Commitment& bit : first_move.bit_commitments) t.Append(bit);
  for (const MbsProof& bit_proof : first_move.bit_proofs) {
    for (const MbsBranch& branch : bit_proof.branches) {
      t.Append(branch.a);
      t.Append(branch.z_x);
    }
  }
  t.Append(first_move.a0);
  return t.Challenge();
}

Scalar LinkChallenge(const Group& group, std::string_view context,
                     const Commitment& a_credential, const Commitment& a_ticket,
                     const Commitment& credential, const Commitment& ticket) {
  Transcript t(group, context);
  t.Append(a_credential);
  t.Append(a_ticket);
  t.Append(credential);
  t.Append(ticket);
  return t.Challenge();
}

}  // namespace

CmProof ProveCm(const Group& group, const Opening& opening, const Commitment& c,
                MaskMode mode, std::string_view context, SecureRng& rng) {
  for (;;) {
    CmProver prover(group, opening, mode, rng);
    Scalar beta = CmChallenge(group, context, prover.first_move(), c);
    if (!beta.IsZero()) return prover.Respond(beta);
  }
}

bool VerifyCm(const Group& group, const CmProof& proof, const Commitment& c,
              const std::optional<Scalar>& known_mask,
              std::string_view context) {
  Scalar beta = CmChallenge(group, context, proof.a, c);
  if (beta.IsZero()) return false;
  return interactive::CheckCm(group, proof, c, beta, known_mask);
}

absl::StatusOr<MbsProof> ProveMbs(const Group& group, const Opening& opening,
                                  const Commitment& c,
                                  std::span<const Scalar> set,
                                  std::string_view context, SecureRng& rng) {
  for (;;) {
    absl::StatusOr<MbsProver> prover =
        MbsProver::Create(group, opening, set, rng);
    if (!prover.ok()) return prover.status();
    Scalar beta = MbsChallenge(group, context, prover->first_move(), c, set);
    if (!beta.IsZero()) return prover->Respond(beta);
  }
}

bool VerifyMbs(const Group& group, const MbsProof& proof, const Commitment& c,
               std::span<const Scalar> set, std::string_view context) {
  if (set.empty() || set.size() > kMaxMembershipSetSize) return false;
  Scalar beta = MbsChallenge(group, context, proof.branches, c, set);
  if (beta.IsZero()) return false;
  return interactive::CheckMbs(group, proof, c, set, beta);
}

absl::StatusOr<NNProof> ProveNN(const Group& group, const Opening& opening,
                                const Commitment& c, int bits,
                                std::string_view context, SecureRng& rng) {
  for (;;) {
    absl::StatusOr<NNProver> prover = NNProver::Create(group, opening, bits, rng);
    if (!prover.ok()) return prover.status();
    Scalar beta = NNChallenge(group, context, prover->first_move(), c);
    if (!beta.IsZero()) return prover->Respond(beta);
  }
}

bool VerifyNN(const Group& group, const NNProof& proof, const Commitment& c,
              int bits, std::string_view context) {
  Scalar beta = NNChallenge(group, context, proof, c);
  if (beta.IsZero()) return false;
  return interactive::CheckNN(group, proof, c, bits, beta);
}

LinkProof ProveLink(const Group& group, const Opening& credential_opening,
                    const Commitment& credential, const Commitment& ticket,
                    const Scalar& ticket_mask, std::string_view context,
                    SecureRng& rng) {
  for (;;) {
    // Both components share x'; the ticket side has r' = 0.
    Scalar x_nonce = group.RandomScalar(rng);
    Scalar r_nonce = group.RandomScalar(rng);
    CmProver cred_prover(group, credential_opening, MaskMode::kHidden, x_nonce,
                         r_nonce);
    CmProver ticket_prover(group, Opening{credential_opening.x, ticket_mask},
                           MaskMode::kKnown, x_nonce, group.MakeScalar(0));
    Scalar beta = LinkChallenge(group, context, cred_prover.first_move(),
                                ticket_prover.first_move(), credential, ticket);
    if (beta.IsZero()) continue;
    return LinkProof{cred_prover.Respond(beta), ticket_prover.Respond(beta)};
  }
}

bool VerifyLink(const Group& group, const LinkProof& proof,
                const Commitment& credential, const Commitment& ticket,
                const Scalar& ticket_mask, std::string_view context) {
  if (proof.credential.mode != MaskMode::kHidden ||
      proof.ticket.mode != MaskMode::kKnown ||
      !(proof.credential.z_x == proof.ticket.z_x)) {
    return false;
  }
  Scalar beta = LinkChallenge(group, context, proof.credential.a,
                              proof.ticket.a, credential, ticket);
  if (beta.IsZero()) return false;
  return interactive::CheckCm(group, proof.credential, credential, beta,
                              std::nullopt) &&
         interactive::CheckCm(group, proof.ticket, ticket, beta, ticket_mask);
}

}  // namespace hsense

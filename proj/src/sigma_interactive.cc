#include "hsense/sigma_interactive.h"

#include <algorithm>

#include "absl/status/status.h"
#include "hsense/random.h"

namespace hsense::interactive {
namespace {

// c * g^{-x}: the commitment re-centred on a candidate value.
GroupElement Recentre(const Group& group, const Commitment& c,
                      const Scalar& x) {
  return group.Mul(c.element, group.Pow(group.g(), group.Neg(x)));
}

// prod_i B_i^{2^(i-1)} by Horner's rule, most significant bit first.
GroupElement WeightedBitProduct(const Group& group,
                                const std::vector<Commitment>& bits) {
  GroupElement acc = group.Identity();
  for (auto it = bits.rbegin(); it != bits.rend(); ++it) {
    acc = group.Mul(group.Mul(acc, acc), it->element);
  }
  return acc;
}

Scalar PowerOfTwo(const Group& group, int i) {
  return group.MakeScalar(mpz_class(1) << i);
}

absl::Status CheckBitWidth(const Group& group, int bits) {
  if (bits < 1 || mpz_class(1) << bits >= group.order()) {
    return absl::InvalidArgumentError(
        "bit width must satisfy 1 <= m and 2^m < p");
  }
  return absl::OkStatus();
}

absl::StatusOr<Scalar> Quotient(const Group& group, const Scalar& num,
                                const Scalar& den) {
  absl::StatusOr<Scalar> inv = group.Inv(den);
  if (!inv.ok()) return inv.status();
  return group.Mul(num, *inv);
}

}  // namespace

CmProver::CmProver(const Group& group, const Opening& opening, MaskMode mode,
                   SecureRng& rng)
    : CmProver(group, opening, mode, group.RandomScalar(rng),
               mode == MaskMode::kHidden ? group.RandomScalar(rng)
                                         : group.MakeScalar(0)) {}

CmProver::CmProver(const Group& group, const Opening& opening, MaskMode mode,
                   const Scalar& x_nonce, const Scalar& r_nonce)
    : group_(group),
      opening_(opening),
      mode_(mode),
      x_nonce_(x_nonce),
      r_nonce_(mode == MaskMode::kHidden ? r_nonce : group.MakeScalar(0)),
      first_move_(Commit(group, x_nonce_, r_nonce_)) {}

CmProof CmProver::Respond(const Scalar& beta) const {
  CmProof proof;
  proof.a = first_move_;
  proof.mode = mode_;
  proof.z_x = group_.Add(x_nonce_, group_.Mul(beta, opening_.x));
  if (mode_ == MaskMode::kHidden) {
    proof.z_r = group_.Add(r_nonce_, group_.Mul(beta, opening_.r));
  }
  return proof;
}

bool CheckCm(const Group& group, const CmProof& proof, const Commitment& c,
             const Scalar& beta, const std::optional<Scalar>& known_mask) {
  Scalar z_r;
  if (proof.mode == MaskMode::kHidden) {
    if (!proof.z_r || known_mask) return false;
    z_r = *proof.z_r;
  } else {
    if (proof.z_r || !known_mask) return false;
    z_r = group.Mul(beta, *known_mask);
  }
  const Commitment lhs = Commit(group, proof.z_x, z_r);
  const GroupElement rhs =
      group.Mul(proof.a.element, group.Pow(c.element, beta));
  return lhs.element == rhs;
}

absl::StatusOr<MbsProver> MbsProver::Create(const Group& group,
                                            const Opening& opening,
                                            std::span<const Scalar> set,
                                            SecureRng& rng) {
  if (set.empty() || set.size() > kMaxMembershipSetSize) {
    return absl::InvalidArgumentError("membership set size out of range");
  }
  std::vector<Scalar> members(set.begin(), set.end());
  for (std::size_t i = 0; i < members.size(); ++i) {
    for (std::size_t j = i + 1; j < members.size(); ++j) {
      if (members[i] == members[j]) {
        return absl::InvalidArgumentError("membership set has repeats");
      }
    }
  }
  auto it = std::find(members.begin(), members.end(), opening.x);
  if (it == members.end()) {
    return absl::InvalidArgumentError("committed value is not in the set");
  }
  const auto real = static_cast<std::size_t>(it - members.begin());

  MbsProver prover(group, opening, std::move(members), real);
  const std::size_t n = prover.set_.size();
  prover.r_nonces_.resize(n);
  prover.sim_betas_.resize(n);
  prover.first_move_.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    Scalar x_nonce = group.RandomScalar(rng);
    prover.r_nonces_[j] = group.RandomScalar(rng);
    MbsBranch& branch = prover.first_move_[j];
    branch.a = Commit(group, x_nonce, prover.r_nonces_[j]);
    if (j == real) {
      branch.z_x = x_nonce;
    } else {
      prover.sim_betas_[j] = group.RandomScalar(rng);
      Scalar gap = group.Sub(opening.x, prover.set_[j]);
      branch.z_x =
          group.Add(x_nonce, group.Mul(gap, prover.sim_betas_[j]));
    }
  }
  return prover;
}

MbsProof MbsProver::Respond(const Scalar& beta) const {
  Scalar remaining = beta;
  for (std::size_t j = 0; j < set_.size(); ++j) {
    if (j != real_) remaining = group_.Sub(remaining, sim_betas_[j]);
  }
  MbsProof proof{first_move_};
  for (std::size_t j = 0; j < set_.size(); ++j) {
    MbsBranch& branch = proof.branches[j];
    branch.beta = j == real_ ? remaining : sim_betas_[j];
    branch.z_r =
        group_.Add(r_nonces_[j], group_.Mul(opening_.r, branch.beta));
  }
  return proof;
}

bool CheckMbs(const Group& group, const MbsProof& proof, const Commitment& c,
              std::span<const Scalar> set, const Scalar& beta) {
  if (set.empty() || proof.branches.size() != set.size()) return false;
  Scalar sum = group.MakeScalar(0);
  for (const MbsBranch& branch : proof.branches) {
    sum = group.Add(sum, branch.beta);
  }
  if (!(sum == beta)) return false;
  for (std::size_t j = 0; j < set.size(); ++j) {
    const MbsBranch& branch = proof.branches[j];
    const Commitment lhs = Commit(group, branch.z_x, branch.z_r);
    const GroupElement rhs = group.Mul(
        branch.a.element,
        group.Pow(Recentre(group, c, set[j]), branch.beta));
    if (!(lhs.element == rhs)) return false;
  }
  return true;
}

absl::StatusOr<NNProver> NNProver::Create(const Group& group,
                                          const Opening& opening, int bits,
                                          SecureRng& rng) {
  if (absl::Status s = CheckBitWidth(group, bits); !s.ok()) return s;
  const mpz_class& x = opening.x.value();
  if (x >= mpz_class(1) << bits) {
    return absl::OutOfRangeError("value does not fit the non-negative range");
  }

  NNProver prover(group, opening);
  const Scalar zero = group.MakeScalar(0);
  const Scalar one = group.MakeScalar(1);
  const std::vector<Scalar> bit_set = {zero, one};
  for (int i = 0; i < bits; ++i) {
    const bool bit = mpz_tstbit(x.get_mpz_t(), static_cast<mp_bitcnt_t>(i));
    Opening bit_opening{bit ? one : zero, group.RandomScalar(rng)};
    prover.bit_masks_.push_back(bit_opening.r);
    prover.first_move_.bit_commitments.push_back(
        Commit(group, bit_opening.x, bit_opening.r));
    absl::StatusOr<MbsProver> bit_prover =
        MbsProver::Create(group, bit_opening, bit_set, rng);
    if (!bit_prover.ok()) return bit_prover.status();
    prover.first_move_.bit_proofs.push_back(MbsProof{bit_prover->first_move()});
    prover.bit_provers_.push_back(*std::move(bit_prover));
  }
  prover.r_nonce_ = group.RandomScalar(rng);
  prover.first_move_.a0 = Commit(group, zero, prover.r_nonce_);
  return prover;
}

NNProof NNProver::Respond(const Scalar& beta) const {
  NNProof proof = first_move_;
  Scalar weighted = group_.MakeScalar(0);
  for (std::size_t i = 0; i < bit_provers_.size(); ++i) {
    proof.bit_proofs[i] = bit_provers_[i].Respond(beta);
    weighted = group_.Add(
        weighted,
        group_.Mul(bit_masks_[i], PowerOfTwo(group_, static_cast<int>(i))));
  }
  proof.z_r = group_.Add(
      r_nonce_, group_.Mul(beta, group_.Sub(weighted, opening_.r)));
  return proof;
}

bool CheckNN(const Group& group, const NNProof& proof, const Commitment& c,
             int bits, const Scalar& beta) {
  if (!CheckBitWidth(group, bits).ok()) return false;
  const auto m = static_cast<std::size_t>(bits);
  if (proof.bit_commitments.size() != m || proof.bit_proofs.size() != m) {
    return false;
  }
  const std::vector<Scalar> bit_set = {group.MakeScalar(0),
                                       group.MakeScalar(1)};
  for (std::size_t i = 0; i < m; ++i) {
    if (!CheckMbs(group, proof.bit_proofs[i], proof.bit_commitments[i],
                  bit_set, beta)) {
      return false;
    }
  }
  // h^{z_r} == a0 * c^{-beta} * (prod B_i^{2^(i-1)})^beta
  const GroupElement lhs = group.Pow(group.h(), proof.z_r);
  GroupElement rhs = group.Mul(
      proof.a0.element, group.Pow(c.element, group.Neg(beta)));
  rhs = group.Mul(rhs, group.Pow(WeightedBitProduct(group, proof.bit_commitments),
                                 beta));
  return lhs == rhs;
}

absl::StatusOr<Opening> ExtractCm(const Group& group, const CmProof& t1,
                                  const Scalar& beta1, const CmProof& t2,
                                  const Scalar& beta2) {
  if (!(t1.a == t2.a)) {
    return absl::InvalidArgumentError("transcripts have different first moves");
  }
  if (beta1 == beta2) {
    return absl::InvalidArgumentError("extraction needs distinct challenges");
  }
  const Scalar dbeta = group.Sub(beta1, beta2);
  Opening out;
  absl::StatusOr<Scalar> x = Quotient(group, group.Sub(t1.z_x, t2.z_x), dbeta);
  if (!x.ok()) return x.status();
  out.x = *x;
  if (t1.z_r && t2.z_r) {
    absl::StatusOr<Scalar> r =
        Quotient(group, group.Sub(*t1.z_r, *t2.z_r), dbeta);
    if (!r.ok()) return r.status();
    out.r = *r;
  }
  return out;
}

absl::StatusOr<Opening> ExtractMbs(const Group& group,
                                   std::span<const Scalar> set,
                                   const MbsProof& t1, const Scalar& beta1,
                                   const MbsProof& t2, const Scalar& beta2) {
  if (beta1 == beta2) {
    return absl::InvalidArgumentError("extraction needs distinct challenges");
  }
  if (t1.branches.size() != set.size() || t2.branches.size() != set.size()) {
    return absl::InvalidArgumentError("transcript size does not match set");
  }
  for (std::size_t j = 0; j < set.size(); ++j) {
    const MbsBranch& b1 = t1.branches[j];
    const MbsBranch& b2 = t2.branches[j];
    if (!(b1.a == b2.a) || !(b1.z_x == b2.z_x)) {
      return absl::InvalidArgumentError(
          "transcripts have different first moves");
    }
  }
  // Distinct global challenges force at least one branch challenge to move;
  // that branch pins both the member and the mask.
  for (std::size_t j = 0; j < set.size(); ++j) {
    const MbsBranch& b1 = t1.branches[j];
    const MbsBranch& b2 = t2.branches[j];
    if (b1.beta == b2.beta) continue;
    absl::StatusOr<Scalar> r = Quotient(group, group.Sub(b1.z_r, b2.z_r),
                                        group.Sub(b1.beta, b2.beta));
    if (!r.ok()) return r.status();
    return Opening{set[j], *r};
  }
  return absl::InvalidArgumentError("no branch challenge differs");
}

absl::StatusOr<Opening> ExtractNN(const Group& group, const NNProof& t1,
                                  const Scalar& beta1, const NNProof& t2,
                                  const Scalar& beta2) {
  if (beta1 == beta2) {
    return absl::InvalidArgumentError("extraction needs distinct challenges");
  }
  if (t1.bit_commitments != t2.bit_commitments || !(t1.a0 == t2.a0) ||
      t1.bit_proofs.size() != t1.bit_commitments.size() ||
      t2.bit_proofs.size() != t1.bit_commitments.size()) {
    return absl::InvalidArgumentError("transcripts have different first moves");
  }
  const std::vector<Scalar> bit_set = {group.MakeScalar(0),
                                       group.MakeScalar(1)};
  Scalar x = group.MakeScalar(0);
  Scalar weighted_masks = group.MakeScalar(0);
  for (std::size_t i = 0; i < t1.bit_proofs.size(); ++i) {
    absl::StatusOr<Opening> bit = ExtractMbs(group, bit_set, t1.bit_proofs[i],
                                             beta1, t2.bit_proofs[i], beta2);
    if (!bit.ok()) return bit.status();
    const Scalar weight = PowerOfTwo(group, static_cast<int>(i));
    x = group.Add(x, group.Mul(bit->x, weight));
    weighted_masks = group.Add(weighted_masks, group.Mul(bit->r, weight));
  }
  // z_r difference / beta difference = sum r_i 2^(i-1) - r
  absl::StatusOr<Scalar> gap = Quotient(group, group.Sub(t1.z_r, t2.z_r),
                                        group.Sub(beta1, beta2));
  if (!gap.ok()) return gap.status();
  return Opening{x, group.Sub(weighted_masks, *gap)};
}

CmProof SimulateCm(const Group& group, const Commitment& c, const Scalar& beta,
                   SecureRng& rng) {
  Scalar z_x = group.RandomScalar(rng);
  Scalar z_r = group.RandomScalar(rng);
  return SimulateCm(group, c, beta, z_x, z_r);
}

CmProof SimulateCm(const Group& group, const Commitment& c, const Scalar& beta,
                   const Scalar& z_x, const Scalar& z_r) {
  CmProof proof;
  proof.mode = MaskMode::kHidden;
  proof.z_x = z_x;
  proof.z_r = z_r;
  proof.a = {group.Mul(Commit(group, z_x, z_r).element,
                       group.Pow(c.element, group.Neg(beta)))};
  return proof;
}

MbsProof SimulateMbs(const Group& group, const Commitment& c,
                     std::span<const Scalar> set, const Scalar& beta,
                     SecureRng& rng) {
  MbsProof proof;
  proof.branches.resize(set.size());
  Scalar remaining = beta;
  for (std::size_t j = 0; j < set.size(); ++j) {
    MbsBranch& branch = proof.branches[j];
    branch.z_x = group.RandomScalar(rng);
    branch.z_r = group.RandomScalar(rng);
    if (j + 1 < set.size()) {
      branch.beta = group.RandomScalar(rng);
      remaining = group.Sub(remaining, branch.beta);
    } else {
      branch.beta = remaining;
    }
    branch.a = {group.Mul(
        Commit(group, branch.z_x, branch.z_r).element,
        group.Pow(Recentre(group, c, set[j]), group.Neg(branch.beta)))};
  }
  return proof;
}

NNProof SimulateNN(const Group& group, const Commitment& c, int bits,
                   const Scalar& beta, SecureRng& rng) {
  NNProof proof;
  const Scalar zero = group.MakeScalar(0);
  const Scalar one = group.MakeScalar(1);
  const std::vector<Scalar> bit_set = {zero, one};
  for (int i = 0; i < bits; ++i) {
    Opening bit{rng.Below(std::uint64_t{2}) ? one : zero,
                group.RandomScalar(rng)};
    proof.bit_commitments.push_back(Commit(group, bit.x, bit.r));
    // The simulator chose these bits itself, so it can prove them honestly.
    absl::StatusOr<MbsProver> bit_prover =
        MbsProver::Create(group, bit, bit_set, rng);
    proof.bit_proofs.push_back(bit_prover->Respond(beta));
  }
  proof.z_r = group.RandomScalar(rng);
  GroupElement a0 = group.Mul(group.Pow(group.h(), proof.z_r),
                              group.Pow(c.element, beta));
  a0 = group.Mul(a0, group.Pow(WeightedBitProduct(group, proof.bit_commitments),
                               group.Neg(beta)));
  proof.a0 = {a0};
  return proof;
}

}  // namespace hsense::interactive

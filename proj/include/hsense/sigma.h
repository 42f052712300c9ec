#ifndef HSENSE_SIGMA_H_
#define HSENSE_SIGMA_H_

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "hsense/commitment.h"
#include "hsense/group.h"

namespace hsense {

class SecureRng;

// Non-interactive (Fiat-Shamir) proofs of knowledge over Pedersen
// commitments. Verifiers always recompute the top-level challenge; a zero
// challenge is never accepted, so provers resample until it is non-zero.

inline constexpr std::size_t kMaxMembershipSetSize = 64;
inline constexpr int kDefaultNonNegativeBits = 32;

enum class MaskMode {
  kHidden,  // prove knowledge of (x, r)
  kKnown,   // r is public; only x is proven, z_r = beta * r is recomputed
};

// Knowledge of the opening of a single commitment.
struct CmProof {
  Commitment a;                // Cm(x', r'); r' = 0 in known-mask mode
  Scalar z_x;                  // x' + beta * x
  std::optional<Scalar> z_r;   // r' + beta * r; absent in known-mask mode
  MaskMode mode = MaskMode::kHidden;
};

CmProof ProveCm(const Group& group, const Opening& opening, const Commitment& c,
                MaskMode mode, std::string_view context, SecureRng& rng);

// known_mask must be set exactly when proof.mode is kKnown.
bool VerifyCm(const Group& group, const CmProof& proof, const Commitment& c,
              const std::optional<Scalar>& known_mask,
              std::string_view context);

// OR-composition: the committed value is one of `set`. Branch i (the real
// one) answers the challenge left over after the simulated branches.
struct MbsBranch {
  Commitment a;
  Scalar z_x;
  Scalar beta;
  Scalar z_r;
};

struct MbsProof {
  std::vector<MbsBranch> branches;
};

absl::StatusOr<MbsProof> ProveMbs(const Group& group, const Opening& opening,
                                  const Commitment& c,
                                  std::span<const Scalar> set,
                                  std::string_view context, SecureRng& rng);

bool VerifyMbs(const Group& group, const MbsProof& proof, const Commitment& c,
               std::span<const Scalar> set, std::string_view context);

// 0 <= x < 2^bits via bit commitments, one {0,1}-membership proof per bit and
// an aggregate equation tying the bits back to c. Requires 2^bits < p.
struct NNProof {
  std::vector<Commitment> bit_commitments;  // Cm(b_i, r_i), least bit first
  std::vector<MbsProof> bit_proofs;
  Commitment a0;                            // Cm(0, r')
  Scalar z_r;
};

absl::StatusOr<NNProof> ProveNN(const Group& group, const Opening& opening,
                                const Commitment& c, int bits,
                                std::string_view context, SecureRng& rng);

bool VerifyNN(const Group& group, const NNProof& proof, const Commitment& c,
              int bits, std::string_view context);

// Same committed value in a credential commitment (hidden mask) and a ticket
// (public mask): one challenge and one shared z_x for both equations.
struct LinkProof {
  CmProof credential;
  CmProof ticket;
};

LinkProof ProveLink(const Group& group, const Opening& credential_opening,
                    const Commitment& credential, const Commitment& ticket,
                    const Scalar& ticket_mask, std::string_view context,
                    SecureRng& rng);

bool VerifyLink(const Group& group, const LinkProof& proof,
                const Commitment& credential, const Commitment& ticket,
                const Scalar& ticket_mask, std::string_view context);

}  // namespace hsense

#endif  // HSENSE_SIGMA_H_

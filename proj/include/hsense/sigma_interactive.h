#ifndef HSENSE_SIGMA_INTERACTIVE_H_
#define HSENSE_SIGMA_INTERACTIVE_H_

// Three-move forms of the proofs in sigma.h. The deployed protocol never
// sends these; they exist so tests can rewind a prover (knowledge
// extraction) and run the honest-verifier simulators.

#include <optional>
#include <span>
#include <vector>

#include "absl/status/statusor.h"
#include "hsense/commitment.h"
#include "hsense/group.h"
#include "hsense/sigma.h"

namespace hsense::interactive {

class CmProver {
 public:
  CmProver(const Group& group, const Opening& opening, MaskMode mode,
           SecureRng& rng);
  // Fixed nonces (x', r'); r' is ignored in known-mask mode.
  CmProver(const Group& group, const Opening& opening, MaskMode mode,
           const Scalar& x_nonce, const Scalar& r_nonce);

  const Commitment& first_move() const { return first_move_; }
  // Hidden-mask responses always carry z_r; known-mask ones never do.
  CmProof Respond(const Scalar& beta) const;

 private:
  Group group_;
  Opening opening_;
  MaskMode mode_;
  Scalar x_nonce_;
  Scalar r_nonce_;
  Commitment first_move_;
};

// g^{z_x} h^{z_r} == a * c^beta, with z_r = beta * known_mask in known mode.
bool CheckCm(const Group& group, const CmProof& proof, const Commitment& c,
             const Scalar& beta, const std::optional<Scalar>& known_mask);

class MbsProver {
 public:
  // Fails when the set is empty, too large, has repeats, or misses x.
  static absl::StatusOr<MbsProver> Create(const Group& group,
                                          const Opening& opening,
                                          std::span<const Scalar> set,
                                          SecureRng& rng);

  // Branch-indexed (a_j, z_x_j) sent before the challenge; beta/z_r fields
  // are unset until Respond.
  const std::vector<MbsBranch>& first_move() const { return first_move_; }
  MbsProof Respond(const Scalar& beta) const;
  std::size_t real_index() const { return real_; }

 private:
  MbsProver(const Group& group, Opening opening, std::vector<Scalar> set,
            std::size_t real)
      : group_(group), opening_(std::move(opening)), set_(std::move(set)),
        real_(real) {}

  Group group_;
  Opening opening_;
  std::vector<Scalar> set_;
  std::size_t real_;
  std::vector<Scalar> r_nonces_;
  std::vector<Scalar> sim_betas_;  // entry real_ unused
  std::vector<MbsBranch> first_move_;
};

bool CheckMbs(const Group& group, const MbsProof& proof, const Commitment& c,
              std::span<const Scalar> set, const Scalar& beta);

class NNProver {
 public:
  static absl::StatusOr<NNProver> Create(const Group& group,
                                         const Opening& opening, int bits,
                                         SecureRng& rng);

  // Bit commitments, bit first moves and a0; z_r unset until Respond.
  const NNProof& first_move() const { return first_move_; }
  NNProof Respond(const Scalar& beta) const;

 private:
  NNProver(const Group& group, Opening opening)
      : group_(group), opening_(std::move(opening)) {}

  Group group_;
  Opening opening_;
  std::vector<Scalar> bit_masks_;
  std::vector<MbsProver> bit_provers_;
  Scalar r_nonce_;
  NNProof first_move_;
};

bool CheckNN(const Group& group, const NNProof& proof, const Commitment& c,
             int bits, const Scalar& beta);

// Knowledge extractors. Both transcripts must share the first move and have
// distinct challenges.
absl::StatusOr<Opening> ExtractCm(const Group& group, const CmProof& t1,
                                  const Scalar& beta1, const CmProof& t2,
                                  const Scalar& beta2);
absl::StatusOr<Opening> ExtractMbs(const Group& group,
                                   std::span<const Scalar> set,
                                   const MbsProof& t1, const Scalar& beta1,
                                   const MbsProof& t2, const Scalar& beta2);
absl::StatusOr<Opening> ExtractNN(const Group& group, const NNProof& t1,
                                  const Scalar& beta1, const NNProof& t2,
                                  const Scalar& beta2);

// Honest-verifier simulators: accept only public inputs and the challenge.
CmProof SimulateCm(const Group& group, const Commitment& c, const Scalar& beta,
                   SecureRng& rng);
CmProof SimulateCm(const Group& group, const Commitment& c, const Scalar& beta,
                   const Scalar& z_x, const Scalar& z_r);
MbsProof SimulateMbs(const Group& group, const Commitment& c,
                     std::span<const Scalar> set, const Scalar& beta,
                     SecureRng& rng);
NNProof SimulateNN(const Group& group, const Commitment& c, int bits,
                   const Scalar& beta, SecureRng& rng);

}  // namespace hsense::interactive

#endif  // HSENSE_SIGMA_INTERACTIVE_H_

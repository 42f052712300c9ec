#ifndef HSENSE_COMMITMENT_H_
#define HSENSE_COMMITMENT_H_

#include <utility>

#include "hsense/group.h"

namespace hsense {

// Pedersen commitment Cm(x, r) = g^x * h^r.
struct Commitment {
  GroupElement element;
  friend bool operator==(const Commitment&, const Commitment&) = default;
};

struct Opening {
  Scalar x;
  Scalar r;
  friend bool operator==(const Opening&, const Opening&) = default;
};

Commitment Commit(const Group& group, const Scalar& x, const Scalar& r);

// Samples r uniformly from Z_p.
std::pair<Commitment, Opening> CommitRandom(const Group& group, const Scalar& x,
                                            SecureRng& rng);

// Homomorphic product: Cm(x1, r1) * Cm(x2, r2) = Cm(x1 + x2, r1 + r2).
Commitment Combine(const Group& group, const Commitment& a,
                   const Commitment& b);

// c * Cm(delta, 0). The mask of the underlying opening is unchanged; negative
// shifts are expressed as p - |delta|.
Commitment Shift(const Group& group, const Commitment& c, const Scalar& delta);

bool VerifyOpening(const Group& group, const Commitment& c, const Opening& o);

}  // namespace hsense

#endif  // HSENSE_COMMITMENT_H_

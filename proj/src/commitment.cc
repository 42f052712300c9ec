#include "hsense/commitment.h"

#include "hsense/random.h"

namespace hsense {

Commitment Commit(const Group& group, const Scalar& x, const Scalar& r) {
  return {group.Mul(group.Pow(group.g(), x), group.Pow(group.h(), r))};
}

std::pair<Commitment, Opening> CommitRandom(const Group& group, const Scalar& x,
                                            SecureRng& rng) {
  Opening o{x, group.RandomScalar(rng)};
  return {Commit(group, o.x, o.r), o};
}

Commitment Combine(const Group& group, const Commitment& a,
                   const Commitment& b) {
  return {group.Mul(a.element, b.element)};
}

Commitment Shift(const Group& group, const Commitment& c, const Scalar& delta) {
  return {group.Mul(c.element, group.Pow(group.g(), delta))};
}

bool VerifyOpening(const Group& group, const Commitment& c, const Opening& o) {
  return Commit(group, o.x, o.r) == c;
}

}  // namespace hsense

#ifndef HSENSE_TRANSCRIPT_H_
#define HSENSE_TRANSCRIPT_H_

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hsense/commitment.h"
#include "hsense/group.h"

namespace hsense {

// Fiat-Shamir transcript. The challenge is
//   HashToScalar(context || item_1 | item_2 | ... | item_k)
// where each item is a fixed-width encoding and '|' is the byte 0x7C.
class Transcript {
 public:
  Transcript(const Group& group, std::string_view context);

  void Append(const Commitment& c) { Append(c.element); }
  void Append(const GroupElement& e);
  void Append(const Scalar& s);

  Scalar Challenge() const;

 private:
  const Group& group_;
  std::string buffer_;
  bool empty_ = true;
};

Scalar FiatShamirChallenge(const Group& group, std::string_view context,
                           std::span<const Commitment> commitments);

}  // namespace hsense

#endif  // HSENSE_TRANSCRIPT_H_

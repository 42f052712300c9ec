#include "hsense/transcript.h"

namespace hsense {

Transcript::Transcript(const Group& group, std::string_view context)
    : group_(group), buffer_(context) {}

void Transcript::Append(const GroupElement& e) {
  if (!empty_) buffer_.push_back('|');
  buffer_ += group_.Encode(e);
  empty_ = false;
}

void Transcript::Append(const Scalar& s) {
  if (!empty_) buffer_.push_back('|');
  buffer_ += group_.Encode(s);
  empty_ = false;
}

Scalar Transcript::Challenge() const { return group_.HashToScalar(buffer_); }

Scalar FiatShamirChallenge(const Group& group, std::string_view context,
                           std::span<const Commitment> commitments) {
  Transcript t(group, context);
  for (const Commitment& c : commitments) t.Append(c);
  return t.Challenge();
}

}  // namespace hsense

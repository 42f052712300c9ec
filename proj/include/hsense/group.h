#ifndef HSENSE_GROUP_H_
#define HSENSE_GROUP_H_

#include <gmpxx.h>

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>

#include "absl/status/statusor.h"

namespace hsense {

class SecureRng;

// Identifier of the hash used by every party (challenges, tickets, signing).
inline constexpr std::string_view kHashId = "sha256";

// Element of Z_p. Always reduced; construct through Group::MakeScalar.
class Scalar {
 public:
  Scalar() = default;
  const mpz_class& value() const { return value_; }
  bool IsZero() const { return value_ == 0; }
  friend bool operator==(const Scalar& a, const Scalar& b) {
    return a.value_ == b.value_;
  }

 private:
  friend class Group;
  explicit Scalar(mpz_class v) : value_(std::move(v)) {}
  mpz_class value_ = 0;
};

// Quadratic residue mod q, i.e. a member of the order-p subgroup.
class GroupElement {
 public:
  GroupElement() = default;
  const mpz_class& value() const { return value_; }
  friend bool operator==(const GroupElement& a, const GroupElement& b) {
    return a.value_ == b.value_;
  }

 private:
  friend class Group;
  explicit GroupElement(mpz_class v) : value_(std::move(v)) {}
  mpz_class value_ = 1;
};

// (q, p, g, h): safe prime q = 2p + 1, g and h generate the order-p subgroup.
struct GroupParams {
  mpz_class q;
  mpz_class p;
  mpz_class g;
  mpz_class h;
  std::size_t bits = 0;
};

// Checks every GroupParams invariant (primality, q = 2p+1, generator orders).
absl::Status ValidateParams(const GroupParams& params);

// Arithmetic in Z_p and in the subgroup G of Z_q^*. Cheap to copy; the
// parameters are shared and immutable.
class Group {
 public:
  // Deterministic in (bits, seed). Searches upward from a seed-derived start
  // for a safe prime of exactly `bits` bits, wrapping within the bit range.
  static absl::StatusOr<Group> Generate(std::size_t bits, std::string_view seed);
  static absl::StatusOr<Group> FromParams(GroupParams params);
  // Group of a given safe prime q: g is the smallest nontrivial square and h
  // is hashed from `h_seed`, so nobody knows log_g(h).
  static absl::StatusOr<Group> FromSafePrime(const mpz_class& q,
                                             std::string_view h_seed);
  // The 2048-bit MODP safe prime of RFC 3526 (group 14).
  static absl::StatusOr<Group> Modp2048();

  const GroupParams& params() const { return *params_; }
  const mpz_class& order() const { return params_->p; }
  const mpz_class& modulus() const { return params_->q; }

  // Field Z_p.
  Scalar MakeScalar(const mpz_class& v) const;
  Scalar MakeScalar(std::int64_t v) const;
  Scalar Add(const Scalar& a, const Scalar& b) const;
  Scalar Sub(const Scalar& a, const Scalar& b) const;
  Scalar Mul(const Scalar& a, const Scalar& b) const;
  Scalar Neg(const Scalar& a) const;
  absl::StatusOr<Scalar> Inv(const Scalar& a) const;
  Scalar RandomScalar(SecureRng& rng) const;

  // Group G.
  GroupElement Identity() const { return GroupElement(mpz_class(1)); }
  GroupElement g() const { return GroupElement(params_->g); }
  GroupElement h() const { return GroupElement(params_->h); }
  GroupElement Mul(const GroupElement& a, const GroupElement& b) const;
  GroupElement Pow(const GroupElement& e, const Scalar& x) const;
  GroupElement Inv(const GroupElement& e) const;
  bool IsMember(const mpz_class& v) const;
  absl::StatusOr<GroupElement> MakeElement(const mpz_class& v) const;

  // SHA-256 digest as a big-endian integer, reduced mod p.
  Scalar HashToScalar(std::string_view data) const;
  // Squares a digest-derived integer in [2, q-1]; always lands in G.
  GroupElement HashToGroup(std::string_view data) const;
  // The digest -> element map used by HashToGroup: u = d mod q, bumped by 2
  // when u < 2, then u^2 mod q.
  GroupElement ElementFromDigest(const mpz_class& digest) const;

  // Fixed-width big-endian encodings.
  std::size_t scalar_bytes() const { return scalar_bytes_; }
  std::size_t element_bytes() const { return element_bytes_; }
  std::string Encode(const Scalar& s) const;
  std::string Encode(const GroupElement& e) const;
  absl::StatusOr<Scalar> DecodeScalar(std::string_view bytes) const;
  absl::StatusOr<GroupElement> DecodeElement(std::string_view bytes) const;
  std::string EncodeHex(const Scalar& s) const;
  std::string EncodeHex(const GroupElement& e) const;
  absl::StatusOr<Scalar> DecodeScalarHex(std::string_view hex) const;
  absl::StatusOr<GroupElement> DecodeElementHex(std::string_view hex) const;

  // Hex SHA-256 over the encoded (q, p, g, h); binds proofs to these params.
  const std::string& fingerprint() const { return fingerprint_; }

  friend bool operator==(const Group& a, const Group& b) {
    return a.fingerprint_ == b.fingerprint_;
  }

 private:
  explicit Group(GroupParams params);

  std::shared_ptr<const GroupParams> params_;
  std::size_t scalar_bytes_ = 0;
  std::size_t element_bytes_ = 0;
  std::string fingerprint_;
};

// Big-endian helpers shared by the encoders.
std::string ToFixedBytes(const mpz_class& v, std::size_t width);
mpz_class FromBytes(std::string_view bytes);
std::size_t ByteLength(const mpz_class& v);

}  // namespace hsense

#endif  // HSENSE_GROUP_H_

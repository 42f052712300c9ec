#include "hsense/group.h"

#include <algorithm>
#include <vector>

#include "absl/status/status.h"
#include "hsense/strings.h"
#include "hsense/hash.h"
#include "hsense/random.h"

namespace hsense {
namespace {

constexpr int kPrimalityRounds = 30;
constexpr std::uint32_t kSieveLimit = 1u << 16;

bool IsProbablePrime(const mpz_class& n, int rounds = kPrimalityRounds) {
  return mpz_probab_prime_p(n.get_mpz_t(), rounds) > 0;
}

// Cheap filter ahead of the full test; never rejects a prime.
bool PassesFermatBase2(const mpz_class& n) {
  if (n < 5) return n == 2 || n == 3;
  mpz_class e = n - 1;
  mpz_class r;
  mpz_powm(r.get_mpz_t(), mpz_class(2).get_mpz_t(), e.get_mpz_t(),
           n.get_mpz_t());
  return r == 1;
}

std::size_t BitLength(const mpz_class& v) {
  return v == 0 ? 0 : mpz_sizeinbase(v.get_mpz_t(), 2);
}

const std::vector<std::uint32_t>& SmallOddPrimes() {
  static const std::vector<std::uint32_t> primes = [] {
    std::vector<bool> composite(kSieveLimit, false);
    std::vector<std::uint32_t> out;
    for (std::uint32_t i = 2; i < kSieveLimit; ++i) {
      if (composite[i]) continue;
      if (i >= 5) out.push_back(i);
      for (std::uint64_t j = std::uint64_t{i} * i; j < kSieveLimit; j += i) {
        composite[j] = true;
      }
    }
    return out;
  }();
  return primes;
}

// Smallest value >= v that is congruent to 5 mod 6. Every safe prime q > 7
// has p = (q-1)/2 in this class.
mpz_class AlignFiveModSix(const mpz_class& v) {
  mpz_class r = v % 6;
  mpz_class out = v + (5 - r);
  if (out < v) out += 6;
  return out;
}

// Upward search for p with p and 2p+1 prime, p in [lo, hi], starting at
// `start` and wrapping once to `lo`.
absl::StatusOr<mpz_class> FindSophieGermain(const mpz_class& lo,
                                            const mpz_class& hi,
                                            const mpz_class& start) {
  const auto& primes = SmallOddPrimes();
  std::vector<std::uint32_t> sieve;
  for (std::uint32_t l : primes) {
    if (l >= lo) break;
    sieve.push_back(l);
  }
  std::vector<std::uint32_t> rem(sieve.size());

  mpz_class p = AlignFiveModSix(start);
  bool wrapped = false;
  auto reset_residues = [&] {
    for (std::size_t i = 0; i < sieve.size(); ++i) {
      rem[i] = static_cast<std::uint32_t>(
          mpz_fdiv_ui(p.get_mpz_t(), sieve[i]));
    }
  };
  reset_residues();

  for (;;) {
    if (p > hi) {
      if (wrapped) {
        return absl::NotFoundError("no safe prime in the requested bit range");
      }
      wrapped = true;
      p = AlignFiveModSix(lo);
      if (p > hi) {
        return absl::NotFoundError("no safe prime in the requested bit range");
      }
      reset_residues();
    }
    if (wrapped && p >= start) {
      return absl::NotFoundError("no safe prime in the requested bit range");
    }

    bool survives = true;
    for (std::size_t i = 0; i < sieve.size(); ++i) {
      // p = 0 kills p; p = (l-1)/2 kills 2p+1.
      if (rem[i] == 0 || rem[i] == (sieve[i] - 1) / 2) {
        survives = false;
        break;
      }
    }
    if (survives) {
      mpz_class q = 2 * p + 1;
      if (PassesFermatBase2(p) && PassesFermatBase2(q) &&
          IsProbablePrime(p) && IsProbablePrime(q)) {
        return p;
      }
    }
    p += 6;
    for (std::size_t i = 0; i < sieve.size(); ++i) {
      rem[i] += 6;
      if (rem[i] >= sieve[i]) rem[i] %= sieve[i];
    }
  }
}

}  // namespace

std::string ToFixedBytes(const mpz_class& v, std::size_t width) {
  std::string out(width, '\0');
  std::size_t count = 0;
  if (v != 0) {
    std::size_t need = ByteLength(v);
    if (need > width) return {};
    mpz_export(out.data() + (width - need), &count, 1, 1, 1, 0,
               v.get_mpz_t());
  }
  return out;
}

mpz_class FromBytes(std::string_view bytes) {
  mpz_class v;
  if (!bytes.empty()) {
    mpz_import(v.get_mpz_t(), bytes.size(), 1, 1, 1, 0, bytes.data());
  }
  return v;
}

std::size_t ByteLength(const mpz_class& v) { return (BitLength(v) + 7) / 8; }

absl::Status ValidateParams(const GroupParams& params) {
  const auto& [q, p, g, h, bits] = params;
  if (p < 2 || !IsProbablePrime(p)) {
    return absl::InvalidArgumentError("group order p is not prime");
  }
  if (q != 2 * p + 1 || !IsProbablePrime(q)) {
    return absl::InvalidArgumentError("q is not the safe prime 2p+1");
  }
  if (BitLength(q) != bits) {
    return absl::InvalidArgumentError("declared bit size does not match q");
  }
  for (const mpz_class* gen : {&g, &h}) {
    if (*gen <= 1 || *gen >= q) {
      return absl::InvalidArgumentError("generator out of range");
    }
    mpz_class check;
    mpz_powm(check.get_mpz_t(), gen->get_mpz_t(), p.get_mpz_t(),
             q.get_mpz_t());
    if (check != 1) {
      return absl::InvalidArgumentError("generator outside order-p subgroup");
    }
  }
  if (g == h) return absl::InvalidArgumentError("g and h coincide");
  return absl::OkStatus();
}

Group::Group(GroupParams params)
    : params_(std::make_shared<const GroupParams>(std::move(params))) {
  scalar_bytes_ = ByteLength(params_->p);
  element_bytes_ = ByteLength(params_->q);
  std::string material = "hsense-params";
  for (const mpz_class* v :
       {&params_->q, &params_->p, &params_->g, &params_->h}) {
    material.push_back('|');
    material += ToFixedBytes(*v, element_bytes_);
  }
  fingerprint_ = HexEncode(Sha256(material));
}

absl::StatusOr<Group> Group::FromParams(GroupParams params) {
  if (absl::Status s = ValidateParams(params); !s.ok()) return s;
  return Group(std::move(params));
}

absl::StatusOr<Group> Group::Generate(std::size_t bits, std::string_view seed) {
  if (bits < 4) {
    return absl::InvalidArgumentError("group size must be at least 4 bits");
  }
  mpz_class q_lo = mpz_class(1) << static_cast<mp_bitcnt_t>(bits - 1);
  mpz_class q_hi = (mpz_class(1) << static_cast<mp_bitcnt_t>(bits)) - 1;
  mpz_class p_lo = q_lo / 2;
  mpz_class p_hi = (q_hi - 1) / 2;

  std::string start_bytes = ExpandDigest(
      Cat("hsense-safe-prime|", bits, "|", seed), (bits + 7) / 8);
  mpz_class offset = FromBytes(start_bytes) % (p_hi - p_lo + 1);
  absl::StatusOr<mpz_class> p = FindSophieGermain(p_lo, p_hi, p_lo + offset);
  if (!p.ok()) return p.status();

  return FromSafePrime(2 * *p + 1, seed);
}

absl::StatusOr<Group> Group::FromSafePrime(const mpz_class& q,
                                          std::string_view h_seed) {
  // Primality is left to ValidateParams in FromParams.
  if (q < 7 || q % 2 == 0) {
    return absl::InvalidArgumentError("modulus is not a safe prime");
  }
  GroupParams params;
  params.q = q;
  params.p = (q - 1) / 2;
  params.bits = BitLength(q);
  for (mpz_class u = 2;; ++u) {
    mpz_class sq = (u * u) % params.q;
    if (sq != 1) {
      params.g = sq;
      break;
    }
  }
  // h must not collapse onto 1 or g; the partially built group is only used
  // for its hash-to-group map.
  params.h = params.g == 4 ? 9 : 4;
  Group scratch(params);
  std::string base = Cat(h_seed, "h-gen");
  GroupElement h = scratch.HashToGroup(base);
  for (std::uint32_t counter = 1; h.value() == 1 || h.value() == params.g;
       ++counter) {
    std::string tagged = base;
    for (int i = 3; i >= 0; --i) {
      tagged.push_back(static_cast<char>((counter >> (8 * i)) & 0xFF));
    }
    h = scratch.HashToGroup(tagged);
  }
  params.h = h.value();
  return FromParams(std::move(params));
}

absl::StatusOr<Group> Group::Modp2048() {
  static constexpr char kPrime[] =
      "FFFFFFFFFFFFFFFFC90FDAA22168C234C4C6628B80DC1CD1"
      "29024E088A67CC74020BBEA63B139B22514A08798E3404DD"
      "EF9519B3CD3A431B302B0A6DF25F14374FE1356D6D51C245"
      "E485B576625E7EC6F44C42E9A637ED6B0BFF5CB6F406B7ED"
      "EE386BFB5A899FA5AE9F24117C4B1FE649286651ECE45B3D"
      "C2007CB8A163BF0598DA48361C55D39A69163FA8FD24CF5F"
      "83655D23DCA3AD961C62F356208552BB9ED529077096966D"
      "670C354E4ABC9804F1746C08CA18217C32905E462E36CE3B"
      "E39E772C180E86039B2783A2EC07A28FB5C55DF06F4C52C9"
      "DE2BCBF6955817183995497CEA956AE515D2261898FA0510"
      "15728E5A8AACAA68FFFFFFFFFFFFFFFF";
  return FromSafePrime(mpz_class(kPrime, 16), "modp2048");
}

Scalar Group::MakeScalar(const mpz_class& v) const {
  mpz_class r;
  mpz_mod(r.get_mpz_t(), v.get_mpz_t(), params_->p.get_mpz_t());
  return Scalar(std::move(r));
}

Scalar Group::MakeScalar(std::int64_t v) const {
  return MakeScalar(mpz_class(static_cast<long>(v)));
}

Scalar Group::Add(const Scalar& a, const Scalar& b) const {
  mpz_class r = a.value_ + b.value_;
  if (r >= params_->p) r -= params_->p;
  return Scalar(std::move(r));
}

Scalar Group::Sub(const Scalar& a, const Scalar& b) const {
  mpz_class r = a.value_ - b.value_;
  if (r < 0) r += params_->p;
  return Scalar(std::move(r));
}

Scalar Group::Mul(const Scalar& a, const Scalar& b) const {
  return MakeScalar(a.value_ * b.value_);
}

Scalar Group::Neg(const Scalar& a) const {
  if (a.value_ == 0) return a;
  return Scalar(params_->p - a.value_);
}

absl::StatusOr<Scalar> Group::Inv(const Scalar& a) const {
  if (a.value_ == 0) {
    return absl::InvalidArgumentError("inverse of zero scalar");
  }
  mpz_class r;
  mpz_invert(r.get_mpz_t(), a.value_.get_mpz_t(), params_->p.get_mpz_t());
  return Scalar(std::move(r));
}

Scalar Group::RandomScalar(SecureRng& rng) const {
  return Scalar(rng.Below(params_->p));
}

GroupElement Group::Mul(const GroupElement& a, const GroupElement& b) const {
  mpz_class r = a.value_ * b.value_;
  mpz_mod(r.get_mpz_t(), r.get_mpz_t(), params_->q.get_mpz_t());
  return GroupElement(std::move(r));
}

GroupElement Group::Pow(const GroupElement& e, const Scalar& x) const {
  mpz_class r;
  mpz_powm(r.get_mpz_t(), e.value_.get_mpz_t(), x.value_.get_mpz_t(),
           params_->q.get_mpz_t());
  return GroupElement(std::move(r));
}

GroupElement Group::Inv(const GroupElement& e) const {
  mpz_class r;
  mpz_invert(r.get_mpz_t(), e.value_.get_mpz_t(), params_->q.get_mpz_t());
  return GroupElement(std::move(r));
}

bool Group::IsMember(const mpz_class& v) const {
  if (v < 1 || v >= params_->q) return false;
  mpz_class check;
  mpz_powm(check.get_mpz_t(), v.get_mpz_t(), params_->p.get_mpz_t(),
           params_->q.get_mpz_t());
  return check == 1;
}

absl::StatusOr<GroupElement> Group::MakeElement(const mpz_class& v) const {
  if (!IsMember(v)) {
    return absl::InvalidArgumentError("value is not in the order-p subgroup");
  }
  return GroupElement(v);
}

Scalar Group::HashToScalar(std::string_view data) const {
  return MakeScalar(FromBytes(Sha256(data)));
}

GroupElement Group::ElementFromDigest(const mpz_class& digest) const {
  mpz_class u = digest % params_->q;
  if (u < 2) u += 2;
  mpz_class r = u * u;
  mpz_mod(r.get_mpz_t(), r.get_mpz_t(), params_->q.get_mpz_t());
  return GroupElement(std::move(r));
}

GroupElement Group::HashToGroup(std::string_view data) const {
  // 16 spare bytes keep the reduction mod q close to uniform.
  return ElementFromDigest(
      FromBytes(ExpandDigest(data, element_bytes_ + 16)));
}

std::string Group::Encode(const Scalar& s) const {
  return ToFixedBytes(s.value_, scalar_bytes_);
}

std::string Group::Encode(const GroupElement& e) const {
  return ToFixedBytes(e.value_, element_bytes_);
}

absl::StatusOr<Scalar> Group::DecodeScalar(std::string_view bytes) const {
  if (bytes.size() != scalar_bytes_) {
    return absl::InvalidArgumentError("scalar encoding has wrong length");
  }
  mpz_class v = FromBytes(bytes);
  if (v >= params_->p) {
    return absl::InvalidArgumentError("scalar out of range");
  }
  return Scalar(std::move(v));
}

absl::StatusOr<GroupElement> Group::DecodeElement(std::string_view bytes) const {
  if (bytes.size() != element_bytes_) {
    return absl::InvalidArgumentError("element encoding has wrong length");
  }
  return MakeElement(FromBytes(bytes));
}

std::string Group::EncodeHex(const Scalar& s) const {
  return HexEncode(Encode(s));
}

std::string Group::EncodeHex(const GroupElement& e) const {
  return HexEncode(Encode(e));
}

absl::StatusOr<Scalar> Group::DecodeScalarHex(std::string_view hex) const {
  std::optional<std::string> bytes = HexDecode(hex);
  if (!bytes) return absl::InvalidArgumentError("malformed hex scalar");
  return DecodeScalar(*bytes);
}

absl::StatusOr<GroupElement> Group::DecodeElementHex(std::string_view hex) const {
  std::optional<std::string> bytes = HexDecode(hex);
  if (!bytes) return absl::InvalidArgumentError("malformed hex element");
  return DecodeElement(*bytes);
}

}  // namespace hsense

#include "hsense/signature.h"

#include "absl/status/status.h"
#include "hsense/hash.h"
#include "hsense/random.h"

namespace hsense {
namespace {

mpz_class RandomPrime(std::size_t bits, SecureRng& rng) {
  std::string bytes = rng.Bytes((bits + 7) / 8);
  mpz_class v = FromBytes(bytes);
  v %= mpz_class(1) << static_cast<mp_bitcnt_t>(bits);
  // Top two bits set so the product has exactly 2 * bits bits.
  mpz_setbit(v.get_mpz_t(), bits - 1);
  mpz_setbit(v.get_mpz_t(), bits - 2);
  mpz_class p;
  mpz_nextprime(p.get_mpz_t(), v.get_mpz_t());
  return p;
}

mpz_class MessageRepresentative(const PublicKey& key, std::string_view message) {
  return FromBytes(Sha256(message)) % key.n;
}

}  // namespace

std::size_t PublicKey::bytes() const { return ByteLength(n); }

absl::StatusOr<ServerKeys> GenerateServerKeys(int bits, SecureRng& rng) {
  if (bits < 64) {
    return absl::InvalidArgumentError("signing key must be at least 64 bits");
  }
  const std::size_t half = static_cast<std::size_t>(bits) / 2;
  const mpz_class e = 65537;
  for (;;) {
    mpz_class p = RandomPrime(half, rng);
    mpz_class q = RandomPrime(static_cast<std::size_t>(bits) - half, rng);
    if (p == q) continue;
    mpz_class phi = (p - 1) * (q - 1);
    mpz_class d;
    if (mpz_invert(d.get_mpz_t(), e.get_mpz_t(), phi.get_mpz_t()) == 0) {
      continue;
    }
    ServerKeys keys;
    keys.pub.n = p * q;
    keys.pub.e = e;
    keys.d = d;
    return keys;
  }
}

Signature Sign(const ServerKeys& keys, std::string_view message) {
  mpz_class m = MessageRepresentative(keys.pub, message);
  mpz_class s;
  mpz_powm(s.get_mpz_t(), m.get_mpz_t(), keys.d.get_mpz_t(),
           keys.pub.n.get_mpz_t());
  return ToFixedBytes(s, keys.pub.bytes());
}

bool Verify(const PublicKey& key, std::string_view message,
            const Signature& sig) {
  if (key.n <= 1 || sig.size() != key.bytes()) return false;
  mpz_class s = FromBytes(sig);
  if (s >= key.n) return false;
  mpz_class recovered;
  mpz_powm(recovered.get_mpz_t(), s.get_mpz_t(), key.e.get_mpz_t(),
           key.n.get_mpz_t());
  return recovered == MessageRepresentative(key, message);
}

std::string CredentialMessage(const Group& group, const Commitment& cm_s,
                              const Commitment& cm_q, const Commitment& cm_b) {
  std::string m = group.Encode(cm_s.element);
  m.push_back('|');
  m += group.Encode(cm_q.element);
  m.push_back('|');
  m += group.Encode(cm_b.element);
  return m;
}

Signature SignCredential(const Group& group, const ServerKeys& keys,
                         const Commitment& cm_s, const Commitment& cm_q,
                         const Commitment& cm_b) {
  return Sign(keys, CredentialMessage(group, cm_s, cm_q, cm_b));
}

bool VerifyCredential(const Group& group, const PublicKey& key,
                      const Commitment& cm_s, const Commitment& cm_q,
                      const Commitment& cm_b, const Signature& sig) {
  return Verify(key, CredentialMessage(group, cm_s, cm_q, cm_b), sig);
}

bool SecretOpensPublic(const Group& group, const CredentialSecret& secret,
                       const CredentialPublic& pub) {
  return VerifyOpening(group, pub.cm_s, {secret.s, secret.r_s}) &&
         VerifyOpening(group, pub.cm_q, {secret.q, secret.r_q}) &&
         VerifyOpening(group, pub.cm_b, {secret.b, secret.r_b});
}

}  // namespace hsense

#ifndef HSENSE_SIGNATURE_H_
#define HSENSE_SIGNATURE_H_

#include <gmpxx.h>

#include <string>
#include <string_view>

#include "absl/status/statusor.h"
#include "hsense/commitment.h"
#include "hsense/group.h"

namespace hsense {

class SecureRng;

// Hash-then-sign with textbook modular exponentiation:
//   sign(m) = H(m)^d mod n,   verify: sig^e mod n == H(m) mod n.
// Sign/Verify below are the only places the scheme is touched; a padded
// standard scheme can be dropped in behind them.
struct PublicKey {
  mpz_class n;
  mpz_class e;
  std::size_t bytes() const;  // fixed signature width
  friend bool operator==(const PublicKey&, const PublicKey&) = default;
};

struct ServerKeys {
  PublicKey pub;
  mpz_class d;
};

using Signature = std::string;  // big-endian, exactly pub.bytes() long

// bits >= 64. Deterministic for a deterministic rng.
absl::StatusOr<ServerKeys> GenerateServerKeys(int bits, SecureRng& rng);

Signature Sign(const ServerKeys& keys, std::string_view message);
bool Verify(const PublicKey& key, std::string_view message,
            const Signature& sig);

// Signed byte layout: Enc(cm_s) | Enc(cm_q) | Enc(cm_b), '|' = 0x7C.
std::string CredentialMessage(const Group& group, const Commitment& cm_s,
                              const Commitment& cm_q, const Commitment& cm_b);

Signature SignCredential(const Group& group, const ServerKeys& keys,
                         const Commitment& cm_s, const Commitment& cm_q,
                         const Commitment& cm_b);
bool VerifyCredential(const Group& group, const PublicKey& key,
                      const Commitment& cm_s, const Commitment& cm_q,
                      const Commitment& cm_b, const Signature& sig);

// What the server sees of a credential Q = (s, q, b).
struct CredentialPublic {
  Commitment cm_s;
  Commitment cm_q;
  Commitment cm_b;
  Signature sig;
};

// What only the holder knows. The server only ever shifts cm_s and cm_b by
// zero-mask commitments, so r_s and r_b are fixed for the credential's life.
struct CredentialSecret {
  Scalar s;
  Scalar q;
  Scalar b;
  Scalar r_s;
  Scalar r_q;
  Scalar r_b;
};

bool SecretOpensPublic(const Group& group, const CredentialSecret& secret,
                       const CredentialPublic& pub);

}  // namespace hsense

#endif  // HSENSE_SIGNATURE_H_

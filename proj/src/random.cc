#include "hsense/random.h"

#include <openssl/rand.h>
#include <openssl/sha.h>

#include <cstring>
#include <stdexcept>

#include "hsense/group.h"
#include "hsense/hash.h"

namespace hsense {

SecureRng::SecureRng(std::string_view seed_material) {
  std::string digest = Sha256(Cat("hsense-rng|", seed_material));
  std::memcpy(key_.data(), digest.data(), key_.size());
}

SecureRng SecureRng::FromSystem() {
  std::array<unsigned char, 48> seed{};
  if (RAND_bytes(seed.data(), static_cast<int>(seed.size())) != 1) {
    throw std::runtime_error("system entropy source unavailable");
  }
  return SecureRng(std::string_view(reinterpret_cast<const char*>(seed.data()),
                                    seed.size()));
}

SecureRng SecureRng::FromSeed(std::string_view seed) { return SecureRng(seed); }

void SecureRng::Refill() {
  unsigned char input[40];
  std::memcpy(input, key_.data(), 32);
  for (int i = 0; i < 8; ++i) {
    input[32 + i] = static_cast<unsigned char>(counter_ >> (56 - 8 * i));
  }
  ++counter_;
  SHA256(input, sizeof(input), block_.data());
  used_ = 0;
}

std::string SecureRng::Bytes(std::size_t n) {
  std::string out;
  out.reserve(n);
  while (out.size() < n) {
    if (used_ == block_.size()) Refill();
    std::size_t take = std::min(n - out.size(), block_.size() - used_);
    out.append(reinterpret_cast<const char*>(block_.data()) + used_, take);
    used_ += take;
  }
  return out;
}

std::uint64_t SecureRng::NextU64() {
  std::string b = Bytes(8);
  std::uint64_t v = 0;
  for (unsigned char c : b) v = (v << 8) | c;
  return v;
}

std::uint64_t SecureRng::Below(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("Below(0)");
  // Reject the top partial bucket so every residue is equally likely.
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound + 1) % bound;
  for (;;) {
    std::uint64_t v = NextU64();
    if (v <= limit) return v % bound;
  }
}

mpz_class SecureRng::Below(const mpz_class& bound) {
  if (bound <= 0) throw std::invalid_argument("Below(<=0)");
  const std::size_t bits = mpz_sizeinbase(bound.get_mpz_t(), 2);
  const std::size_t nbytes = (bits + 7) / 8;
  const unsigned excess = static_cast<unsigned>(nbytes * 8 - bits);
  for (;;) {
    std::string b = Bytes(nbytes);
    b[0] = static_cast<char>(static_cast<unsigned char>(b[0]) &
                             (0xFFu >> excess));
    mpz_class v = FromBytes(b);
    if (v < bound) return v;
  }
}

SecureRng SecureRng::Fork() { return SecureRng(Bytes(32)); }

}  // namespace hsense

#ifndef HSENSE_RANDOM_H_
#define HSENSE_RANDOM_H_

#include <gmpxx.h>

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace hsense {

// SHA-256 counter-mode generator. Seeded either from the operating system
// (production) or from a caller-supplied seed (reproducible tests and
// benchmarks). Not thread-safe; give each thread its own instance.
class SecureRng {
 public:
  static SecureRng FromSystem();
  static SecureRng FromSeed(std::string_view seed);

  std::string Bytes(std::size_t n);
  std::uint64_t NextU64();
  // Uniform in [0, bound) by rejection sampling. bound must be positive.
  mpz_class Below(const mpz_class& bound);
  std::uint64_t Below(std::uint64_t bound);
  // Derives an independent child generator; the parent advances.
  SecureRng Fork();

 private:
  explicit SecureRng(std::string_view seed_material);
  void Refill();

  std::array<unsigned char, 32> key_{};
  std::uint64_t counter_ = 0;
  std::array<unsigned char, 32> block_{};
  std::size_t used_ = 32;
};

}  // namespace hsense

#endif  // HSENSE_RANDOM_H_

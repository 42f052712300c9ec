#include "hsense/hash.h"

#include <openssl/sha.h>

namespace hsense {

std::string Sha256(std::string_view data) {
  unsigned char out[SHA256_DIGEST_LENGTH];
  SHA256(reinterpret_cast<const unsigned char*>(data.data()), data.size(), out);
  return std::string(reinterpret_cast<const char*>(out), sizeof(out));
}

std::string ExpandDigest(std::string_view data, std::size_t length) {
  std::string out;
  out.reserve(length + SHA256_DIGEST_LENGTH);
  for (std::uint32_t block = 0; out.size() < length; ++block) {
    std::string input;
    input.reserve(data.size() + 4);
    for (int i = 3; i >= 0; --i) {
      input.push_back(static_cast<char>((block >> (8 * i)) & 0xFF));
    }
    input.append(data);
    out += Sha256(input);
  }
  out.resize(length);
  return out;
}

std::string HexEncode(std::string_view bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (unsigned char c : bytes) {
    out.push_back(kDigits[c >> 4]);
    out.push_back(kDigits[c & 0x0F]);
  }
  return out;
}

namespace {
int Nibble(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}
}  // namespace

std::optional<std::string> HexDecode(std::string_view hex) {
  if (hex.size() % 2 != 0) return std::nullopt;
  std::string out;
  out.reserve(hex.size() / 2);
  for (std::size_t i = 0; i < hex.size(); i += 2) {
    int hi = Nibble(hex[i]);
    int lo = Nibble(hex[i + 1]);
    if (hi < 0 || lo < 0) return std::nullopt;
    out.push_back(static_cast<char>((hi << 4) | lo));
  }
  return out;
}

std::string EncodeSlot(std::int64_t slot) {
  std::string out(8, '\0');
  auto u = static_cast<std::uint64_t>(slot);
  for (int i = 7; i >= 0; --i) {
    out[i] = static_cast<char>(u & 0xFF);
    u >>= 8;
  }
  return out;
}

}  // namespace hsense

#ifndef HSENSE_HASH_H_
#define HSENSE_HASH_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "hsense/strings.h"

namespace hsense {

// Raw 32-byte SHA-256 digest.
std::string Sha256(std::string_view data);

// SHA-256 in counter mode, truncated to `length` bytes.
std::string ExpandDigest(std::string_view data, std::size_t length);

std::string HexEncode(std::string_view bytes);
std::optional<std::string> HexDecode(std::string_view hex);

// 8-byte big-endian encoding of a time slot (ticket masks, contexts).
std::string EncodeSlot(std::int64_t slot);

}  // namespace hsense

#endif  // HSENSE_HASH_H_

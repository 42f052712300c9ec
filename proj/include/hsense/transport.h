#ifndef HSENSE_TRANSPORT_H_
#define HSENSE_TRANSPORT_H_

// Length-prefixed framing: a 4-byte big-endian payload length, then the
// payload. Frames larger than the cap are refused on both ends.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "absl/status/statusor.h"

namespace hsense {

inline constexpr std::size_t kFrameHeaderBytes = 4;
inline constexpr std::size_t kDefaultFrameCap = 1 << 20;

std::string EncodeFrame(std::string_view payload);

// Parses one frame from the front of `buffer`. Returns nullopt when more
// bytes are needed, an error when the header announces an oversize frame.
absl::StatusOr<std::optional<std::string>> DecodeFrame(
    std::string_view buffer, std::size_t cap = kDefaultFrameCap,
    std::size_t* consumed = nullptr);

// Blocking socket I/O. Both return the number of bytes moved on the wire,
// header included. A clean end of stream before any header byte is
// OutOfRange; a stream that ends mid-frame is a transport error.
absl::StatusOr<std::size_t> WriteFrame(int fd, std::string_view payload,
                                       std::size_t cap = kDefaultFrameCap);
absl::StatusOr<std::string> ReadFrame(int fd,
                                      std::size_t cap = kDefaultFrameCap);

}  // namespace hsense

#endif  // HSENSE_TRANSPORT_H_

#include "hsense/transport.h"

#include <cerrno>
#include <cstring>

#include <sys/socket.h>
#include <unistd.h>

#include "absl/status/status.h"
#include "hsense/status.h"
#include "hsense/strings.h"

namespace hsense {
namespace {

std::uint32_t ReadLength(std::string_view header) {
  std::uint32_t n = 0;
  for (int i = 0; i < 4; ++i) {
    n = (n << 8) | static_cast<unsigned char>(header[i]);
  }
  return n;
}

absl::Status Oversize(std::size_t n, std::size_t cap) {
  return Reject(Reason::kTransport, Cat("frame of ", n, " bytes exceeds cap ",
                                        cap));
}

// Reads exactly n bytes; returns how many arrived before end of stream.
absl::StatusOr<std::size_t> ReadFully(int fd, char* out, std::size_t n) {
  std::size_t got = 0;
  while (got < n) {
    ssize_t r = ::recv(fd, out + got, n - got, 0);
    if (r == 0) break;
    if (r < 0) {
      if (errno == EINTR) continue;
      return Reject(Reason::kTransport, Cat("recv: ", std::strerror(errno)));
    }
    got += static_cast<std::size_t>(r);
  }
  return got;
}

}  // namespace

std::string EncodeFrame(std::string_view payload) {
  const auto n = static_cast<std::uint32_t>(payload.size());
  std::string out;
  out.reserve(kFrameHeaderBytes + payload.size());
  for (int shift = 24; shift >= 0; shift -= 8) {
    out.push_back(static_cast<char>((n >> shift) & 0xFF));
  }
  out.append(payload);
  return out;
}

absl::StatusOr<std::optional<std::string>> DecodeFrame(
    std::string_view buffer, std::size_t cap, std::size_t* consumed) {
  if (buffer.size() < kFrameHeaderBytes) return std::nullopt;
  const std::size_t n = ReadLength(buffer);
  if (n > cap) return Oversize(n, cap);
  if (buffer.size() < kFrameHeaderBytes + n) return std::nullopt;
  if (consumed) *consumed = kFrameHeaderBytes + n;
  return std::string(buffer.substr(kFrameHeaderBytes, n));
}

absl::StatusOr<std::size_t> WriteFrame(int fd, std::string_view payload,
                                       std::size_t cap) {
  if (payload.size() > cap) return Oversize(payload.size(), cap);
  const std::string frame = EncodeFrame(payload);
  std::size_t sent = 0;
  while (sent < frame.size()) {
    ssize_t w = ::send(fd, frame.data() + sent, frame.size() - sent,
                       MSG_NOSIGNAL);
    if (w < 0) {
      if (errno == EINTR) continue;
      return Reject(Reason::kTransport, Cat("send: ", std::strerror(errno)));
    }
    sent += static_cast<std::size_t>(w);
  }
  return frame.size();
}

absl::StatusOr<std::string> ReadFrame(int fd, std::size_t cap) {
  char header[kFrameHeaderBytes];
  absl::StatusOr<std::size_t> got = ReadFully(fd, header, sizeof(header));
  if (!got.ok()) return got.status();
  if (*got == 0) return absl::OutOfRangeError("end of stream");
  if (*got < sizeof(header)) {
    return Reject(Reason::kTransport, "truncated frame header");
  }
  const std::size_t n = ReadLength(std::string_view(header, sizeof(header)));
  if (n > cap) return Oversize(n, cap);
  std::string payload(n, '\0');
  got = ReadFully(fd, payload.data(), n);
  if (!got.ok()) return got.status();
  if (*got < n) return Reject(Reason::kTransport, "truncated frame body");
  return payload;
}

}  // namespace hsense

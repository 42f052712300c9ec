#ifndef HSENSE_STRINGS_H_
#define HSENSE_STRINGS_H_

// Small string helpers. The system absl is built with its own string_view,
// so its StrCat does not accept std::string_view.

#include <charconv>
#include <concepts>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hsense {

namespace strings_internal {

inline void AppendPiece(std::string& out, std::string_view s) { out += s; }
inline void AppendPiece(std::string& out, char c) { out += c; }
template <std::integral T>
  requires(!std::same_as<T, char> && !std::same_as<T, bool>)
void AppendPiece(std::string& out, T v) {
  char buf[24];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, end);
}

}  // namespace strings_internal

template <typename... Args>
std::string Cat(const Args&... args) {
  std::string out;
  (strings_internal::AppendPiece(out, args), ...);
  return out;
}

template <std::integral T>
std::optional<T> ParseInt(std::string_view s) {
  T v{};
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size() || s.empty()) {
    return std::nullopt;
  }
  return v;
}

std::vector<std::string> Split(std::string_view s, char sep);
std::string Join(const std::vector<std::string_view>& parts, char sep);

}  // namespace hsense

#endif  // HSENSE_STRINGS_H_

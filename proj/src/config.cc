#include "hsense/config.h"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "absl/status/status.h"
#include "hsense/random.h"
#include "hsense/strings.h"

namespace hsense {
namespace {

std::string_view Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
absl::Status SetInt(T& field, std::string_view key, std::string_view value) {
  std::optional<T> v = ParseInt<T>(value);
  if (!v) return absl::InvalidArgumentError(Cat("bad integer for ", key));
  field = *v;
  return absl::OkStatus();
}

absl::Status SetDouble(double& field, std::string_view key,
                       std::string_view value) {
  double v = 0;
  auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || end != value.data() + value.size()) {
    return absl::InvalidArgumentError(Cat("bad number for ", key));
  }
  field = v;
  return absl::OkStatus();
}

}  // namespace

absl::StatusOr<std::map<std::string, std::string>> ParseKeyValues(
    std::string_view text) {
  std::map<std::string, std::string> out;
  int line_no = 0;
  for (const std::string& raw : Split(text, '\n')) {
    ++line_no;
    std::string_view line = raw;
    if (auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      return absl::InvalidArgumentError(Cat("line ", line_no, ": expected key = value"));
    }
    std::string key(Trim(line.substr(0, eq)));
    if (key.empty()) {
      return absl::InvalidArgumentError(Cat("line ", line_no, ": empty key"));
    }
    out[key] = std::string(Trim(line.substr(eq + 1)));
  }
  return out;
}

absl::Status HarnessConfig::Apply(
    const std::map<std::string, std::string>& values) {
  using Setter = std::function<absl::Status(std::string_view)>;
  const std::map<std::string, Setter, std::less<>> setters = {
      {"group", [&](auto v) { group = v; return absl::OkStatus(); }},
      {"group_bits", [&](auto v) { return SetInt(group_bits, "group_bits", v); }},
      {"group_seed", [&](auto v) { group_seed = v; return absl::OkStatus(); }},
      {"key_bits", [&](auto v) { return SetInt(key_bits, "key_bits", v); }},
      {"key_seed", [&](auto v) { key_seed = v; return absl::OkStatus(); }},
      {"b0", [&](auto v) { return SetInt(b0, "b0", v); }},
      {"c_q", [&](auto v) { return SetInt(c_q, "c_q", v); }},
      {"credit_per_entry",
       [&](auto v) { return SetInt(credit_per_entry, "credit_per_entry", v); }},
      {"epsilon", [&](auto v) { return SetInt(epsilon, "epsilon", v); }},
      {"slot_length",
       [&](auto v) { return SetDouble(slot_length_s, "slot_length", v); }},
      {"nn_bits", [&](auto v) { return SetInt(nn_bits, "nn_bits", v); }},
      {"listen",
       [&](std::string_view v) -> absl::Status {
         const auto colon = v.rfind(':');
         if (colon == std::string_view::npos) {
           return absl::InvalidArgumentError("listen must be host:port");
         }
         host = std::string(v.substr(0, colon));
         return SetInt(port, "listen", v.substr(colon + 1));
       }},
      {"journal", [&](auto v) { journal = v; return absl::OkStatus(); }},
      {"session_timeout_ms",
       [&](auto v) {
         return SetInt(session_timeout_ms, "session_timeout_ms", v);
       }},
  };
  for (const auto& [key, value] : values) {
    auto it = setters.find(key);
    if (it == setters.end()) {
      return absl::InvalidArgumentError(Cat("unknown config key ", key));
    }
    if (absl::Status s = it->second(value); !s.ok()) return s;
  }
  return absl::OkStatus();
}

absl::StatusOr<HarnessConfig> HarnessConfig::Load(const std::string& path) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError("cannot read config " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  absl::StatusOr<std::map<std::string, std::string>> values =
      ParseKeyValues(buf.str());
  if (!values.ok()) return values.status();
  HarnessConfig config;
  if (absl::Status s = config.Apply(*values); !s.ok()) return s;
  return config;
}

absl::StatusOr<ServerConfig> MakeServerConfig(const HarnessConfig& config) {
  absl::StatusOr<Group> group = absl::InvalidArgumentError(
      Cat("unknown group ", config.group, " (modp2048 or generate)"));
  if (config.group == "modp2048") {
    group = Group::Modp2048();
  } else if (config.group == "generate") {
    if (config.group_bits < 4) {
      return absl::InvalidArgumentError("group_bits must be at least 4");
    }
    group = Group::Generate(static_cast<std::size_t>(config.group_bits),
                            config.group_seed);
  }
  if (!group.ok()) return group.status();
  SecureRng key_rng = config.key_seed.empty()
                          ? SecureRng::FromSystem()
                          : SecureRng::FromSeed(config.key_seed);
  absl::StatusOr<ServerKeys> keys = GenerateServerKeys(config.key_bits, key_rng);
  if (!keys.ok()) return keys.status();
  ServerConfig sc(*std::move(group), *std::move(keys));
  sc.b0 = config.b0;
  sc.c_q = config.c_q;
  sc.credit_per_entry = config.credit_per_entry;
  sc.epsilon = config.epsilon;
  sc.slot_length_s = config.slot_length_s;
  sc.nn_bits = config.nn_bits;
  sc.journal_path = config.journal;
  sc.session_timeout = std::chrono::milliseconds(config.session_timeout_ms);
  return sc;
}

}  // namespace hsense

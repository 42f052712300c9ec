#ifndef HSENSE_CONFIG_H_
#define HSENSE_CONFIG_H_

#include <cstdint>
#include <map>
#include <string>
#include <string_view>

#include "absl/status/statusor.h"
#include "hsense/server.h"

namespace hsense {

// Flat `key = value` text; '#' starts a comment.
absl::StatusOr<std::map<std::string, std::string>> ParseKeyValues(
    std::string_view text);

struct HarnessConfig {
  // "modp2048" for the fixed 2048-bit safe prime, "generate" to search for
  // one of group_bits bits from group_seed.
  std::string group = "modp2048";
  int group_bits = 2048;
  std::string group_seed = "hsense-default-group";
  int key_bits = 2048;
  std::string key_seed;  // empty: fresh key from the system
  std::uint64_t b0 = 0;
  std::uint64_t c_q = 1;
  std::uint64_t credit_per_entry = 1;
  std::int64_t epsilon = 0;
  double slot_length_s = 60;
  int nn_bits = 32;
  std::string host = "127.0.0.1";
  int port = 7411;
  std::string journal;
  int session_timeout_ms = 30000;

  // Applies every key in `values`; unknown keys are an error.
  absl::Status Apply(const std::map<std::string, std::string>& values);
  static absl::StatusOr<HarnessConfig> Load(const std::string& path);
};

// Generates the group and server keys described by `config`.
absl::StatusOr<ServerConfig> MakeServerConfig(const HarnessConfig& config);

}  // namespace hsense

#endif  // HSENSE_CONFIG_H_

// hsense: server, client, blur metric and benchmark entry points.
//
// Exit codes: 0 success, 1 usage or local error, 2 protocol rejection,
// 3 transport error.

#include <csignal>
#include <chrono>
#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "hsense/bench.h"
#include "hsense/blur.h"
#include "hsense/client.h"
#include "hsense/config.h"
#include "hsense/net.h"
#include "hsense/server.h"
#include "hsense/status.h"
#include "hsense/strings.h"

namespace {

using namespace hsense;

constexpr int kExitOk = 0;
constexpr int kExitLocal = 1;
constexpr int kExitRejected = 2;
constexpr int kExitTransport = 3;

int Report(const absl::Status& status) {
  if (status.ok()) return kExitOk;
  std::cerr << "error: " << status.message() << "\n";
  std::optional<Reason> reason = ReasonOf(status);
  if (!reason) return kExitLocal;
  return *reason == Reason::kTransport ? kExitTransport : kExitRejected;
}

struct ServerFlags {
  std::string config_path;
  std::map<std::string, std::string> overrides;
};

void AddServerFlags(CLI::App* cmd, ServerFlags& flags) {
  cmd->add_option("-c,--config", flags.config_path, "key = value config file");
  for (const char* key :
       {"group", "group_bits", "group_seed", "key_bits", "key_seed", "b0", "c_q",
        "credit_per_entry", "epsilon", "slot_length", "nn_bits", "listen",
        "journal", "session_timeout_ms"}) {
    std::string flag = Cat("--", key);
    cmd->add_option_function<std::string>(
        flag, [&flags, k = std::string(key)](const std::string& v) {
          flags.overrides[k] = v;
        },
        Cat("override config key ", key));
  }
}

absl::StatusOr<HarnessConfig> ResolveConfig(const ServerFlags& flags) {
  HarnessConfig config;
  if (!flags.config_path.empty()) {
    absl::StatusOr<HarnessConfig> loaded = HarnessConfig::Load(flags.config_path);
    if (!loaded.ok()) return loaded.status();
    config = *loaded;
  }
  if (absl::Status s = config.Apply(flags.overrides); !s.ok()) return s;
  return config;
}

volatile std::sig_atomic_t g_stop = 0;

int RunServer(const ServerFlags& flags) {
  absl::StatusOr<HarnessConfig> config = ResolveConfig(flags);
  if (!config.ok()) return Report(config.status());
  std::cerr << "setting up group " << config->group << " and "
            << config->key_bits << "-bit key...\n";
  absl::StatusOr<ServerConfig> sc = MakeServerConfig(*config);
  if (!sc.ok()) return Report(sc.status());
  absl::StatusOr<std::unique_ptr<Server>> server = Server::Create(*std::move(sc));
  if (!server.ok()) return Report(server.status());
  absl::StatusOr<std::unique_ptr<TcpServer>> tcp =
      TcpServer::Start(**server, config->host, config->port);
  if (!tcp.ok()) return Report(tcp.status());
  std::cout << "listening on " << config->host << ":" << (*tcp)->port()
            << " fingerprint " << (*server)->group().fingerprint() << std::endl;
  std::signal(SIGINT, [](int) { g_stop = 1; });
  std::signal(SIGTERM, [](int) { g_stop = 1; });
  while (!g_stop) {
    std::this_thread::sleep_for(std::chrono::milliseconds(200));
    (*server)->AdvanceTo((*server)->Now());
  }
  (*tcp)->Stop();
  return kExitOk;
}

struct ClientFlags {
  std::string connect = "127.0.0.1:7411";
  std::string state = "hsense-client.state";
  std::string space;
  std::vector<std::string> spaces;
  std::optional<std::int64_t> slot;
  double slot_length = 60;
  int availability = -1;
};

absl::StatusOr<std::unique_ptr<RemoteEndpoint>> Dial(const std::string& addr) {
  const auto colon = addr.rfind(':');
  std::optional<int> port;
  if (colon != std::string::npos) port = ParseInt<int>(addr.substr(colon + 1));
  if (!port) return absl::InvalidArgumentError("--connect must be host:port");
  return RemoteEndpoint::Connect(addr.substr(0, colon), *port);
}

std::int64_t CurrentSlot(const ClientFlags& flags) {
  if (flags.slot) return *flags.slot;
  using namespace std::chrono;
  const double secs =
      duration<double>(system_clock::now().time_since_epoch()).count();
  return static_cast<std::int64_t>(secs / flags.slot_length);
}

// Loads the saved client and checks it belongs to the server at the other end.
absl::StatusOr<Client> Resume(const ClientFlags& flags, RemoteEndpoint& ep) {
  absl::StatusOr<Client> client =
      Client::Load(flags.state, SecureRng::FromSystem());
  if (!client.ok()) return client.status();
  absl::StatusOr<PublicBundle> bundle = ep.Setup();
  if (!bundle.ok()) return bundle.status();
  if (bundle->fingerprint != client->bundle().fingerprint ||
      !(bundle->key == client->bundle().key)) {
    return absl::FailedPreconditionError(
        "server parameters differ from the saved client state");
  }
  if (!client->registered()) {
    return absl::FailedPreconditionError("client is not registered");
  }
  return client;
}

int RunClient(const std::string& command, const ClientFlags& flags) {
  absl::StatusOr<std::unique_ptr<RemoteEndpoint>> ep = Dial(flags.connect);
  if (!ep.ok()) return Report(ep.status());
  RemoteEndpoint& endpoint = **ep;

  if (command == "register") {
    absl::StatusOr<PublicBundle> bundle = endpoint.Setup();
    if (!bundle.ok()) return Report(bundle.status());
    absl::StatusOr<Client> client =
        Client::Create(*bundle, SecureRng::FromSystem());
    if (!client.ok()) return Report(client.status());
    if (absl::Status s = client->Register(endpoint); !s.ok()) return Report(s);
    if (absl::Status s = client->Save(flags.state); !s.ok()) return Report(s);
    std::cout << "registered; balance " << client->balance() << "\n";
    return kExitOk;
  }

  absl::StatusOr<Client> client = Resume(flags, endpoint);
  if (!client.ok()) return Report(client.status());
  absl::Status status;
  if (command == "submit") {
    const std::int64_t slot = CurrentSlot(flags);
    status = client->Submit(endpoint, flags.space, slot, flags.availability);
    if (status.ok()) {
      std::cout << "submitted " << flags.space << " slot " << slot << "\n";
    }
  } else if (command == "claim") {
    if (!flags.slot) {
      return Report(absl::InvalidArgumentError("claim needs --slot"));
    }
    absl::StatusOr<std::uint64_t> credit =
        client->Claim(endpoint, flags.space, *flags.slot);
    status = credit.status();
    if (credit.ok()) {
      std::cout << "claimed " << *credit << "; balance " << client->balance()
                << "\n";
    }
  } else if (command == "inquire") {
    absl::StatusOr<std::vector<SpaceStatus>> result =
        client->Inquire(endpoint, flags.spaces);
    status = result.status();
    if (result.ok()) {
      for (const SpaceStatus& s : *result) {
        std::cout << s.space << " " << AvailabilityTag(s.status) << "\n";
      }
      std::cout << "balance " << client->balance() << "\n";
    }
  }
  // Save even on rejection: a burned identifier or new ticket must persist.
  if (absl::Status s = client->Save(flags.state); !s.ok() && status.ok()) {
    status = s;
  }
  return Report(status);
}

int RunBlur(const std::string& original_path, const std::string& blurred_path) {
  absl::StatusOr<GrayImage> original = ReadPnm(original_path);
  if (!original.ok()) return Report(original.status());
  absl::StatusOr<double> x = EdgeSharpness(*original);
  if (!x.ok()) return Report(x.status());
  std::printf("X %.6f\n", *x);
  if (blurred_path.empty()) return kExitOk;
  absl::StatusOr<GrayImage> blurred = ReadPnm(blurred_path);
  if (!blurred.ok()) return Report(blurred.status());
  absl::StatusOr<double> y = EdgeSharpness(*blurred);
  absl::StatusOr<double> b = Blurriness(*original, *blurred);
  if (!b.ok()) return Report(b.status());
  std::printf("Y %.6f\nblurriness %.6f\n", *y, *b);
  return kExitOk;
}

int RunBench(const std::string& command, const ServerFlags& flags, int reps,
             const std::vector<int>& users, bool csv_only) {
  absl::StatusOr<HarnessConfig> config = ResolveConfig(flags);
  if (!config.ok()) return Report(config.status());
  if (config->key_seed.empty()) config->key_seed = "bench-key";
  absl::StatusOr<ServerConfig> sc = MakeServerConfig(*config);
  if (!sc.ok()) return Report(sc.status());
  absl::StatusOr<std::unique_ptr<BenchHarness>> harness =
      BenchHarness::Create(*std::move(sc), "bench");
  if (!harness.ok()) return Report(harness.status());
  if (command == "stages") {
    absl::StatusOr<std::vector<StageMetrics>> m = RunStagesBench(**harness, reps);
    if (!m.ok()) return Report(m.status());
    if (!csv_only) std::cout << FormatStagesTable(*m) << "\n";
    std::cout << FormatStagesCsv(*m);
  } else {
    absl::StatusOr<ConfirmReport> r = RunConfirmBench(**harness, users, reps);
    if (!r.ok()) return Report(r.status());
    if (!csv_only) std::cout << FormatConfirmTable(*r) << "\n";
    std::cout << FormatConfirmCsv(*r);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Privacy-preserving parking availability crowdsensing"};
  app.require_subcommand(1);

  ServerFlags server_flags;
  CLI::App* server = app.add_subcommand("server", "run the server");
  server->require_subcommand(1);
  CLI::App* server_run = server->add_subcommand("run", "serve over TCP");
  AddServerFlags(server_run, server_flags);

  ClientFlags client_flags;
  CLI::App* client = app.add_subcommand("client", "user agent");
  client->require_subcommand(1);
  auto common = [&](CLI::App* cmd) {
    cmd->add_option("--connect", client_flags.connect, "server host:port")
        ->capture_default_str();
    cmd->add_option("--state", client_flags.state, "client state file")
        ->capture_default_str();
  };
  CLI::App* c_register = client->add_subcommand("register", "obtain a credential");
  common(c_register);
  CLI::App* c_submit = client->add_subcommand("submit", "submit an observation");
  common(c_submit);
  c_submit->add_option("--space", client_flags.space, "space id")->required();
  c_submit->add_option("--availability", client_flags.availability,
                       "1 available, 0 occupied")
      ->required()
      ->check(CLI::Range(0, 1));
  c_submit->add_option("--slot", client_flags.slot, "time slot (default: now)");
  c_submit->add_option("--slot-length", client_flags.slot_length,
                       "seconds per slot when --slot is omitted")
      ->capture_default_str();
  CLI::App* c_claim = client->add_subcommand("claim", "claim credit for a ticket");
  common(c_claim);
  c_claim->add_option("--space", client_flags.space, "space id")->required();
  c_claim->add_option("--slot", client_flags.slot, "slot of the submission")
      ->required();
  CLI::App* c_inquire =
      client->add_subcommand("inquire", "pay for availability of spaces");
  common(c_inquire);
  c_inquire->add_option("--space", client_flags.spaces, "space id (repeatable)")
      ->required();

  std::string original_path, blurred_path;
  CLI::App* blur = app.add_subcommand("blur", "edge-sharpness blurriness metric");
  blur->require_subcommand(1);
  CLI::App* blur_compute = blur->add_subcommand("compute", "X, Y and blurriness");
  blur_compute->add_option("original", original_path, "P2/P3 image")
      ->required()
      ->check(CLI::ExistingFile);
  blur_compute->add_option("blurred", blurred_path, "P2/P3 image")
      ->check(CLI::ExistingFile);

  ServerFlags bench_flags;
  int reps = 5;
  std::vector<int> users = {1, 5, 10, 15, 30, 50};
  bool csv_only = false;
  CLI::App* bench = app.add_subcommand("bench", "measurement harness");
  bench->require_subcommand(1);
  CLI::App* b_stages = bench->add_subcommand("stages", "per-stage time and bytes");
  CLI::App* b_confirm =
      bench->add_subcommand("confirm", "confirmation time versus user count");
  for (CLI::App* cmd : {b_stages, b_confirm}) {
    AddServerFlags(cmd, bench_flags);
    cmd->add_option("-r,--reps", reps, "repetitions")->capture_default_str();
    cmd->add_flag("--csv", csv_only, "machine-readable lines only");
  }
  b_confirm->add_option("-u,--users", users, "user counts")
      ->delimiter(',')
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  if (server_run->parsed()) return RunServer(server_flags);
  for (auto [cmd, name] : {std::pair{c_register, "register"},
                           std::pair{c_submit, "submit"},
                           std::pair{c_claim, "claim"},
                           std::pair{c_inquire, "inquire"}}) {
    if (cmd->parsed()) return RunClient(name, client_flags);
  }
  if (blur_compute->parsed()) return RunBlur(original_path, blurred_path);
  if (b_stages->parsed()) {
    return RunBench("stages", bench_flags, reps, users, csv_only);
  }
  if (b_confirm->parsed()) {
    return RunBench("confirm", bench_flags, reps, users, csv_only);
  }
  return kExitLocal;
}

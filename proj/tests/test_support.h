#ifndef HSENSE_TESTS_TEST_SUPPORT_H_
#define HSENSE_TESTS_TEST_SUPPORT_H_

#include <atomic>
#include <chrono>
#include <cstdint>
#include <memory>
#include <string>

#include "hsense/client.h"
#include "hsense/commitment.h"
#include "hsense/group.h"
#include "hsense/hash.h"
#include "hsense/sigma.h"
#include "hsense/random.h"
#include "hsense/server.h"
#include "hsense/signature.h"

namespace hsense::testing {

// q = 23, p = 11, g = 4, h = 9.
inline const Group& ToyGroup() {
  static const Group* group = [] {
    GroupParams params;
    params.q = 23;
    params.p = 11;
    params.g = 4;
    params.h = 9;
    params.bits = 5;
    return new Group(*Group::FromParams(params));
  }();
  return *group;
}

// 64-bit group; the q of every test that needs realistic sizes.
inline const Group& Group64() {
  static const Group* group = new Group(*Group::Generate(64, "tests-64"));
  return *group;
}

inline const ServerKeys& TestKeys() {
  static const ServerKeys* keys = [] {
    SecureRng rng = SecureRng::FromSeed("tests-keys");
    return new ServerKeys(*GenerateServerKeys(512, rng));
  }();
  return *keys;
}

inline const ServerKeys& OtherKeys() {
  static const ServerKeys* keys = [] {
    SecureRng rng = SecureRng::FromSeed("tests-other-keys");
    return new ServerKeys(*GenerateServerKeys(512, rng));
  }();
  return *keys;
}

// Server on Group64 with a hand-driven slot clock.
struct TestServer {
  std::shared_ptr<std::atomic<std::int64_t>> clock;
  std::unique_ptr<Server> server;

  void Set(std::int64_t slot) {
    clock->store(slot);
    server->AdvanceTo(slot);
  }
};

struct TestServerOptions {
  std::uint64_t b0 = 0;
  std::uint64_t c_q = 1;
  std::int64_t epsilon = 0;
  int nn_bits = 16;
  std::string journal;
  std::int64_t start = 100;
  std::chrono::milliseconds session_timeout{30000};
};

inline TestServer MakeTestServer(const TestServerOptions& options = {}) {
  TestServer ts;
  ts.clock = std::make_shared<std::atomic<std::int64_t>>(options.start);
  ServerConfig config(Group64(), TestKeys());
  config.b0 = options.b0;
  config.c_q = options.c_q;
  config.epsilon = options.epsilon;
  config.nn_bits = options.nn_bits;
  config.journal_path = options.journal;
  config.session_timeout = options.session_timeout;
  config.rng_seed = "tests-server";
  auto clock = ts.clock;
  config.clock = [clock] { return clock->load(); };
  ts.server = *Server::Create(std::move(config));
  return ts;
}

inline Client MakeRegisteredClient(Server& server, const std::string& seed) {
  Client client =
      *Client::Create(*server.Setup(), SecureRng::FromSeed(seed));
  absl::Status s = client.Register(server);
  if (!s.ok()) std::abort();
  return client;
}

// Inquiry opening for a client whose balance is below c_q: a valid key proof
// plus the best non-negativity proof it can make, which is over cm_b itself
// rather than over cm_b shifted by -c_q.
inline InquiryOpenRequest ForgeInquiry(const Client& client, SecureRng& rng) {
  const Group& g = client.group();
  const CredentialSecret& secret = client.secret();
  InquiryOpenRequest request;
  request.session = HexEncode(rng.Bytes(16));
  request.credential = client.credential();
  request.spaces = {"forged"};
  const std::string context = InquiryContext(g, request.session);
  request.proof = ProveCm(g, Opening{secret.s, secret.r_s},
                          request.credential.cm_s, MaskMode::kHidden, context,
                          rng);
  request.balance_proof =
      *ProveNN(g, Opening{secret.b, secret.r_b}, request.credential.cm_b,
               client.bundle().nn_bits, context, rng);
  return request;
}

}  // namespace hsense::testing

#endif  // HSENSE_TESTS_TEST_SUPPORT_H_

#ifndef HSENSE_NET_H_
#define HSENSE_NET_H_

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "absl/status/statusor.h"
#include "hsense/protocol.h"
#include "hsense/server.h"
#include "hsense/transport.h"
#include "hsense/wire.h"

namespace hsense {

struct StageCounters {
  std::uint64_t requests = 0;
  std::uint64_t request_bytes = 0;   // framed, as sent by the client
  std::uint64_t response_bytes = 0;  // framed, as sent by the server
  double seconds = 0;
};

// Concurrent-safe per-stage accumulator.
class StageMeter {
 public:
  void Add(Stage stage, std::uint64_t request_bytes,
           std::uint64_t response_bytes, double seconds);
  std::map<Stage, StageCounters> Snapshot() const;
  void Reset();

 private:
  mutable std::mutex mu_;
  std::map<Stage, StageCounters> counters_;
};

// Decodes one request payload, runs it against the server and returns the
// encoded response. Rejections become error bodies.
std::string HandleRequest(Server& server, std::string_view request);

// Loopback-capable TCP front end, one thread per connection. The meter, if
// given, records server-side handling time and framed sizes per stage.
class TcpServer {
 public:
  static absl::StatusOr<std::unique_ptr<TcpServer>> Start(
      Server& server, const std::string& host, int port,
      StageMeter* meter = nullptr, std::size_t frame_cap = kDefaultFrameCap);
  ~TcpServer();

  int port() const { return port_; }
  void Stop();

 private:
  TcpServer(Server& server, int listen_fd, int port, StageMeter* meter,
            std::size_t frame_cap);
  void AcceptLoop();
  void Serve(int fd);

  Server& server_;
  int listen_fd_;
  int port_;
  StageMeter* meter_;
  std::size_t frame_cap_;
  std::atomic<bool> stopping_{false};
  std::thread acceptor_;
  std::mutex mu_;
  std::vector<int> connections_;
  std::vector<std::thread> workers_;
};

// ServerEndpoint over one TCP connection. Calls are serialized. Setup() must
// run first (it supplies the group used to decode everything else), or the
// group can be given up front.
class RemoteEndpoint : public ServerEndpoint {
 public:
  static absl::StatusOr<std::unique_ptr<RemoteEndpoint>> Connect(
      const std::string& host, int port,
      std::size_t frame_cap = kDefaultFrameCap);
  ~RemoteEndpoint() override;

  void set_group(const Group& group) { group_ = group; }
  const StageMeter& meter() const { return meter_; }
  // Stage echoed by the most recent error body, if the last call got one.
  std::optional<Stage> last_error_stage() const { return last_error_stage_; }
  StageMeter& meter() { return meter_; }

  absl::StatusOr<PublicBundle> Setup() override;
  absl::StatusOr<RegistrationReply> Register(
      const RegistrationRequest& request) override;
  absl::Status Submit(const Submission& submission) override;
  absl::StatusOr<CreditOffer> ClaimOpen(const ClaimOpenRequest& request) override;
  absl::Status ClaimReveal(const RevealRequest& request) override;
  absl::StatusOr<Signature> ClaimRefresh(const RefreshRequest& request) override;
  absl::Status InquiryOpen(const InquiryOpenRequest& request) override;
  absl::Status InquiryReveal(const RevealRequest& request) override;
  absl::StatusOr<InquiryResult> InquiryRefresh(
      const RefreshRequest& request) override;

 private:
  RemoteEndpoint(int fd, std::size_t frame_cap) : fd_(fd), frame_cap_(frame_cap) {}
  absl::StatusOr<WireMessage> Call(const WireMessage& request);
  absl::StatusOr<const Group*> RequireGroup() const;

  int fd_;
  std::size_t frame_cap_;
  std::mutex mu_;
  std::optional<Group> group_;
  StageMeter meter_;
  std::optional<Stage> last_error_stage_;
};

}  // namespace hsense

#endif  // HSENSE_NET_H_

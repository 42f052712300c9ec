#include "hsense/net.h"

#include <cerrno>
#include <chrono>
#include <cstring>

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include "absl/status/status.h"
#include "hsense/status.h"
#include "hsense/strings.h"
#include "hsense/wire.h"

namespace hsense {
namespace {

using Clock = std::chrono::steady_clock;

double SecondsSince(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

absl::Status SysError(std::string_view what) {
  return Reject(Reason::kTransport, Cat(what, ": ", std::strerror(errno)));
}

void SetNoDelay(int fd) {
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
}

absl::StatusOr<sockaddr_in> Resolve(const std::string& host, int port) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* result = nullptr;
  if (int rc = ::getaddrinfo(host.c_str(), nullptr, &hints, &result); rc != 0) {
    return Reject(Reason::kTransport,
                  Cat("resolve ", host, ": ", ::gai_strerror(rc)));
  }
  sockaddr_in addr = *reinterpret_cast<sockaddr_in*>(result->ai_addr);
  ::freeaddrinfo(result);
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  return addr;
}

WireMessage Dispatch(Server& server, const WireMessage& req) {
  const Group& group = server.group();
  auto fail = [&](const absl::Status& s) {
    return ErrorMessage(req.stage, req.session, s);
  };
  switch (req.stage) {
    case Stage::kSetup: {
      if (absl::Status s = CheckSchema(req, Direction::kRequest); !s.ok()) {
        return fail(s);
      }
      return EncodeBundle(server.bundle());
    }
    case Stage::kRegister: {
      auto r = DecodeRegistrationRequest(group, req);
      if (!r.ok()) return fail(r.status());
      auto reply = server.Register(*r);
      if (!reply.ok()) return fail(reply.status());
      return EncodeRegistrationReply(group, *reply);
    }
    case Stage::kSubmit: {
      auto r = DecodeSubmission(group, req);
      if (!r.ok()) return fail(r.status());
      if (absl::Status s = server.Submit(*r); !s.ok()) return fail(s);
      return EncodeAck(req.stage, req.session);
    }
    case Stage::kClaimOpen: {
      auto r = DecodeClaimOpen(group, req);
      if (!r.ok()) return fail(r.status());
      auto offer = server.ClaimOpen(*r);
      if (!offer.ok()) return fail(offer.status());
      return EncodeCreditOffer(group, req.session, *offer);
    }
    case Stage::kClaimReveal:
    case Stage::kInquireReveal: {
      auto r = DecodeReveal(group, req);
      if (!r.ok()) return fail(r.status());
      absl::Status s = req.stage == Stage::kClaimReveal
                           ? server.ClaimReveal(*r)
                           : server.InquiryReveal(*r);
      if (!s.ok()) return fail(s);
      return EncodeAck(req.stage, req.session);
    }
    case Stage::kClaimRefresh: {
      auto r = DecodeRefresh(group, req);
      if (!r.ok()) return fail(r.status());
      auto sig = server.ClaimRefresh(*r);
      if (!sig.ok()) return fail(sig.status());
      return EncodeSignatureReply(req.stage, req.session, *sig);
    }
    case Stage::kInquireOpen: {
      auto r = DecodeInquiryOpen(group, req);
      if (!r.ok()) return fail(r.status());
      if (absl::Status s = server.InquiryOpen(*r); !s.ok()) return fail(s);
      return EncodeAck(req.stage, req.session);
    }
    case Stage::kInquireRefresh: {
      auto r = DecodeRefresh(group, req);
      if (!r.ok()) return fail(r.status());
      auto result = server.InquiryRefresh(*r);
      if (!result.ok()) return fail(result.status());
      return EncodeInquiryResult(req.session, *result);
    }
  }
  return fail(Reject(Reason::kMalformed, "unknown stage"));
}

}  // namespace

void StageMeter::Add(Stage stage, std::uint64_t request_bytes,
                     std::uint64_t response_bytes, double seconds) {
  std::lock_guard<std::mutex> lock(mu_);
  StageCounters& c = counters_[stage];
  ++c.requests;
  c.request_bytes += request_bytes;
  c.response_bytes += response_bytes;
  c.seconds += seconds;
}

std::map<Stage, StageCounters> StageMeter::Snapshot() const {
  std::lock_guard<std::mutex> lock(mu_);
  return counters_;
}

void StageMeter::Reset() {
  std::lock_guard<std::mutex> lock(mu_);
  counters_.clear();
}

std::string HandleRequest(Server& server, std::string_view request) {
  absl::StatusOr<WireMessage> msg = DecodeWire(request);
  if (!msg.ok()) {
    // No trustworthy stage to echo; answer on the setup stage.
    return EncodeWire(ErrorMessage(Stage::kSetup, "", msg.status()));
  }
  return EncodeWire(Dispatch(server, *msg));
}

TcpServer::TcpServer(Server& server, int listen_fd, int port,
                     StageMeter* meter, std::size_t frame_cap)
    : server_(server),
      listen_fd_(listen_fd),
      port_(port),
      meter_(meter),
      frame_cap_(frame_cap) {}

absl::StatusOr<std::unique_ptr<TcpServer>> TcpServer::Start(
    Server& server, const std::string& host, int port, StageMeter* meter,
    std::size_t frame_cap) {
  absl::StatusOr<sockaddr_in> addr = Resolve(host, port);
  if (!addr.ok()) return addr.status();
  int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) return SysError("socket");
  int one = 1;
  ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  if (::bind(fd, reinterpret_cast<sockaddr*>(&*addr), sizeof(*addr)) != 0 ||
      ::listen(fd, 128) != 0) {
    absl::Status s = SysError("bind/listen");
    ::close(fd);
    return s;
  }
  sockaddr_in bound{};
  socklen_t len = sizeof(bound);
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&bound), &len);
  std::unique_ptr<TcpServer> tcp(
      new TcpServer(server, fd, ntohs(bound.sin_port), meter, frame_cap));
  tcp->acceptor_ = std::thread([raw = tcp.get()] { raw->AcceptLoop(); });
  return tcp;
}

TcpServer::~TcpServer() { Stop(); }

void TcpServer::Stop() {
  if (stopping_.exchange(true)) return;
  ::shutdown(listen_fd_, SHUT_RDWR);
  ::close(listen_fd_);
  if (acceptor_.joinable()) acceptor_.join();
  std::vector<std::thread> workers;
  {
    std::lock_guard<std::mutex> lock(mu_);
    for (int fd : connections_) ::shutdown(fd, SHUT_RDWR);
    workers.swap(workers_);
  }
  for (std::thread& t : workers) t.join();
}

void TcpServer::AcceptLoop() {
  while (!stopping_) {
    int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) {
      if (errno == EINTR) continue;
      return;
    }
    SetNoDelay(fd);
    std::lock_guard<std::mutex> lock(mu_);
    if (stopping_) {
      ::close(fd);
      return;
    }
    connections_.push_back(fd);
    workers_.emplace_back([this, fd] { Serve(fd); });
  }
}

void TcpServer::Serve(int fd) {
  for (;;) {
    absl::StatusOr<std::string> request = ReadFrame(fd, frame_cap_);
    if (!request.ok()) break;  // closed, truncated or oversize: drop
    const Clock::time_point start = Clock::now();
    const std::string response = HandleRequest(server_, *request);
    const double seconds = SecondsSince(start);
    // Recorded before replying so a client that has its answer also sees
    // the server-side numbers.
    if (meter_) {
      absl::StatusOr<WireMessage> msg = DecodeWire(*request);
      if (msg.ok()) {
        meter_->Add(msg->stage, kFrameHeaderBytes + request->size(),
                    kFrameHeaderBytes + response.size(), seconds);
      }
    }
    if (!WriteFrame(fd, response, frame_cap_).ok()) break;
  }
  std::lock_guard<std::mutex> lock(mu_);
  std::erase(connections_, fd);
  ::close(fd);
}

absl::StatusOr<std::unique_ptr<RemoteEndpoint>> RemoteEndpoint::Connect(
    const std::string& host, int port, std::size_t frame_cap) {
  absl::StatusOr<sockaddr_in> addr = Resolve(host, port);
  if (!addr.ok()) return addr.status();
  int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) return SysError("socket");
  if (::connect(fd, reinterpret_cast<sockaddr*>(&*addr), sizeof(*addr)) != 0) {
    absl::Status s = SysError(Cat("connect ", host, ":", port));
    ::close(fd);
    return s;
  }
  SetNoDelay(fd);
  return std::unique_ptr<RemoteEndpoint>(new RemoteEndpoint(fd, frame_cap));
}

RemoteEndpoint::~RemoteEndpoint() { ::close(fd_); }

absl::StatusOr<WireMessage> RemoteEndpoint::Call(const WireMessage& request) {
  std::lock_guard<std::mutex> lock(mu_);
  const std::string payload = EncodeWire(request);
  last_error_stage_.reset();
  const Clock::time_point start = Clock::now();
  absl::StatusOr<std::size_t> sent = WriteFrame(fd_, payload, frame_cap_);
  if (!sent.ok()) return sent.status();
  absl::StatusOr<std::string> reply = ReadFrame(fd_, frame_cap_);
  if (!reply.ok()) {
    if (absl::IsOutOfRange(reply.status())) {
      return Reject(Reason::kTransport, "server closed the connection");
    }
    return reply.status();
  }
  meter_.Add(request.stage, *sent, kFrameHeaderBytes + reply->size(),
             SecondsSince(start));
  absl::StatusOr<WireMessage> msg = DecodeWire(*reply);
  if (!msg.ok()) return msg.status();
  if (IsErrorBody(*msg)) {
    last_error_stage_ = msg->stage;
    return ErrorFromMessage(*msg);
  }
  if (msg->stage != request.stage || msg->session != request.session) {
    return Reject(Reason::kMalformed, "response for a different stage");
  }
  return msg;
}

absl::StatusOr<const Group*> RemoteEndpoint::RequireGroup() const {
  if (!group_) return absl::FailedPreconditionError("setup has not run");
  return &*group_;
}

absl::StatusOr<PublicBundle> RemoteEndpoint::Setup() {
  absl::StatusOr<WireMessage> reply = Call(EncodeSetupRequest());
  if (!reply.ok()) return reply.status();
  absl::StatusOr<PublicBundle> bundle = DecodeBundle(*reply);
  if (!bundle.ok()) return bundle.status();
  absl::StatusOr<Group> group = ValidateBundle(*bundle);
  if (!group.ok()) return group.status();
  group_ = *std::move(group);
  return bundle;
}

absl::StatusOr<RegistrationReply> RemoteEndpoint::Register(
    const RegistrationRequest& request) {
  absl::StatusOr<const Group*> group = RequireGroup();
  if (!group.ok()) return group.status();
  absl::StatusOr<WireMessage> reply =
      Call(EncodeRegistrationRequest(**group, request));
  if (!reply.ok()) return reply.status();
  return DecodeRegistrationReply(**group, *reply);
}

absl::Status RemoteEndpoint::Submit(const Submission& submission) {
  absl::StatusOr<const Group*> group = RequireGroup();
  if (!group.ok()) return group.status();
  absl::StatusOr<WireMessage> reply = Call(EncodeSubmission(**group, submission));
  if (!reply.ok()) return reply.status();
  return CheckSchema(*reply, Direction::kResponse);
}

absl::StatusOr<CreditOffer> RemoteEndpoint::ClaimOpen(
    const ClaimOpenRequest& request) {
  absl::StatusOr<const Group*> group = RequireGroup();
  if (!group.ok()) return group.status();
  absl::StatusOr<WireMessage> reply = Call(EncodeClaimOpen(**group, request));
  if (!reply.ok()) return reply.status();
  return DecodeCreditOffer(**group, *reply);
}

absl::Status RemoteEndpoint::ClaimReveal(const RevealRequest& request) {
  absl::StatusOr<const Group*> group = RequireGroup();
  if (!group.ok()) return group.status();
  absl::StatusOr<WireMessage> reply =
      Call(EncodeReveal(**group, Stage::kClaimReveal, request));
  if (!reply.ok()) return reply.status();
  return CheckSchema(*reply, Direction::kResponse);
}

absl::StatusOr<Signature> RemoteEndpoint::ClaimRefresh(
    const RefreshRequest& request) {
  absl::StatusOr<const Group*> group = RequireGroup();
  if (!group.ok()) return group.status();
  absl::StatusOr<WireMessage> reply =
      Call(EncodeRefresh(**group, Stage::kClaimRefresh, request));
  if (!reply.ok()) return reply.status();
  return DecodeSignatureReply(*reply);
}

absl::Status RemoteEndpoint::InquiryOpen(const InquiryOpenRequest& request) {
  absl::StatusOr<const Group*> group = RequireGroup();
  if (!group.ok()) return group.status();
  absl::StatusOr<WireMessage> reply = Call(EncodeInquiryOpen(**group, request));
  if (!reply.ok()) return reply.status();
  return CheckSchema(*reply, Direction::kResponse);
}

absl::Status RemoteEndpoint::InquiryReveal(const RevealRequest& request) {
  absl::StatusOr<const Group*> group = RequireGroup();
  if (!group.ok()) return group.status();
  absl::StatusOr<WireMessage> reply =
      Call(EncodeReveal(**group, Stage::kInquireReveal, request));
  if (!reply.ok()) return reply.status();
  return CheckSchema(*reply, Direction::kResponse);
}

absl::StatusOr<InquiryResult> RemoteEndpoint::InquiryRefresh(
    const RefreshRequest& request) {
  absl::StatusOr<const Group*> group = RequireGroup();
  if (!group.ok()) return group.status();
  absl::StatusOr<WireMessage> reply =
      Call(EncodeRefresh(**group, Stage::kInquireRefresh, request));
  if (!reply.ok()) return reply.status();
  return DecodeInquiryResult(*reply);
}

}  // namespace hsense

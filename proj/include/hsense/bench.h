#ifndef HSENSE_BENCH_H_
#define HSENSE_BENCH_H_

#include <atomic>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "hsense/client.h"
#include "hsense/net.h"
#include "hsense/server.h"

namespace hsense {

// Mean cost of one protocol stage. Bytes are framed sizes: user bytes are
// what the client sent, server bytes what the server sent back.
struct StageMetrics {
  std::string stage;
  double user_time_s = 0;
  double server_time_s = 0;
  double user_bytes = 0;
  double server_bytes = 0;

  double total_bytes() const { return user_bytes + server_bytes; }
};

struct LinearFit {
  double slope = 0;
  double intercept = 0;
  double r2 = 0;
};

// Least squares y = slope * x + intercept with the coefficient of
// determination. Needs at least two distinct x values.
absl::StatusOr<LinearFit> FitLine(const std::vector<double>& xs,
                                  const std::vector<double>& ys);

struct ConfirmPoint {
  int users = 0;
  double same_space_s = 0;      // median over repetitions
  double distinct_spaces_s = 0;
};

struct ConfirmReport {
  std::vector<ConfirmPoint> points;
  LinearFit same_fit;
  LinearFit distinct_fit;
};

// An in-process server behind a loopback TCP listener, with a manually
// driven slot clock so windows can be closed on demand.
class BenchHarness {
 public:
  static absl::StatusOr<std::unique_ptr<BenchHarness>> Create(
      ServerConfig config, std::string rng_seed);
  ~BenchHarness();

  Server& server() { return *server_; }
  StageMeter& server_meter() { return server_meter_; }
  std::int64_t now() const { return clock_->load(); }
  void SetNow(std::int64_t slot);

  absl::StatusOr<std::unique_ptr<RemoteEndpoint>> Connect();
  // Registered client plus its own connection.
  struct User {
    std::unique_ptr<RemoteEndpoint> endpoint;
    std::unique_ptr<Client> client;
  };
  absl::StatusOr<User> NewUser();

 private:
  BenchHarness() = default;

  std::shared_ptr<std::atomic<std::int64_t>> clock_;
  std::unique_ptr<Server> server_;
  StageMeter server_meter_;
  std::unique_ptr<TcpServer> tcp_;
  PublicBundle bundle_;
  SecureRng rng_ = SecureRng::FromSeed("");
};

// Runs register, submit, aggregate, claim and inquire `reps` times and
// returns the per-stage means in that order.
absl::StatusOr<std::vector<StageMetrics>> RunStagesBench(BenchHarness& harness,
                                                         int reps);

// For each U, U users submit at once (all to one space, or each to its own)
// and the affected spaces are aggregated; reports the wall time for both.
absl::StatusOr<ConfirmReport> RunConfirmBench(BenchHarness& harness,
                                              const std::vector<int>& users,
                                              int reps);

std::string FormatStagesTable(const std::vector<StageMetrics>& metrics);
std::string FormatStagesCsv(const std::vector<StageMetrics>& metrics);
std::string FormatConfirmTable(const ConfirmReport& report);
std::string FormatConfirmCsv(const ConfirmReport& report);

}  // namespace hsense

#endif  // HSENSE_BENCH_H_

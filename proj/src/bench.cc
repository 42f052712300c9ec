#include "hsense/bench.h"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <initializer_list>
#include <sstream>
#include <thread>

#include "absl/status/status.h"
#include "hsense/strings.h"

namespace hsense {
namespace {

using Clock = std::chrono::steady_clock;

double SecondsSince(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

StageCounters Sum(const std::map<Stage, StageCounters>& counters,
                  std::initializer_list<Stage> stages) {
  StageCounters total;
  for (Stage s : stages) {
    auto it = counters.find(s);
    if (it == counters.end()) continue;
    total.requests += it->second.requests;
    total.request_bytes += it->second.request_bytes;
    total.response_bytes += it->second.response_bytes;
    total.seconds += it->second.seconds;
  }
  return total;
}

// Runs `fn` once and attributes its cost. User time is wall time minus the
// client-observed round trips; server time is the server's handling time.
absl::StatusOr<StageMetrics> Measure(BenchHarness& harness,
                                     RemoteEndpoint& endpoint,
                                     std::initializer_list<Stage> stages,
                                     const std::function<absl::Status()>& fn) {
  harness.server_meter().Reset();
  endpoint.meter().Reset();
  const Clock::time_point start = Clock::now();
  if (absl::Status s = fn(); !s.ok()) return s;
  const double wall = SecondsSince(start);
  const StageCounters client = Sum(endpoint.meter().Snapshot(), stages);
  const StageCounters server = Sum(harness.server_meter().Snapshot(), stages);
  StageMetrics m;
  m.user_time_s = std::max(0.0, wall - client.seconds);
  m.server_time_s = server.seconds;
  m.user_bytes = static_cast<double>(client.request_bytes);
  m.server_bytes = static_cast<double>(client.response_bytes);
  return m;
}

double Median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2;
}

}  // namespace

absl::StatusOr<LinearFit> FitLine(const std::vector<double>& xs,
                                  const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2) {
    return absl::InvalidArgumentError("need at least two points");
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx == 0) return absl::InvalidArgumentError("x values are all equal");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double e = ys[i] - (fit.slope * xs[i] + fit.intercept);
    ss_res += e * e;
  }
  fit.r2 = syy == 0 ? 1.0 : 1.0 - ss_res / syy;
  return fit;
}

absl::StatusOr<std::unique_ptr<BenchHarness>> BenchHarness::Create(
    ServerConfig config, std::string rng_seed) {
  std::unique_ptr<BenchHarness> h(new BenchHarness());
  h->clock_ = std::make_shared<std::atomic<std::int64_t>>(1000);
  config.clock = [clock = h->clock_] { return clock->load(); };
  if (config.rng_seed.empty()) config.rng_seed = rng_seed + "|server";
  absl::StatusOr<std::unique_ptr<Server>> server = Server::Create(std::move(config));
  if (!server.ok()) return server.status();
  h->server_ = *std::move(server);
  h->bundle_ = h->server_->bundle();
  h->rng_ = rng_seed.empty() ? SecureRng::FromSystem()
                             : SecureRng::FromSeed(rng_seed + "|clients");
  absl::StatusOr<std::unique_ptr<TcpServer>> tcp =
      TcpServer::Start(*h->server_, "127.0.0.1", 0, &h->server_meter_);
  if (!tcp.ok()) return tcp.status();
  h->tcp_ = *std::move(tcp);
  return h;
}

BenchHarness::~BenchHarness() {
  if (tcp_) tcp_->Stop();
}

void BenchHarness::SetNow(std::int64_t slot) {
  clock_->store(slot);
  server_->AdvanceTo(slot);
}

absl::StatusOr<std::unique_ptr<RemoteEndpoint>> BenchHarness::Connect() {
  absl::StatusOr<std::unique_ptr<RemoteEndpoint>> ep =
      RemoteEndpoint::Connect("127.0.0.1", tcp_->port());
  if (!ep.ok()) return ep.status();
  (*ep)->set_group(server_->group());
  return ep;
}

absl::StatusOr<BenchHarness::User> BenchHarness::NewUser() {
  absl::StatusOr<std::unique_ptr<RemoteEndpoint>> ep = Connect();
  if (!ep.ok()) return ep.status();
  absl::StatusOr<Client> client = Client::Create(bundle_, rng_.Fork());
  if (!client.ok()) return client.status();
  User user{*std::move(ep), std::make_unique<Client>(*std::move(client))};
  if (absl::Status s = user.client->Register(*user.endpoint); !s.ok()) return s;
  return user;
}

absl::StatusOr<std::vector<StageMetrics>> RunStagesBench(BenchHarness& harness,
                                                         int reps) {
  if (reps < 1) return absl::InvalidArgumentError("reps must be positive");
  const char* names[] = {"registration", "submission", "aggregation", "claim",
                         "inquiry"};
  std::vector<StageMetrics> total(5);
  for (int i = 0; i < 5; ++i) total[i].stage = names[i];
  const std::int64_t eps = harness.server().config().epsilon;

  absl::StatusOr<std::unique_ptr<RemoteEndpoint>> ep = harness.Connect();
  if (!ep.ok()) return ep.status();
  RemoteEndpoint& endpoint = **ep;
  absl::StatusOr<PublicBundle> bundle = endpoint.Setup();
  if (!bundle.ok()) return bundle.status();

  for (int rep = 0; rep < reps; ++rep) {
    absl::StatusOr<Client> created =
        Client::Create(*bundle, SecureRng::FromSeed(Cat("stages-", rep)));
    if (!created.ok()) return created.status();
    Client& client = *created;
    const std::string space = Cat("bench-", rep);
    const std::int64_t slot = harness.now();

    std::vector<absl::StatusOr<StageMetrics>> row;
    row.push_back(Measure(harness, endpoint, {Stage::kRegister},
                          [&] { return client.Register(endpoint); }));
    row.push_back(Measure(harness, endpoint, {Stage::kSubmit}, [&] {
      return client.Submit(endpoint, space, slot, 1);
    }));
    {
      const Clock::time_point start = Clock::now();
      harness.SetNow(slot + eps + 2);
      StageMetrics m;
      m.server_time_s = SecondsSince(start);
      row.push_back(m);
    }
    row.push_back(Measure(
        harness, endpoint,
        {Stage::kClaimOpen, Stage::kClaimReveal, Stage::kClaimRefresh}, [&] {
          return client.Claim(endpoint, space, slot).status();
        }));
    row.push_back(Measure(
        harness, endpoint,
        {Stage::kInquireOpen, Stage::kInquireReveal, Stage::kInquireRefresh},
        [&] { return client.Inquire(endpoint, {space}).status(); }));

    for (int i = 0; i < 5; ++i) {
      if (!row[i].ok()) return row[i].status();
      total[i].user_time_s += row[i]->user_time_s;
      total[i].server_time_s += row[i]->server_time_s;
      total[i].user_bytes += row[i]->user_bytes;
      total[i].server_bytes += row[i]->server_bytes;
    }
    harness.SetNow(harness.now() + 2 * eps + 3);
  }
  for (StageMetrics& m : total) {
    m.user_time_s /= reps;
    m.server_time_s /= reps;
    m.user_bytes /= reps;
    m.server_bytes /= reps;
  }
  return total;
}

absl::StatusOr<ConfirmReport> RunConfirmBench(BenchHarness& harness,
                                              const std::vector<int>& users,
                                              int reps) {
  if (users.empty() || reps < 1) {
    return absl::InvalidArgumentError("need user counts and repetitions");
  }
  const int max_users = *std::max_element(users.begin(), users.end());
  if (*std::min_element(users.begin(), users.end()) < 1) {
    return absl::InvalidArgumentError("user counts must be positive");
  }
  std::vector<BenchHarness::User> pool;
  for (int i = 0; i < max_users; ++i) {
    absl::StatusOr<BenchHarness::User> user = harness.NewUser();
    if (!user.ok()) return user.status();
    pool.push_back(*std::move(user));
  }
  const std::int64_t eps = harness.server().config().epsilon;

  int run = 0;
  auto confirm_once = [&](int u, bool distinct) -> absl::StatusOr<double> {
    harness.SetNow(harness.now() + 2 * eps + 3);
    const std::int64_t slot = harness.now();
    const std::string prefix = Cat("confirm-", run++, "-");
    std::vector<std::string> spaces;
    std::vector<Submission> subs;
    for (int i = 0; i < u; ++i) {
      const std::string space = Cat(prefix, distinct ? i : 0);
      if (distinct || i == 0) spaces.push_back(space);
      pool[i].client->PruneTickets(slot);
      absl::StatusOr<Submission> sub =
          pool[i].client->MakeSubmission(space, slot, 1);
      if (!sub.ok()) return sub.status();
      subs.push_back(*std::move(sub));
    }
    std::vector<absl::Status> results(u);
    const Clock::time_point start = Clock::now();
    {
      std::vector<std::jthread> threads;
      for (int i = 0; i < u; ++i) {
        threads.emplace_back([&, i] {
          results[i] = pool[i].endpoint->Submit(subs[i]);
        });
      }
    }
    for (const std::string& space : spaces) {
      harness.server().Aggregate(space, slot);
    }
    const double seconds = SecondsSince(start);
    for (const absl::Status& s : results) {
      if (!s.ok()) return s;
    }
    return seconds;
  };

  // Warm-up so first-touch costs do not land on the first point.
  if (absl::StatusOr<double> w = confirm_once(1, false); !w.ok()) {
    return w.status();
  }

  std::map<int, std::vector<double>> same, distinct;
  for (int rep = 0; rep < reps; ++rep) {
    for (int u : users) {
      // Alternate which variant goes first to cancel drift.
      for (int k = 0; k < 2; ++k) {
        const bool is_distinct = (k + rep) % 2 == 1;
        absl::StatusOr<double> t = confirm_once(u, is_distinct);
        if (!t.ok()) return t.status();
        (is_distinct ? distinct : same)[u].push_back(*t);
      }
    }
  }

  ConfirmReport report;
  std::vector<double> xs, ys_same, ys_distinct;
  for (int u : users) {
    ConfirmPoint p{u, Median(same[u]), Median(distinct[u])};
    report.points.push_back(p);
    xs.push_back(u);
    ys_same.push_back(p.same_space_s);
    ys_distinct.push_back(p.distinct_spaces_s);
  }
  if (xs.size() >= 2) {
    absl::StatusOr<LinearFit> fs = FitLine(xs, ys_same);
    absl::StatusOr<LinearFit> fd = FitLine(xs, ys_distinct);
    if (fs.ok()) report.same_fit = *fs;
    if (fd.ok()) report.distinct_fit = *fd;
  }
  return report;
}

std::string FormatStagesTable(const std::vector<StageMetrics>& metrics) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof(line), "%-13s %12s %12s %11s %11s %11s\n",
                "stage", "user_s", "server_s", "user_B", "server_B",
                "total_B");
  out << line;
  for (const StageMetrics& m : metrics) {
    std::snprintf(line, sizeof(line),
                  "%-13s %12.6f %12.6f %11.0f %11.0f %11.0f\n",
                  m.stage.c_str(), m.user_time_s, m.server_time_s,
                  m.user_bytes, m.server_bytes, m.total_bytes());
    out << line;
  }
  return out.str();
}

std::string FormatStagesCsv(const std::vector<StageMetrics>& metrics) {
  std::ostringstream out;
  out.precision(9);
  for (const StageMetrics& m : metrics) {
    out << "time," << m.stage << ",user," << m.user_time_s << ",s\n";
    out << "time," << m.stage << ",server," << m.server_time_s << ",s\n";
    out << "bytes," << m.stage << ",user," << m.user_bytes << ",B\n";
    out << "bytes," << m.stage << ",server," << m.server_bytes << ",B\n";
  }
  return out.str();
}

std::string FormatConfirmTable(const ConfirmReport& report) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof(line), "%6s %14s %16s\n", "users", "same_space_s",
                "distinct_space_s");
  out << line;
  for (const ConfirmPoint& p : report.points) {
    std::snprintf(line, sizeof(line), "%6d %14.6f %16.6f\n", p.users,
                  p.same_space_s, p.distinct_spaces_s);
    out << line;
  }
  for (const auto& [name, fit] :
       {std::pair{"same-space", report.same_fit},
        std::pair{"distinct-spaces", report.distinct_fit}}) {
    std::snprintf(line, sizeof(line),
                  "fit %-16s slope=%.6f s/user intercept=%.6f s r2=%.4f\n",
                  name, fit.slope, fit.intercept, fit.r2);
    out << line;
  }
  return out.str();
}

std::string FormatConfirmCsv(const ConfirmReport& report) {
  std::ostringstream out;
  out.precision(9);
  for (const ConfirmPoint& p : report.points) {
    out << "confirm_time,same-space,U" << p.users << ',' << p.same_space_s
        << ",s\n";
    out << "confirm_time,distinct-spaces,U" << p.users << ','
        << p.distinct_spaces_s << ",s\n";
  }
  for (const auto& [name, fit] :
       {std::pair{"same-space", report.same_fit},
        std::pair{"distinct-spaces", report.distinct_fit}}) {
    out << "fit_slope," << name << ",all," << fit.slope << ",s/user\n";
    out << "fit_intercept," << name << ",all," << fit.intercept << ",s\n";
    out << "fit_r2," << name << ",all," << fit.r2 << ",1\n";
  }
  return out.str();
}

}  // namespace hsense

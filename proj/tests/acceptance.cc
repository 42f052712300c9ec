// Acceptance checks. `acceptance N` runs criterion N, `acceptance` runs all.
// Prints one PASS/FAIL line per criterion; exits non-zero if any failed.

#include <gmpxx.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hsense/bench.h"
#include "hsense/blur.h"
#include "hsense/client.h"
#include "hsense/commitment.h"
#include "hsense/config.h"
#include "hsense/net.h"
#include "hsense/server.h"
#include "hsense/sigma.h"
#include "hsense/sigma_interactive.h"
#include "hsense/status.h"
#include "hsense/strings.h"
#include "test_support.h"

namespace hsense {
namespace {

using Clock = std::chrono::steady_clock;
namespace ia = interactive;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double Seconds(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

const Group& AcceptanceGroup() {
  static const Group* group = new Group(*Group::Generate(64, "acceptance"));
  return *group;
}

Scalar NonZero(const Group& g, SecureRng& rng) {
  for (;;) {
    Scalar s = g.RandomScalar(rng);
    if (!s.IsZero()) return s;
  }
}

std::vector<Scalar> DistinctSet(const Group& g, std::size_t n, SecureRng& rng) {
  std::vector<Scalar> set;
  while (set.size() < n) {
    Scalar s = g.RandomScalar(rng);
    if (std::find(set.begin(), set.end(), s) == set.end()) set.push_back(s);
  }
  return set;
}

// 1. Fiat-Shamir completeness.
Outcome ZkpCompleteness() {
  const Group& g = AcceptanceGroup();
  SecureRng rng = SecureRng::FromSeed("acceptance-completeness");
  constexpr int kInstances = 1000;
  std::map<std::string, int> ok;
  const auto start = Clock::now();
  for (int i = 0; i < kInstances; ++i) {
    Scalar x = g.RandomScalar(rng);
    auto [c, o] = CommitRandom(g, x, rng);
    const std::string ctx = Cat("instance-", i);
    ok["cm-hidden"] += VerifyCm(
        g, ProveCm(g, o, c, MaskMode::kHidden, ctx, rng), c, std::nullopt, ctx);
    ok["cm-known"] += VerifyCm(
        g, ProveCm(g, o, c, MaskMode::kKnown, ctx, rng), c, o.r, ctx);
    for (std::size_t n : {2u, 5u}) {
      std::vector<Scalar> set = DistinctSet(g, n, rng);
      auto [cm, om] = CommitRandom(g, set[rng.Below(std::uint64_t{n})], rng);
      absl::StatusOr<MbsProof> p = ProveMbs(g, om, cm, set, ctx, rng);
      ok[Cat("mbs-", static_cast<int>(n))] +=
          p.ok() && VerifyMbs(g, *p, cm, set, ctx);
    }
    for (int m : {8, 32}) {
      mpz_class v = rng.Below(mpz_class(1) << m);
      auto [cn, on] = CommitRandom(g, g.MakeScalar(v), rng);
      absl::StatusOr<NNProof> p = ProveNN(g, on, cn, m, ctx, rng);
      ok[Cat("nn-", m)] += p.ok() && VerifyNN(g, *p, cn, m, ctx);
    }
  }
  const double elapsed = Seconds(start);
  Outcome out{elapsed < 60.0, ""};
  for (const auto& [family, count] : ok) {
    out.pass = out.pass && count == kInstances;
    out.detail += Cat(family, " ", count, "/", kInstances, "; ");
  }
  char t[32];
  std::snprintf(t, sizeof(t), "%.1f s", elapsed);
  out.detail += t;
  return out;
}

// 2. Two-challenge rewinding recovers the witness.
Outcome SpecialSoundness() {
  const Group& g = AcceptanceGroup();
  SecureRng rng = SecureRng::FromSeed("acceptance-soundness");
  constexpr int kTrials = 500;
  std::map<std::string, int> ok;
  auto challenges = [&] {
    Scalar b1 = NonZero(g, rng), b2 = NonZero(g, rng);
    while (b2 == b1) b2 = NonZero(g, rng);
    return std::pair{b1, b2};
  };
  // x = (z'_x - z''_x) / (beta1 - beta2), computed without the library.
  auto formula = [&](const Scalar& z1, const Scalar& z2, const Scalar& b1,
                     const Scalar& b2) {
    const mpz_class& p = g.order();
    mpz_class num = z1.value() - z2.value(), den = b1.value() - b2.value();
    mpz_class inv;
    mpz_mod(den.get_mpz_t(), den.get_mpz_t(), p.get_mpz_t());
    mpz_invert(inv.get_mpz_t(), den.get_mpz_t(), p.get_mpz_t());
    mpz_class x = num * inv;
    mpz_mod(x.get_mpz_t(), x.get_mpz_t(), p.get_mpz_t());
    return x;
  };
  for (int i = 0; i < kTrials; ++i) {
    for (MaskMode mode : {MaskMode::kHidden, MaskMode::kKnown}) {
      Scalar x = g.RandomScalar(rng);
      auto [c, o] = CommitRandom(g, x, rng);
      ia::CmProver prover(g, o, mode, rng);
      auto [b1, b2] = challenges();
      CmProof t1 = prover.Respond(b1), t2 = prover.Respond(b2);
      std::optional<Scalar> mask;
      if (mode == MaskMode::kKnown) mask = o.r;
      absl::StatusOr<Opening> w = ia::ExtractCm(g, t1, b1, t2, b2);
      bool good = ia::CheckCm(g, t1, c, b1, mask) &&
                  ia::CheckCm(g, t2, c, b2, mask) && w.ok() && w->x == x &&
                  formula(t1.z_x, t2.z_x, b1, b2) == x.value();
      if (mode == MaskMode::kHidden) good = good && w->r == o.r;
      ok[mode == MaskMode::kHidden ? "cm-hidden" : "cm-known"] += good;
    }
    {
      std::vector<Scalar> set = DistinctSet(g, 5, rng);
      Scalar x = set[rng.Below(std::uint64_t{5})];
      auto [c, o] = CommitRandom(g, x, rng);
      absl::StatusOr<ia::MbsProver> prover = ia::MbsProver::Create(g, o, set, rng);
      auto [b1, b2] = challenges();
      MbsProof t1 = prover->Respond(b1), t2 = prover->Respond(b2);
      absl::StatusOr<Opening> w = ia::ExtractMbs(g, set, t1, b1, t2, b2);
      ok["mbs-5"] += ia::CheckMbs(g, t1, c, set, b1) &&
                     ia::CheckMbs(g, t2, c, set, b2) && w.ok() && w->x == x &&
                     w->r == o.r;
    }
    {
      Scalar x = g.MakeScalar(rng.Below(mpz_class(1) << 8));
      auto [c, o] = CommitRandom(g, x, rng);
      absl::StatusOr<ia::NNProver> prover = ia::NNProver::Create(g, o, 8, rng);
      auto [b1, b2] = challenges();
      NNProof t1 = prover->Respond(b1), t2 = prover->Respond(b2);
      absl::StatusOr<Opening> w = ia::ExtractNN(g, t1, b1, t2, b2);
      ok["nn-8"] += ia::CheckNN(g, t1, c, 8, b1) &&
                    ia::CheckNN(g, t2, c, 8, b2) && w.ok() && w->x == x &&
                    w->r == o.r;
    }
  }
  Outcome out{true, ""};
  for (const auto& [family, count] : ok) {
    out.pass = out.pass && count == kTrials;
    out.detail += Cat(family, " ", count, "/", kTrials, "; ");
  }
  return out;
}

// Total variation distance between two empirical distributions.
double TotalVariation(const std::map<std::string, int>& a,
                      const std::map<std::string, int>& b, int n) {
  std::map<std::string, double> diff;
  for (const auto& [k, v] : a) diff[k] += v;
  for (const auto& [k, v] : b) diff[k] -= v;
  double tv = 0;
  for (const auto& [k, v] : diff) tv += std::abs(v);
  return tv / (2.0 * n);
}

// Per-coordinate marginals of a list of transcripts, flattened to strings.
using Flat = std::vector<std::string>;

double MaxMarginalTv(const std::vector<Flat>& honest,
                     const std::vector<Flat>& simulated) {
  const std::size_t dims = honest.front().size();
  double worst = 0;
  for (std::size_t d = 0; d < dims; ++d) {
    std::map<std::string, int> h, s;
    for (const Flat& t : honest) ++h[t[d]];
    for (const Flat& t : simulated) ++s[t[d]];
    worst = std::max(worst,
                     TotalVariation(h, s, static_cast<int>(honest.size())));
  }
  return worst;
}

Flat FlattenMbs(const MbsProof& p) {
  Flat out;
  for (const MbsBranch& b : p.branches) {
    out.push_back(b.a.element.value().get_str());
    out.push_back(b.z_x.value().get_str());
    out.push_back(b.beta.value().get_str());
    out.push_back(b.z_r.value().get_str());
  }
  return out;
}

Flat FlattenNN(const NNProof& p) {
  Flat out;
  for (const Commitment& c : p.bit_commitments) {
    out.push_back(c.element.value().get_str());
  }
  for (const MbsProof& m : p.bit_proofs) {
    Flat f = FlattenMbs(m);
    out.insert(out.end(), f.begin(), f.end());
  }
  out.push_back(p.a0.element.value().get_str());
  out.push_back(p.z_r.value().get_str());
  return out;
}

// 3. Simulated transcripts are distributed like honest ones.
Outcome Hvzk() {
  const Group& g = testing::ToyGroup();
  // Cm: every witness, every challenge, all 121 nonce pairs vs all 121
  // simulator response pairs.
  int cm_mismatches = 0;
  for (long x = 0; x < 11; ++x) {
    for (long r = 0; r < 11; ++r) {
      Opening o{g.MakeScalar(x), g.MakeScalar(r)};
      Commitment c = Commit(g, o.x, o.r);
      for (long beta = 0; beta < 11; ++beta) {
        const Scalar b = g.MakeScalar(beta);
        std::vector<std::tuple<long, long, long>> honest, simulated;
        for (long xn = 0; xn < 11; ++xn) {
          for (long rn = 0; rn < 11; ++rn) {
            CmProof t = ia::CmProver(g, o, MaskMode::kHidden, g.MakeScalar(xn),
                                     g.MakeScalar(rn))
                            .Respond(b);
            honest.emplace_back(t.a.element.value().get_si(),
                                t.z_x.value().get_si(), t.z_r->value().get_si());
            CmProof s = ia::SimulateCm(g, c, b, g.MakeScalar(xn),
                                       g.MakeScalar(rn));
            simulated.emplace_back(s.a.element.value().get_si(),
                                   s.z_x.value().get_si(),
                                   s.z_r->value().get_si());
          }
        }
        std::sort(honest.begin(), honest.end());
        std::sort(simulated.begin(), simulated.end());
        cm_mismatches += honest != simulated;
      }
    }
  }

  constexpr int kSamples = 10000;
  SecureRng rng = SecureRng::FromSeed("acceptance-hvzk");
  const Scalar beta = g.MakeScalar(7);
  std::map<std::string, double> tv;
  for (std::size_t n : {2u, 5u}) {
    std::vector<Scalar> set;
    for (std::size_t i = 0; i < n; ++i) set.push_back(g.MakeScalar(2 * i + 1));
    auto [c, o] = CommitRandom(g, set[n / 2], rng);
    std::vector<Flat> honest, simulated;
    for (int i = 0; i < kSamples; ++i) {
      honest.push_back(
          FlattenMbs(ia::MbsProver::Create(g, o, set, rng)->Respond(beta)));
      simulated.push_back(FlattenMbs(ia::SimulateMbs(g, c, set, beta, rng)));
    }
    tv[Cat("mbs-", static_cast<int>(n))] = MaxMarginalTv(honest, simulated);
  }
  {
    constexpr int kBits = 3;  // 2^3 < 11
    auto [c, o] = CommitRandom(g, g.MakeScalar(5), rng);
    std::vector<Flat> honest, simulated;
    for (int i = 0; i < kSamples; ++i) {
      honest.push_back(
          FlattenNN(ia::NNProver::Create(g, o, kBits, rng)->Respond(beta)));
      simulated.push_back(FlattenNN(ia::SimulateNN(g, c, kBits, beta, rng)));
    }
    tv["nn-3"] = MaxMarginalTv(honest, simulated);
  }
  Outcome out{cm_mismatches == 0,
              Cat("cm exhaustive mismatches ", cm_mismatches, "/1331; ")};
  for (const auto& [family, d] : tv) {
    out.pass = out.pass && d <= 0.05;
    char line[64];
    std::snprintf(line, sizeof(line), "%s max marginal TV %.4f; ",
                  family.c_str(), d);
    out.detail += line;
  }
  return out;
}

// 4. Cm(x1, r1) * Cm(x2, r2) = Cm(x1 + x2, r1 + r2).
Outcome Homomorphism() {
  const Group& g = AcceptanceGroup();
  const GroupParams& gp = g.params();
  SecureRng rng = SecureRng::FromSeed("acceptance-homomorphism");
  auto raw_commit = [&](const mpz_class& x, const mpz_class& r) {
    mpz_class a, b;
    mpz_powm(a.get_mpz_t(), gp.g.get_mpz_t(), x.get_mpz_t(), gp.q.get_mpz_t());
    mpz_powm(b.get_mpz_t(), gp.h.get_mpz_t(), r.get_mpz_t(), gp.q.get_mpz_t());
    return mpz_class(a * b % gp.q);
  };
  constexpr int kQuads = 10000;
  int ok = 0;
  for (int i = 0; i < kQuads; ++i) {
    Scalar x1 = g.RandomScalar(rng), r1 = g.RandomScalar(rng);
    Scalar x2 = g.RandomScalar(rng), r2 = g.RandomScalar(rng);
    Commitment product = Combine(g, Commit(g, x1, r1), Commit(g, x2, r2));
    mpz_class expected = raw_commit((x1.value() + x2.value()) % gp.p,
                                    (r1.value() + r2.value()) % gp.p);
    ok += product.element.value() == expected &&
          product == Commit(g, g.Add(x1, x2), g.Add(r1, r2));
  }
  return {ok == kQuads, Cat(ok, "/", kQuads, " quadruples")};
}

ServerConfig AcceptanceServerConfig(std::uint64_t b0, std::uint64_t c_q) {
  ServerConfig config(AcceptanceGroup(), testing::TestKeys());
  config.b0 = b0;
  config.c_q = c_q;
  config.nn_bits = 16;
  config.rng_seed = "acceptance-server";
  return config;
}

// 5. Five adversarial behaviours over the wire, each with its stage and reason.
Outcome AttackSuite() {
  auto clock = std::make_shared<std::atomic<std::int64_t>>(1000);
  ServerConfig config = AcceptanceServerConfig(/*b0=*/1, /*c_q=*/2);
  config.clock = [clock] { return clock->load(); };
  std::unique_ptr<Server> server = *Server::Create(std::move(config));
  absl::StatusOr<std::unique_ptr<TcpServer>> tcp =
      TcpServer::Start(*server, "127.0.0.1", 0);
  if (!tcp.ok()) return {false, std::string(tcp.status().message())};
  std::unique_ptr<RemoteEndpoint> remote =
      *RemoteEndpoint::Connect("127.0.0.1", (*tcp)->port());
  const PublicBundle bundle = *remote->Setup();
  const Group& g = server->group();
  SecureRng rng = SecureRng::FromSeed("acceptance-attacks");

  std::map<std::string, int> caught;
  std::map<std::string, std::string> last_miss;
  auto expect = [&](const std::string& attack, const absl::Status& status,
                    Stage stage, Reason reason) {
    if (ReasonOf(status) == reason && remote->last_error_stage() == stage) {
      ++caught[attack];
    } else {
      last_miss[attack] = status.ToString();
    }
  };
  auto user = [&](const std::string& name) {
    Client c = *Client::Create(bundle, rng.Fork());
    if (!c.Register(*remote).ok()) std::abort();
    (void)name;
    return c;
  };
  auto set_now = [&](std::int64_t t) {
    clock->store(t);
    server->AdvanceTo(t);
  };

  constexpr int kTrials = 100;
  for (int trial = 0; trial < kTrials; ++trial) {
    const std::int64_t t = 1000 + 10 * trial;
    const std::string lot = Cat("lot-", trial), lot_b = Cat("lot-b-", trial);
    set_now(t);
    Client a = user("a"), b = user("b"), c = user("c"), d = user("d");

    // Duplicate submission.
    if (!a.Submit(*remote, lot, t, 1).ok()) std::abort();
    expect("duplicate-submission", a.Submit(*remote, lot, t, 1), Stage::kSubmit,
           Reason::kDuplicate);

    if (!b.Submit(*remote, lot, t, 1).ok() ||
        !b.Submit(*remote, lot_b, t, 1).ok()) {
      std::abort();
    }
    set_now(t + 2);

    // Double claim of one credit record.
    if (!a.Claim(*remote, lot, t).ok()) std::abort();
    if (!a.MakeSubmission(lot, t, 1).ok()) std::abort();  // re-derive ticket
    expect("double-claim", a.Claim(*remote, lot, t).status(),
           Stage::kClaimOpen, Reason::kNoCredit);
    a.Abort();

    // Reuse of a spent identifier: an old credential copy after refresh.
    Client stale = *Client::Deserialize(b.Serialize(), rng.Fork());
    if (!b.Claim(*remote, lot, t).ok()) std::abort();
    expect("identifier-reuse", stale.Claim(*remote, lot_b, t).status(),
           Stage::kClaimReveal, Reason::kIdentifierSpent);

    // Inquiry without enough balance (b0 = 1 < c_q = 2).
    expect("insufficient-balance",
           remote->InquiryOpen(testing::ForgeInquiry(c, rng)),
           Stage::kInquireOpen, Reason::kInsufficientBalance);

    // Tampered proofs, rotating over the three proof-carrying requests.
    switch (trial % 3) {
      case 0: {
        Submission sub = *d.MakeSubmission(lot, t + 2, 0);
        sub.proof.z_x = g.Add(sub.proof.z_x, g.MakeScalar(1));
        expect("proof-tampering", remote->Submit(sub), Stage::kSubmit,
               Reason::kBadProof);
        break;
      }
      case 1: {
        ClaimOpenRequest open = *b.ClaimOpen(lot_b, t);
        open.proof.credential.z_x =
            g.Add(open.proof.credential.z_x, g.MakeScalar(1));
        expect("proof-tampering", remote->ClaimOpen(open).status(),
               Stage::kClaimOpen, Reason::kBadProof);
        b.Abort();
        break;
      }
      default: {
        InquiryOpenRequest open = *a.InquiryOpen({lot});
        *open.proof.z_r = g.Add(*open.proof.z_r, g.MakeScalar(1));
        expect("proof-tampering", remote->InquiryOpen(open), Stage::kInquireOpen,
               Reason::kBadProof);
        a.Abort();
        break;
      }
    }
  }
  (*tcp)->Stop();
  Outcome out{caught.size() == 5, ""};
  for (const char* attack :
       {"duplicate-submission", "double-claim", "identifier-reuse",
        "insufficient-balance", "proof-tampering"}) {
    out.pass = out.pass && caught[attack] == kTrials;
    out.detail += Cat(attack, " ", caught[attack], "/", kTrials, "; ");
    if (last_miss.count(attack)) {
      out.detail += Cat("(last miss: ", last_miss[attack], ") ");
    }
  }
  return out;
}

// 6. Credits follow the strict majority.
Outcome Incentive() {
  auto run = [](const std::vector<int>& votes, std::uint64_t& credited,
                Availability& status, std::uint64_t& issued) {
    auto clock = std::make_shared<std::atomic<std::int64_t>>(500);
    ServerConfig config = AcceptanceServerConfig(0, 1);
    config.clock = [clock] { return clock->load(); };
    std::unique_ptr<Server> server = *Server::Create(std::move(config));
    std::vector<Client> users;
    for (std::size_t i = 0; i < votes.size(); ++i) {
      users.push_back(
          testing::MakeRegisteredClient(*server, Cat("incentive-", i)));
      if (!users.back().Submit(*server, "spot", 500, votes[i]).ok()) {
        std::abort();
      }
    }
    clock->store(502);
    server->AdvanceTo(502);
    status = server->StatusAt("spot", 500);
    issued = server->credits_issued();
    credited = 0;
    for (Client& u : users) {
      absl::StatusOr<std::uint64_t> got = u.Claim(*server, "spot", 500);
      if (got.ok()) credited += *got;
    }
  };
  std::uint64_t c110 = 0, c10 = 0, i110 = 0, i10 = 0;
  Availability s110{}, s10{};
  run({1, 1, 0}, c110, s110, i110);
  run({1, 0}, c10, s10, i10);
  bool pass = c110 == 2 && i110 == 2 && s110 == Availability::kAvailable &&
              c10 == 0 && i10 == 0 && s10 == Availability::kUnconfirmed;
  return {pass, Cat("{1,1,0}: ", c110, " credits claimed, status ",
                    AvailabilityTag(s110), "; {1,0}: ", c10,
                    " credits claimed, status ", AvailabilityTag(s10))};
}

// 7. A random client trace conserves the balance.
Outcome Conservation() {
  constexpr std::uint64_t kB0 = 3, kCost = 2;
  auto clock = std::make_shared<std::atomic<std::int64_t>>(200);
  ServerConfig config = AcceptanceServerConfig(kB0, kCost);
  config.epsilon = 1;
  config.clock = [clock] { return clock->load(); };
  std::unique_ptr<Server> server = *Server::Create(std::move(config));
  Client me = testing::MakeRegisteredClient(*server, "trace-me");
  std::vector<Client> crowd;
  for (int i = 0; i < 3; ++i) {
    crowd.push_back(testing::MakeRegisteredClient(*server, Cat("trace-", i)));
  }
  SecureRng rng = SecureRng::FromSeed("acceptance-trace");
  const std::vector<std::string> spaces = {"s0", "s1", "s2"};
  std::uint64_t credits = 0, inquiries = 0, claims_tried = 0;
  constexpr int kActions = 200;
  for (int step = 0; step < kActions; ++step) {
    const std::int64_t now = clock->load();
    const std::string& space = spaces[rng.Below(std::uint64_t{3})];
    switch (rng.Below(std::uint64_t{5})) {
      case 0:
        (void)me.Submit(*server, space, now, static_cast<int>(rng.Below(std::uint64_t{2})));
        break;
      case 1:
        (void)crowd[rng.Below(std::uint64_t{3})].Submit(
            *server, space, now, static_cast<int>(rng.Below(std::uint64_t{2})));
        break;
      case 2:
        clock->store(now + 1);
        server->AdvanceTo(now + 1);
        break;
      case 3: {
        std::vector<std::pair<std::string, std::int64_t>> ready;
        for (const auto& [key, vote] : me.pending_tickets()) {
          if (key.second <= now - 3) ready.push_back(key);
        }
        if (ready.empty()) break;
        auto key = ready[rng.Below(static_cast<std::uint64_t>(ready.size()))];
        ++claims_tried;
        absl::StatusOr<std::uint64_t> got = me.Claim(*server, key.first, key.second);
        if (got.ok()) {
          credits += *got;
        } else {
          me.Abort();
        }
        break;
      }
      default:
        if (me.Inquire(*server, {space}).ok()) {
          ++inquiries;
        } else {
          me.Abort();
        }
        break;
    }
  }
  const Group& g = server->group();
  const CredentialSecret& secret = me.secret();
  const CredentialPublic& cred = me.credential();
  const mpz_class expected = mpz_class(static_cast<unsigned long>(kB0)) +
                             static_cast<unsigned long>(credits) -
                             mpz_class(static_cast<unsigned long>(kCost)) *
                                 static_cast<unsigned long>(inquiries);
  const bool opens = VerifyOpening(g, cred.cm_b, Opening{secret.b, secret.r_b});
  const bool signed_ok = VerifyCredential(g, server->bundle().key, cred.cm_s,
                                          cred.cm_q, cred.cm_b, cred.sig);
  const bool pass = opens && signed_ok && expected >= 0 &&
                    secret.b.value() == expected &&
                    me.balance() == expected.get_ui();
  return {pass, Cat("opened b = ", secret.b.value().get_str(), ", b0 + credits - c_q*inquiries = ",
                    kB0, " + ", credits, " - ", kCost, "*", inquiries, " = ",
                    expected.get_str(), " (", claims_tried, " claims tried)")};
}

std::unique_ptr<BenchHarness> DefaultHarness() {
  HarnessConfig config;
  config.key_seed = "acceptance-key";
  absl::StatusOr<ServerConfig> sc = MakeServerConfig(config);
  if (!sc.ok()) return nullptr;
  absl::StatusOr<std::unique_ptr<BenchHarness>> h =
      BenchHarness::Create(*std::move(sc), "acceptance-bench");
  return h.ok() ? *std::move(h) : nullptr;
}

// 8. Confirmation time grows linearly with the number of users.
Outcome ConfirmScaling() {
  std::unique_ptr<BenchHarness> harness = DefaultHarness();
  if (!harness) return {false, "harness setup failed"};
  absl::StatusOr<ConfirmReport> report =
      RunConfirmBench(*harness, {1, 5, 10, 15, 30, 50}, 5);
  if (!report.ok()) return {false, std::string(report.status().message())};
  bool ordered = true;
  std::string detail;
  char line[128];
  for (const ConfirmPoint& p : report->points) {
    ordered = ordered && p.distinct_spaces_s >= p.same_space_s;
    std::snprintf(line, sizeof(line), "U=%d same %.4f distinct %.4f; ",
                  p.users, p.same_space_s, p.distinct_spaces_s);
    detail += line;
  }
  const LinearFit& s = report->same_fit;
  const LinearFit& d = report->distinct_fit;
  std::snprintf(line, sizeof(line),
                "fit same slope %.5f R2 %.4f, distinct slope %.5f R2 %.4f",
                s.slope, s.r2, d.slope, d.r2);
  detail += line;
  const bool linear =
      s.slope > 0 && s.r2 >= 0.9 && d.slope > 0 && d.r2 >= 0.9;
  return {linear && ordered, detail};
}

// 9. submission < registration < inquiry <= claim, in framed bytes.
Outcome OverheadOrdering() {
  std::unique_ptr<BenchHarness> harness = DefaultHarness();
  if (!harness) return {false, "harness setup failed"};
  absl::StatusOr<std::vector<StageMetrics>> rows = RunStagesBench(*harness, 3);
  if (!rows.ok()) return {false, std::string(rows.status().message())};
  std::map<std::string, double> bytes;
  for (const StageMetrics& m : *rows) bytes[m.stage] = m.total_bytes();
  const double sub = bytes["submission"], reg = bytes["registration"],
               inq = bytes["inquiry"], clm = bytes["claim"];
  char line[200];
  std::snprintf(line, sizeof(line),
                "submission %.0f B, registration %.0f B, inquiry %.0f B, "
                "claim %.0f B",
                sub, reg, inq, clm);
  return {sub < reg && reg < inq && inq <= clm, line};
}

// 10. Blurriness examples.
Outcome BlurExamples() {
  auto img = [](const std::vector<std::vector<int>>& rows) {
    return *MakeGrayImage(rows);
  };
  const GrayImage original = img({{10, 0}, {0, 0}});
  const double same = *Blurriness(original, original);
  const double flat = *Blurriness(original, img({{3, 3}, {3, 3}}));
  const double partial = *Blurriness(original, img({{6, 2}, {2, 2}}));
  const double x = *EdgeSharpness(original);
  const double y = *EdgeSharpness(img({{6, 2}, {2, 2}}));
  char line[160];
  std::snprintf(line, sizeof(line),
                "identical %.6g, flattened %.6g, partial %.6g (X %.6g, Y %.6g)",
                same, flat, partial, x, y);
  const bool pass = same == 0.0 && flat == 1.0 &&
                    std::abs(partial - 0.6) < 1e-12 && x == 2.5 && y == 1.0;
  return {pass, line};
}

// 11. Field and group laws plus encodings.
Outcome GroupAxioms() {
  long failures = 0;
  auto check = [&](bool ok) { failures += !ok; };

  const Group& toy = testing::ToyGroup();
  std::vector<GroupElement> elements;
  for (long v = 0; v < 256; ++v) {
    const bool member = v < 23 && [&] {
      for (long u = 1; u < 23; ++u) {
        if (u * u % 23 == v) return true;
      }
      return false;
    }();
    check(toy.IsMember(v) == member);
    absl::StatusOr<GroupElement> e = toy.DecodeElement(std::string(1, static_cast<char>(v)));
    check(e.ok() == member);
    if (member) {
      elements.push_back(*e);
      check(toy.Encode(*e) == std::string(1, static_cast<char>(v)));
      check(*toy.DecodeElementHex(toy.EncodeHex(*e)) == *e);
    }
    absl::StatusOr<Scalar> s = toy.DecodeScalar(std::string(1, static_cast<char>(v)));
    check(s.ok() == (v < 11));
    if (v < 11) check(toy.Encode(*s) == std::string(1, static_cast<char>(v)));
  }
  check(elements.size() == 11);
  auto scalar_laws = [&](const Group& g, const Scalar& a, const Scalar& b,
                         const Scalar& c) {
    const Scalar zero = g.MakeScalar(0), one = g.MakeScalar(1);
    check(g.Add(a, b) == g.Add(b, a));
    check(g.Mul(a, b) == g.Mul(b, a));
    check(g.Add(g.Add(a, b), c) == g.Add(a, g.Add(b, c)));
    check(g.Mul(g.Mul(a, b), c) == g.Mul(a, g.Mul(b, c)));
    check(g.Mul(a, g.Add(b, c)) == g.Add(g.Mul(a, b), g.Mul(a, c)));
    check(g.Add(a, zero) == a && g.Mul(a, one) == a);
    check(g.Add(a, g.Neg(a)) == zero);
    check(g.Sub(a, b) == g.Add(a, g.Neg(b)));
    absl::StatusOr<Scalar> inv = g.Inv(a);
    check(inv.ok() == !a.IsZero());
    if (inv.ok()) check(g.Mul(a, *inv) == one);
  };
  auto group_laws = [&](const Group& g, const GroupElement& x,
                        const GroupElement& y, const GroupElement& z,
                        const Scalar& a, const Scalar& b) {
    check(g.IsMember(g.Mul(x, y).value()));
    check(g.Mul(x, y) == g.Mul(y, x));
    check(g.Mul(g.Mul(x, y), z) == g.Mul(x, g.Mul(y, z)));
    check(g.Mul(x, g.Identity()) == x);
    check(g.Mul(x, g.Inv(x)) == g.Identity());
    check(g.Pow(x, g.MakeScalar(g.order())) == g.Identity());
    check(g.Pow(x, g.Add(a, b)) == g.Mul(g.Pow(x, a), g.Pow(x, b)));
    check(g.Pow(g.Pow(x, a), b) == g.Pow(x, g.Mul(a, b)));
  };
  for (long a = 0; a < 11; ++a) {
    for (long b = 0; b < 11; ++b) {
      for (long c = 0; c < 11; ++c) {
        scalar_laws(toy, toy.MakeScalar(a), toy.MakeScalar(b), toy.MakeScalar(c));
        group_laws(toy, elements[a], elements[b], elements[c],
                   toy.MakeScalar(b), toy.MakeScalar(c));
      }
    }
  }
  const long toy_failures = failures;

  const Group& g = AcceptanceGroup();
  const GroupParams& gp = g.params();
  SecureRng rng = SecureRng::FromSeed("acceptance-axioms");
  constexpr int kRandom = 10000;
  for (int i = 0; i < kRandom; ++i) {
    Scalar a = g.RandomScalar(rng), b = g.RandomScalar(rng), c = g.RandomScalar(rng);
    GroupElement x = g.Pow(g.g(), g.RandomScalar(rng));
    GroupElement y = g.Pow(g.h(), g.RandomScalar(rng));
    GroupElement z = g.HashToGroup(Cat("axiom-", i));
    scalar_laws(g, a, b, c);
    group_laws(g, x, y, z, a, b);
    check(*g.DecodeScalar(g.Encode(a)) == a);
    check(*g.DecodeElement(g.Encode(x)) == x);
    check(*g.DecodeScalarHex(g.EncodeHex(b)) == b);
    check(*g.DecodeElementHex(g.EncodeHex(z)) == z);
    // Membership against Euler's criterion, computed directly.
    mpz_class v = rng.Below(gp.q), euler;
    mpz_powm(euler.get_mpz_t(), v.get_mpz_t(), gp.p.get_mpz_t(), gp.q.get_mpz_t());
    const bool member = v != 0 && euler == 1;
    check(g.IsMember(v) == member);
    check(g.DecodeElement(ToFixedBytes(v, g.element_bytes())).ok() == member);
  }
  check(!g.DecodeElement(ToFixedBytes(gp.q, g.element_bytes())).ok());
  check(!g.DecodeScalar(ToFixedBytes(gp.p, g.scalar_bytes())).ok());
  return {failures == 0, Cat("q=23 exhaustive failures ", toy_failures,
                             ", 64-bit randomized failures ",
                             failures - toy_failures, " over ", kRandom,
                             " rounds")};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

const std::vector<Criterion>& Criteria() {
  static const std::vector<Criterion> list = {
      {1, "zkp completeness", ZkpCompleteness},
      {2, "special soundness", SpecialSoundness},
      {3, "honest-verifier zero knowledge", Hvzk},
      {4, "commitment homomorphism", Homomorphism},
      {5, "cheating prevention", AttackSuite},
      {6, "incentive correctness", Incentive},
      {7, "balance conservation", Conservation},
      {8, "confirmation-time scaling", ConfirmScaling},
      {9, "overhead ordering", OverheadOrdering},
      {10, "blurriness examples", BlurExamples},
      {11, "group axioms and encodings", GroupAxioms},
  };
  return list;
}

}  // namespace
}  // namespace hsense

int main(int argc, char** argv) {
  std::optional<int> only;
  if (argc > 1) {
    only = hsense::ParseInt<int>(argv[1]);
    if (!only || *only < 1 || *only > 11) {
      std::fprintf(stderr, "usage: %s [1-11]\n", argv[0]);
      return 2;
    }
  }
  bool all_pass = true;
  for (const auto& c : hsense::Criteria()) {
    if (only && *only != c.id) continue;
    const auto start = std::chrono::steady_clock::now();
    hsense::Outcome out = c.run();
    const double secs = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - start)
                            .count();
    std::printf("criterion %2d %-32s %s  [%.1fs] %s\n", c.id, c.name,
                out.pass ? "PASS" : "FAIL", secs, out.detail.c_str());
    std::fflush(stdout);
    all_pass = all_pass && out.pass;
  }
  return all_pass ? 0 : 1;
}

#include "hsense/server.h"

#include <gtest/gtest.h>

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <thread>
#include <vector>

#include "hsense/status.h"
#include "test_support.h"

namespace hsense {
namespace {

using testing::ForgeInquiry;
using testing::MakeRegisteredClient;
using testing::MakeTestServer;
using testing::TestServer;

std::vector<Client> Clients(Server& server, int n, const std::string& tag) {
  std::vector<Client> out;
  for (int i = 0; i < n; ++i) {
    out.push_back(MakeRegisteredClient(server, tag + std::to_string(i)));
  }
  return out;
}

TEST(ServerSetupTest, SameSeedSameBundle) {
  TestServer a = MakeTestServer();
  TestServer b = MakeTestServer();
  PublicBundle ba = *a.server->Setup();
  PublicBundle bb = *b.server->Setup();
  EXPECT_EQ(ba.fingerprint, bb.fingerprint);
  EXPECT_EQ(ba.key, bb.key);
  EXPECT_EQ(ba.params.h, bb.params.h);
  EXPECT_TRUE(ValidateBundle(ba).ok());
}

TEST(ServerSetupTest, RejectsBadConfig) {
  ServerConfig config(testing::Group64(), testing::TestKeys());
  config.nn_bits = 64;
  EXPECT_FALSE(Server::Create(config).ok());
  config.nn_bits = 8;
  config.b0 = 256;
  EXPECT_FALSE(Server::Create(config).ok());
  config.b0 = 0;
  config.epsilon = -1;
  EXPECT_FALSE(Server::Create(config).ok());
}

TEST(RegistrationTest, CredentialVerifies) {
  TestServer ts = MakeTestServer({.b0 = 4});
  Client client = MakeRegisteredClient(*ts.server, "reg");
  const CredentialPublic& cred = client.credential();
  EXPECT_TRUE(VerifyCredential(ts.server->group(), testing::TestKeys().pub,
                               cred.cm_s, cred.cm_q, cred.cm_b, cred.sig));
  EXPECT_EQ(client.balance(), 4u);
  EXPECT_TRUE(SecretOpensPublic(ts.server->group(), client.secret(), cred));
  EXPECT_EQ(client.secret().r_b.value(), 0);
}

TEST(RegistrationTest, ReplayedRequestYieldsUnknownKey) {
  TestServer ts = MakeTestServer();
  const Group& g = ts.server->group();
  Client victim = *Client::Create(*ts.server->Setup(), SecureRng::FromSeed("v"));
  RegistrationRequest request = victim.BeginRegistration();
  // The replayer forwards the victim's commitments and gets its own s''.
  RegistrationReply reply = *ts.server->Register(request);
  Commitment cm_s = Shift(g, request.cm_s_prime, reply.s_double_prime);
  // Without the opening of Cm(s') it can only guess s, and no guessed ticket
  // links to the credential.
  SecureRng rng = SecureRng::FromSeed("replayer");
  for (int i = 0; i < 20; ++i) {
    Scalar guess = g.RandomScalar(rng);
    Scalar mask = TicketMask(g, "lot", 100);
    Commitment ticket = Commit(g, guess, mask);
    LinkProof link =
        ProveLink(g, Opening{guess, g.RandomScalar(rng)}, cm_s, ticket, mask,
                  ClaimContext(g, "sess", "lot", 100), rng);
    EXPECT_FALSE(VerifyLink(g, link, cm_s, ticket, mask,
                            ClaimContext(g, "sess", "lot", 100)));
  }
}

TEST(SubmissionTest, AcceptDuplicateStale) {
  TestServer ts = MakeTestServer();
  Client client = MakeRegisteredClient(*ts.server, "sub");
  ASSERT_TRUE(client.Submit(*ts.server, "lot", 100, 1).ok());
  EXPECT_EQ(ts.server->data_entry_count(), 1u);
  EXPECT_EQ(ReasonOf(client.Submit(*ts.server, "lot", 100, 1)),
            Reason::kDuplicate);
  // Voting the other way does not get around it: the ticket is the same.
  EXPECT_EQ(ReasonOf(client.Submit(*ts.server, "lot", 100, 0)),
            Reason::kDuplicate);
  EXPECT_TRUE(client.Submit(*ts.server, "lot", 99, 1).ok());
  EXPECT_EQ(ReasonOf(client.Submit(*ts.server, "lot", 95, 1)),
            Reason::kStaleTime);
  EXPECT_EQ(ReasonOf(client.Submit(*ts.server, "lot", 101, 1)),
            Reason::kStaleTime);
  EXPECT_EQ(ts.server->data_entry_count(), 2u);
}

TEST(SubmissionTest, TamperedProofAndMalformed) {
  TestServer ts = MakeTestServer();
  const Group& g = ts.server->group();
  Client client = MakeRegisteredClient(*ts.server, "tamper");
  Submission sub = *client.MakeSubmission("lot", 100, 1);
  Submission bad = sub;
  bad.proof.z_x = g.Add(bad.proof.z_x, g.MakeScalar(1));
  EXPECT_EQ(ReasonOf(ts.server->Submit(bad)), Reason::kBadProof);
  Submission flipped = sub;
  flipped.entry.availability = 0;  // proof is bound to the vote
  EXPECT_EQ(ReasonOf(ts.server->Submit(flipped)), Reason::kBadProof);
  Submission bad_space = sub;
  bad_space.entry.space = "a|b";
  EXPECT_EQ(ReasonOf(ts.server->Submit(bad_space)), Reason::kMalformed);
  EXPECT_TRUE(ts.server->Submit(sub).ok());
}

TEST(AggregateTest, MajorityCredits) {
  TestServer ts = MakeTestServer();
  std::vector<Client> users = Clients(*ts.server, 3, "agg");
  ASSERT_TRUE(users[0].Submit(*ts.server, "lot", 100, 1).ok());
  ASSERT_TRUE(users[1].Submit(*ts.server, "lot", 100, 1).ok());
  ASSERT_TRUE(users[2].Submit(*ts.server, "lot", 100, 0).ok());
  EXPECT_EQ(ts.server->Aggregate("lot", 100), Availability::kAvailable);
  EXPECT_EQ(ts.server->pending_credit_count(), 2u);
  EXPECT_EQ(ts.server->credits_issued(), 2u);
  // Re-aggregating and finalizing never issue a second credit.
  EXPECT_EQ(ts.server->Aggregate("lot", 100), Availability::kAvailable);
  ts.Set(110);
  EXPECT_EQ(ts.server->credits_issued(), 2u);
  EXPECT_EQ(*users[0].Claim(*ts.server, "lot", 100), 1u);
  EXPECT_EQ(*users[1].Claim(*ts.server, "lot", 100), 1u);
  EXPECT_EQ(ReasonOf(users[2].Claim(*ts.server, "lot", 100).status()),
            Reason::kNoCredit);
  EXPECT_EQ(ts.server->credits_claimed(), 2u);
}

TEST(AggregateTest, TieAndEmptyAreUnconfirmed) {
  TestServer ts = MakeTestServer();
  std::vector<Client> users = Clients(*ts.server, 2, "tie");
  ASSERT_TRUE(users[0].Submit(*ts.server, "lot", 100, 1).ok());
  ASSERT_TRUE(users[1].Submit(*ts.server, "lot", 100, 0).ok());
  EXPECT_EQ(ts.server->Aggregate("lot", 100), Availability::kUnconfirmed);
  EXPECT_EQ(ts.server->Aggregate("empty", 100), Availability::kUnconfirmed);
  ts.Set(110);
  EXPECT_EQ(ts.server->credits_issued(), 0u);
  EXPECT_EQ(ReasonOf(users[0].Claim(*ts.server, "lot", 100).status()),
            Reason::kNoCredit);
}

TEST(AggregateTest, CreditsWaitForTheWindowToClose) {
  TestServer ts = MakeTestServer({.epsilon = 1});
  std::vector<Client> users = Clients(*ts.server, 3, "window");
  ASSERT_TRUE(users[0].Submit(*ts.server, "lot", 100, 1).ok());
  ts.Set(101);
  ASSERT_TRUE(users[1].Submit(*ts.server, "lot", 101, 0).ok());
  ASSERT_TRUE(users[2].Submit(*ts.server, "lot", 101, 0).ok());
  // Window of slot 100 is [99, 101]; it can still grow until 102 passes.
  ts.Set(102);
  EXPECT_EQ(ts.server->credits_issued(), 0u);
  ts.Set(103);
  // Slot 100 is decided occupied (2 vs 1): its only entry voted 1.
  EXPECT_EQ(ts.server->credits_issued(), 0u);
  ts.Set(104);
  // Slot 101 is [100, 102]: occupied, both its entries match.
  EXPECT_EQ(ts.server->credits_issued(), 2u);
  EXPECT_EQ(ts.server->StatusAt("lot", 100), Availability::kOccupied);
}

TEST(AggregateTest, OldEntriesArePruned) {
  TestServer ts = MakeTestServer();
  Client user = MakeRegisteredClient(*ts.server, "prune");
  ASSERT_TRUE(user.Submit(*ts.server, "lot", 100, 1).ok());
  EXPECT_EQ(ts.server->data_entry_count(), 1u);
  ts.Set(102);
  EXPECT_EQ(ts.server->data_entry_count(), 1u);
  ts.Set(103);
  EXPECT_EQ(ts.server->data_entry_count(), 0u);
  // The credit outlives the entry.
  EXPECT_EQ(*user.Claim(*ts.server, "lot", 100), 1u);
}

TEST(ClaimTest, HonestClaimAndReuse) {
  TestServer ts = MakeTestServer();
  const Group& g = ts.server->group();
  Client user = MakeRegisteredClient(*ts.server, "claim");
  ASSERT_TRUE(user.Submit(*ts.server, "a", 100, 1).ok());
  ASSERT_TRUE(user.Submit(*ts.server, "b", 100, 1).ok());
  ts.Set(102);
  // Keeps the pre-claim credential; its own rng so session nonces differ.
  Client stale =
      *Client::Deserialize(user.Serialize(), SecureRng::FromSeed("stale"));
  EXPECT_EQ(*user.Claim(*ts.server, "a", 100), 1u);
  EXPECT_EQ(user.balance(), 1u);
  EXPECT_TRUE(SecretOpensPublic(g, user.secret(), user.credential()));
  EXPECT_EQ(user.secret().b.value(), 1);
  EXPECT_TRUE(ts.server->IsSpent(stale.secret().q));

  // Same record again, fresh credential: the record is gone. The client
  // forgot the ticket after claiming, so rebuild it locally first.
  ASSERT_TRUE(user.MakeSubmission("a", 100, 1).ok());
  EXPECT_EQ(ReasonOf(user.Claim(*ts.server, "a", 100).status()),
            Reason::kNoCredit);
  // Old credential on a still-open record: its identifier is spent.
  EXPECT_EQ(ReasonOf(stale.Claim(*ts.server, "b", 100).status()),
            Reason::kIdentifierSpent);
  // The failed reveal did not consume the record.
  EXPECT_EQ(*user.Claim(*ts.server, "b", 100), 1u);
  EXPECT_EQ(user.balance(), 2u);
}

TEST(ClaimTest, StepOrderAndSessions) {
  TestServer ts = MakeTestServer();
  const Group& g = ts.server->group();
  Client user = MakeRegisteredClient(*ts.server, "steps");
  ASSERT_TRUE(user.Submit(*ts.server, "a", 100, 1).ok());
  ts.Set(102);

  EXPECT_EQ(ReasonOf(ts.server->ClaimReveal({"nope", g.MakeScalar(1),
                                             g.MakeScalar(1)})),
            Reason::kOutOfOrderStep);
  ClaimOpenRequest open = *user.ClaimOpen("a", 100);
  ASSERT_TRUE(ts.server->ClaimOpen(open).ok());
  // Skipping reveal kills the session.
  EXPECT_EQ(ReasonOf(ts.server->ClaimRefresh({open.session, {}}).status()),
            Reason::kOutOfOrderStep);
  // Session nonces are single-use.
  EXPECT_EQ(ReasonOf(ts.server->ClaimOpen(open).status()),
            Reason::kOutOfOrderStep);
  user.Abort();
  EXPECT_FALSE(ts.server->IsSpent(user.secret().q));
  EXPECT_EQ(*user.Claim(*ts.server, "a", 100), 1u);
}

TEST(ClaimTest, BadOpeningAndBadProof) {
  TestServer ts = MakeTestServer();
  const Group& g = ts.server->group();
  Client user = MakeRegisteredClient(*ts.server, "opening");
  ASSERT_TRUE(user.Submit(*ts.server, "a", 100, 1).ok());
  ts.Set(102);
  ClaimOpenRequest open = *user.ClaimOpen("a", 100);
  ClaimOpenRequest tampered = open;
  tampered.proof.ticket.z_x = g.Add(tampered.proof.ticket.z_x, g.MakeScalar(1));
  EXPECT_EQ(ReasonOf(ts.server->ClaimOpen(tampered).status()),
            Reason::kBadProof);
  ClaimOpenRequest forged_sig = open;
  forged_sig.session = "other";
  forged_sig.credential.sig[0] ^= 1;
  EXPECT_EQ(ReasonOf(ts.server->ClaimOpen(forged_sig).status()),
            Reason::kBadSignature);

  user.Abort();
  open = *user.ClaimOpen("a", 100);
  ASSERT_TRUE(ts.server->ClaimOpen(open).ok());
  RevealRequest wrong{open.session, g.Add(user.secret().q, g.MakeScalar(1)),
                      user.secret().r_q};
  EXPECT_EQ(ReasonOf(ts.server->ClaimReveal(wrong)), Reason::kBadOpening);
}

TEST(ClaimTest, SessionsExpire) {
  TestServer ts = MakeTestServer({.session_timeout = std::chrono::milliseconds(1)});
  Client user = MakeRegisteredClient(*ts.server, "expire");
  ASSERT_TRUE(user.Submit(*ts.server, "a", 100, 1).ok());
  ts.Set(102);
  ClaimOpenRequest open = *user.ClaimOpen("a", 100);
  ASSERT_TRUE(ts.server->ClaimOpen(open).ok());
  std::this_thread::sleep_for(std::chrono::milliseconds(20));
  absl::StatusOr<RevealRequest> reveal = user.ClaimReveal(
      CreditOffer{"a", 100, user.TicketFor("a", 100), 1});
  ASSERT_TRUE(reveal.ok());
  EXPECT_EQ(ReasonOf(ts.server->ClaimReveal(*reveal)), Reason::kOutOfOrderStep);
  EXPECT_FALSE(ts.server->IsSpent(user.secret().q));
}

TEST(ClaimTest, ConcurrentClaimsCreditOnce) {
  TestServer ts = MakeTestServer();
  Client user = MakeRegisteredClient(*ts.server, "race");
  ASSERT_TRUE(user.Submit(*ts.server, "a", 100, 1).ok());
  ts.Set(102);
  constexpr int kThreads = 8;
  std::vector<Client> copies;
  for (int i = 0; i < kThreads; ++i) {
    std::string state = user.Serialize();
    copies.push_back(*Client::Deserialize(
        state, SecureRng::FromSeed("race-copy" + std::to_string(i))));
  }
  std::atomic<int> wins{0};
  {
    std::vector<std::jthread> threads;
    for (int i = 0; i < kThreads; ++i) {
      threads.emplace_back([&, i] {
        if (copies[i].Claim(*ts.server, "a", 100).ok()) ++wins;
      });
    }
  }
  EXPECT_EQ(wins.load(), 1);
  EXPECT_EQ(ts.server->credits_claimed(), 1u);
  EXPECT_EQ(ts.server->pending_credit_count(), 0u);
}

TEST(InquiryTest, BalancesAndBoundary) {
  TestServer ts = MakeTestServer({.b0 = 3});
  Client user = MakeRegisteredClient(*ts.server, "inq");
  ASSERT_TRUE(user.Inquire(*ts.server, {"lot"}).ok());
  EXPECT_EQ(user.balance(), 2u);
  EXPECT_EQ(user.secret().b.value(), 2);
  EXPECT_TRUE(
      SecretOpensPublic(ts.server->group(), user.secret(), user.credential()));
  ASSERT_TRUE(user.Inquire(*ts.server, {"lot"}).ok());
  ASSERT_TRUE(user.Inquire(*ts.server, {"lot"}).ok());
  EXPECT_EQ(user.balance(), 0u);
  EXPECT_EQ(ReasonOf(user.Inquire(*ts.server, {"lot"}).status()),
            Reason::kInsufficientBalance);
}

TEST(InquiryTest, ForgedBalanceProofRejected) {
  TestServer ts = MakeTestServer({.b0 = 0});
  Client user = MakeRegisteredClient(*ts.server, "broke");
  EXPECT_EQ(ReasonOf(user.InquiryOpen({"lot"}).status()),
            Reason::kInsufficientBalance);
  SecureRng rng = SecureRng::FromSeed("forge");
  EXPECT_EQ(ReasonOf(ts.server->InquiryOpen(ForgeInquiry(user, rng))),
            Reason::kInsufficientBalance);
  EXPECT_FALSE(ts.server->IsSpent(user.secret().q));
}

TEST(InquiryTest, StatusesMatchAggregate) {
  TestServer ts = MakeTestServer({.b0 = 1});
  std::vector<Client> users = Clients(*ts.server, 3, "status");
  ASSERT_TRUE(users[0].Submit(*ts.server, "x", 100, 1).ok());
  ASSERT_TRUE(users[1].Submit(*ts.server, "y", 100, 0).ok());
  ASSERT_TRUE(users[2].Submit(*ts.server, "z", 100, 1).ok());
  ASSERT_TRUE(users[1].Submit(*ts.server, "z", 99, 0).ok());
  absl::StatusOr<std::vector<SpaceStatus>> st =
      users[0].Inquire(*ts.server, {"x", "y", "z", "w"});
  ASSERT_TRUE(st.ok()) << st.status();
  std::vector<SpaceStatus> expected;
  for (const char* space : {"x", "y", "z", "w"}) {
    expected.push_back({space, ts.server->LatestStatus(space)});
  }
  EXPECT_EQ(*st, expected);
  EXPECT_EQ((*st)[0].status, Availability::kAvailable);
  EXPECT_EQ((*st)[1].status, Availability::kOccupied);
  EXPECT_EQ((*st)[3].status, Availability::kUnconfirmed);
}

TEST(SensorTest, MajorityFollowsSensor) {
  TestServer ts = MakeTestServer({.epsilon = 1});
  Client sensor = MakeRegisteredClient(*ts.server, "sensor");
  Client person = MakeRegisteredClient(*ts.server, "person");
  std::vector<Availability> series;
  for (std::int64_t t = 100; t < 106; ++t) {
    ts.Set(t);
    ASSERT_TRUE(IngestIotReading(sensor, *ts.server, "covered", t, 1).ok());
    if (t == 102) {
      ASSERT_TRUE(person.Submit(*ts.server, "covered", t, 0).ok());
    }
  }
  for (std::int64_t t = 100; t < 106; ++t) {
    series.push_back(ts.server->StatusAt("covered", t));
  }
  for (Availability a : series) EXPECT_EQ(a, Availability::kAvailable);

  // An uncovered space is driven by the crowd alone.
  ASSERT_TRUE(person.Submit(*ts.server, "uncovered", 105, 0).ok());
  EXPECT_EQ(ts.server->StatusAt("uncovered", 105), Availability::kOccupied);
  EXPECT_EQ(ts.server->StatusAt("uncovered", 104), Availability::kOccupied);
  EXPECT_EQ(ts.server->StatusAt("nothing", 105), Availability::kUnconfirmed);
}

TEST(JournalTest, ReplayRestoresTables) {
  std::string path = ::testing::TempDir() + "/server_journal_test.log";
  std::filesystem::remove(path);
  std::string before;
  Scalar spent;
  {
    TestServer ts = MakeTestServer({.b0 = 1, .journal = path});
    std::vector<Client> users = Clients(*ts.server, 2, "journal");
    ASSERT_TRUE(users[0].Submit(*ts.server, "a", 100, 1).ok());
    ASSERT_TRUE(users[1].Submit(*ts.server, "a", 100, 1).ok());
    ts.Set(102);
    spent = users[0].secret().q;
    ASSERT_TRUE(users[0].Claim(*ts.server, "a", 100).ok());
    ASSERT_TRUE(users[1].Inquire(*ts.server, {"a"}).ok());
    before = ts.server->DumpState();
  }
  TestServer again = MakeTestServer({.b0 = 1, .journal = path, .start = 102});
  EXPECT_EQ(again.server->DumpState(), before);
  EXPECT_TRUE(again.server->IsSpent(spent));
  EXPECT_EQ(again.server->pending_credit_count(), 1u);
  EXPECT_EQ(again.server->credits_issued(), 2u);
  EXPECT_EQ(again.server->credits_claimed(), 1u);
  EXPECT_EQ(again.server->spent_identifier_count(), 2u);
  std::filesystem::remove(path);
}

TEST(JournalTest, CorruptJournalFailsStartup) {
  std::string path = ::testing::TempDir() + "/server_journal_corrupt.log";
  {
    std::FILE* f = std::fopen(path.c_str(), "w");
    std::fputs("TD|a|notanumber|00|1\n", f);
    std::fclose(f);
  }
  ServerConfig config(testing::Group64(), testing::TestKeys());
  config.journal_path = path;
  EXPECT_FALSE(Server::Create(config).ok());
  std::filesystem::remove(path);
}

TEST(StateHygieneTest, DumpHoldsNoClientSecrets) {
  TestServer ts = MakeTestServer({.b0 = 2});
  const Group& g = ts.server->group();
  Client user = MakeRegisteredClient(*ts.server, "canary");
  ASSERT_TRUE(user.Submit(*ts.server, "a", 100, 1).ok());
  ts.Set(102);
  ASSERT_TRUE(user.Claim(*ts.server, "a", 100).ok());
  ASSERT_TRUE(user.Inquire(*ts.server, {"a"}).ok());
  const CredentialSecret& s = user.secret();
  std::string dump = ts.server->DumpState();
  for (const Scalar* secret : {&s.s, &s.r_s, &s.q, &s.r_q}) {
    EXPECT_EQ(dump.find(g.EncodeHex(*secret)), std::string::npos);
  }
}

}  // namespace
}  // namespace hsense

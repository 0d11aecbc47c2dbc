#include "doctest.h"

#include <future>
#include <set>

#include "d2d/engine.hpp"
#include "d2d/record.hpp"
#include "support.hpp"

using namespace d2d;
using test::Kind;

namespace {

DebateResult run(ScriptedBackend& b, RunConfig cfg, const Claim& claim = test::sample_claim()) {
  const PromptRegistry prompts;
  const DebateEngine engine(b, prompts, std::move(cfg));
  return engine.run_debate(claim);
}

std::vector<std::pair<Stage, Stance>> order_of(const std::vector<Turn>& t) {
  std::vector<std::pair<Stage, Stance>> out;
  for (const auto& x : t) out.emplace_back(x.stage, x.side);
  return out;
}

}  // namespace

TEST_CASE("four-round debate runs affirmative first in every stage") {
  ScriptedBackend b;
  test::install(b);
  const auto r = run(b, RunConfig{});
  using A = Stance;
  const std::vector<std::pair<Stage, Stance>> expected = {
      {Stage::OPENING, A::AFFIRMATIVE_REAL},     {Stage::OPENING, A::NEGATIVE_FAKE},
      {Stage::REBUTTAL, A::AFFIRMATIVE_REAL},    {Stage::REBUTTAL, A::NEGATIVE_FAKE},
      {Stage::FREE_DEBATE, A::AFFIRMATIVE_REAL}, {Stage::FREE_DEBATE, A::NEGATIVE_FAKE},
      {Stage::CLOSING, A::AFFIRMATIVE_REAL},     {Stage::CLOSING, A::NEGATIVE_FAKE}};
  CHECK(order_of(r.transcript) == expected);
  for (size_t i = 0; i < r.transcript.size(); ++i) {
    CHECK(r.transcript[i].index == static_cast<int>(i));
    CHECK(r.transcript[i].agent_id == agent_id_for(r.transcript[i].side, r.transcript[i].stage));
  }
  CHECK(r.transcript[0].content == "Affirmative opening argument.");
  CHECK(r.verdict.sheet.affirmative_total == 10);
  CHECK(r.verdict.label == Label::FAKE);

  const auto log = b.log();
  CHECK(test::count_kind(log, Kind::DOMAIN) == 1);
  CHECK(test::count_kind(log, Kind::PROFILE) == 14);
  CHECK(test::count_kind(log, Kind::SUMMARY) == 1);
  CHECK(test::count_kind(log, Kind::EVAL) == 5);
  // 7 non-empty prefixes before turns plus the final compression.
  CHECK(test::count_kind(log, Kind::MEMORY) == 8);
  CHECK(log.size() == 1 + 14 + 8 + 8 + 6);
}

TEST_CASE("each digest is the compression of the preceding transcript") {
  ScriptedBackend b;
  test::install(b);
  const auto r = run(b, RunConfig{});
  REQUIRE(r.digests.size() == r.transcript.size() + 1);
  CHECK(r.transcript[0].memory_digest_used.empty());
  for (size_t i = 1; i <= r.transcript.size(); ++i) {
    const auto expected = test::scripted_digest(i, test::history_line(r.transcript[i - 1], false));
    CHECK(r.digests[i] == expected);
    if (i < r.transcript.size()) CHECK(r.transcript[i].memory_digest_used == expected);
  }
}

TEST_CASE("later-stage prompts carry the latest digest") {
  ScriptedBackend b;
  test::install(b);
  const auto r = run(b, RunConfig{});
  const auto rebuttals = test::of_kind(b.log(), Kind::REBUTTAL);
  REQUIRE(rebuttals.size() == 2);
  CHECK(rebuttals[0].messages[0].content.find("The previous argument presented was: " + r.transcript[2].memory_digest_used +
                                              ".") != std::string::npos);
  const auto openings = test::of_kind(b.log(), Kind::OPENING);
  CHECK(openings[0].messages[0].content.find("Digest of") == std::string::npos);
}

TEST_CASE("reversed order lets the negative side open each stage") {
  ScriptedBackend b;
  test::install(b);
  RunConfig cfg;
  cfg.order_reversed = true;
  const auto r = run(b, cfg);
  for (size_t i = 0; i < r.transcript.size(); ++i) {
    CHECK(r.transcript[i].side == (i % 2 == 0 ? Stance::NEGATIVE_FAKE : Stance::AFFIRMATIVE_REAL));
  }
}

TEST_CASE("turn count follows the round plan") {
  for (int rounds = 1; rounds <= 6; ++rounds) {
    ScriptedBackend b;
    test::install(b);
    RunConfig cfg;
    cfg.rounds = rounds;
    const auto r = run(b, cfg);
    CHECK(r.transcript.size() == static_cast<size_t>(2 * rounds));
    CHECK(test::count_kind(b.log(), Kind::EVAL) == 5);
  }
}

TEST_CASE("one-round debate is opening only") {
  ScriptedBackend b;
  test::install(b);
  RunConfig cfg;
  cfg.rounds = 1;
  const auto r = run(b, cfg);
  REQUIRE(r.transcript.size() == 2);
  CHECK(r.transcript[0].stage == Stage::OPENING);
  CHECK(r.transcript[1].stage == Stage::OPENING);
}

TEST_CASE("roster has fourteen distinct profiles") {
  ScriptedBackend b;
  test::install(b);
  const auto r = run(b, RunConfig{});
  CHECK(r.roster.debaters.size() == 8);
  CHECK(r.roster.judges.size() == 6);
  std::set<std::string> texts;
  for (const auto& p : r.roster.debaters) texts.insert(p.profile_text);
  CHECK(texts.size() == 8);
  for (const auto& p : r.roster.judges) texts.insert(p.profile_text);
  CHECK(texts.size() == 14);
  CHECK(r.roster.synopsis_judge().agent_id == kSynopsisJudgeId);
  for (const auto& req : test::of_kind(b.log(), Kind::PROFILE)) CHECK(req.temperature == 0.7);
}

TEST_CASE("generic profiles make no generation calls") {
  ScriptedBackend b;
  test::install(b);
  RunConfig cfg;
  cfg.variant = Variant::NO_DOMAIN_PROFILE;
  const auto r = run(b, cfg);
  CHECK(test::count_kind(b.log(), Kind::PROFILE) == 0);
  for (const auto& p : r.roster.debaters) CHECK(p.profile_text == kGenericProfile);
  for (const auto& p : r.roster.judges) CHECK(p.profile_text == kGenericProfile);
}

TEST_CASE("without stage design every turn uses the free-debate template") {
  ScriptedBackend b;
  test::install(b);
  RunConfig cfg;
  cfg.variant = Variant::NO_STAGE_DESIGN;
  cfg.rounds = 2;
  const auto r = run(b, cfg);
  CHECK(r.transcript.size() == 8);
  const auto log = b.log();
  CHECK(test::count_kind(log, Kind::FREE) == 8);
  CHECK(test::count_kind(log, Kind::OPENING) + test::count_kind(log, Kind::REBUTTAL) +
            test::count_kind(log, Kind::CLOSING) ==
        0);
  CHECK(test::count_kind(log, Kind::PROFILE) == 2 + 6);
}

TEST_CASE("domain is the first two words of the reply") {
  ScriptedBackend b;
  test::install(b, {.domain_reply = "  Politics and international affairs\n"});
  const PromptRegistry prompts;
  const DebateEngine engine(b, prompts, RunConfig{});
  CHECK(engine.infer_domain(test::sample_claim()) == "Politics and");
  CHECK(b.log()[0].temperature == 0.0);
}

TEST_CASE("empty history compresses without a call") {
  ScriptedBackend b;
  const PromptRegistry prompts;
  const DebateEngine engine(b, prompts, RunConfig{});
  CHECK(engine.compress_memory({}).empty());
  CHECK(b.calls() == 0);
}

TEST_CASE("per-stage compression") {
  ScriptedBackend b;
  test::install(b);
  RunConfig cfg;
  cfg.compress_per_stage = true;
  const auto r = run(b, cfg);
  // Three stage starts with history, plus the final compression.
  CHECK(test::count_kind(b.log(), Kind::MEMORY) == 4);
  CHECK(r.transcript[3].memory_digest_used == r.transcript[2].memory_digest_used);
}

TEST_CASE("a failing turn aborts with the partial transcript") {
  ScriptedBackend b;
  b.set_fallback([](const ChatRequest& r) -> std::optional<std::string> {
    if (test::kind_of(r) == Kind::REBUTTAL) return std::nullopt;
    return test::debate_reply(r, {});
  });
  try {
    run(b, RunConfig{});
    FAIL("expected ItemFailed");
  } catch (const ItemFailed& e) {
    CHECK(e.code == ErrorCode::ITEM_FAILED);
    CHECK(e.cause == ErrorCode::NO_SCRIPT_MATCH);
    CHECK(e.claim_id == "c1");
    CHECK(e.partial_transcript.size() == 2);
  }
}

TEST_CASE("two runs produce byte-identical records") {
  ScriptedBackend a, b;
  test::install(a);
  test::install(b);
  const auto ra = run(a, RunConfig{});
  const auto rb = run(b, RunConfig{});
  CHECK(ra == rb);
  CHECK(json(ra).dump() == json(rb).dump());
}

TEST_CASE("concurrent debates on one engine") {
  ScriptedBackend b;
  test::install(b);
  const PromptRegistry prompts;
  const DebateEngine engine(b, prompts, RunConfig{});
  std::vector<std::future<DebateResult>> runs;
  for (int i = 0; i < 4; ++i) {
    runs.push_back(std::async(std::launch::async, [&, i] {
      return engine.run_debate(Claim::make("c" + std::to_string(i), "Claim number " + std::to_string(i)));
    }));
  }
  for (auto& f : runs) CHECK(f.get().transcript.size() == 8);
}

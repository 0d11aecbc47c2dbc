#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "d2d/runner.hpp"
#include "support.hpp"

using namespace d2d;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  auto p = fs::temp_directory_path() / ("d2d_harness_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

template <typename F>
Error error_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e;
  }
  FAIL("expected an Error");
  return Error(ErrorCode::ITEM_FAILED, "");
}

std::string words(int n) {
  std::string s;
  for (int i = 0; i < n; ++i) s += "w ";
  return s;
}

Dataset corpus(int n, int distinct_lengths, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> len(1, distinct_lengths);
  Dataset ds;
  for (int i = 0; i < n; ++i) {
    char id[16];
    std::snprintf(id, sizeof id, "id%05d", i);
    ds.items.push_back(Claim::make(id, words(len(rng)), Label::FAKE));
  }
  return ds;
}

}  // namespace

TEST_CASE("dataset loading normalizes labels and skips blank lines") {
  const auto dir = temp_dir("load");
  std::ofstream(dir / "d.jsonl") << R"({"id": "a", "text": "first claim", "label": "Fake"})" << "\n\n"
                                 << R"({"id": 7, "text": "second claim", "label": "REAL"})" << "\n"
                                 << R"({"id": "c", "text": "unlabelled"})" << "\n";
  const auto ds = load_dataset((dir / "d.jsonl").string());
  REQUIRE(ds.items.size() == 3);
  CHECK(ds.items[0].gold_label == Label::FAKE);
  CHECK(ds.items[1].id == "7");
  CHECK(ds.items[1].gold_label == Label::REAL);
  CHECK_FALSE(ds.items[2].gold_label.has_value());
  CHECK(ds.items[0].word_count == 2);
}

TEST_CASE("dataset errors name every bad line") {
  const auto dir = temp_dir("bad");
  std::ofstream(dir / "d.jsonl") << R"({"id": "a", "text": "ok"})" << "\n"
                                 << "not json\n"
                                 << R"({"id": "b"})" << "\n"
                                 << R"({"id": "a", "text": "dup"})" << "\n"
                                 << R"({"id": "d", "text": "x", "label": "maybe"})" << "\n";
  const auto e = error_of([&] { load_dataset((dir / "d.jsonl").string()); });
  CHECK(e.code == ErrorCode::SCHEMA_ERROR);
  const std::string msg = e.what();
  for (const char* where : {"line 2:", "line 3:", "line 4:", "line 5:"}) CHECK(msg.find(where) != std::string::npos);
  CHECK(msg.find("line 1:") == std::string::npos);
  CHECK(error_of([&] { load_dataset((dir / "missing.jsonl").string()); }).code == ErrorCode::IO_ERROR);
}

TEST_CASE("dropping the longest items") {
  for (int n : {19, 20, 100, 1000}) {
    const auto ds = corpus(n, 5, static_cast<unsigned>(n));
    const auto kept = drop_longest(ds, 0.05);
    CHECK(ds.items.size() - kept.items.size() == static_cast<size_t>(n * 5 / 100));
    CHECK(kept.preprocessed);
    CHECK(drop_longest(ds, 0.05).items == kept.items);
  }
  Dataset ties;
  for (const char* id : {"b", "d", "a", "c"}) ties.items.push_back(Claim::make(id, "same length"));
  ties.items.push_back(Claim::make("e", "short"));
  const auto kept = drop_longest(ties, 0.5);  // floor(2.5) = 2, larger ids go first
  std::vector<std::string> ids;
  for (const auto& c : kept.items) ids.push_back(c.id);
  CHECK(ids == std::vector<std::string>{"b", "a", "e"});
  Dataset hundred = corpus(100, 3, 1);
  CHECK(drop_longest(hundred, 0.29).items.size() == 71);
  CHECK(error_of([&] { drop_longest(hundred, 1.0); }).code == ErrorCode::INVALID_ARGUMENT);
}

TEST_CASE("metrics on a worked confusion matrix") {
  std::vector<Prediction> preds;
  auto add = [&](int n, Label p, Label g) {
    for (int i = 0; i < n; ++i) preds.push_back({std::to_string(preds.size()), p, g});
  };
  add(40, Label::FAKE, Label::FAKE);
  add(10, Label::FAKE, Label::REAL);
  add(10, Label::REAL, Label::FAKE);
  add(40, Label::REAL, Label::REAL);
  const auto m = compute_metrics(preds, Label::FAKE);
  CHECK(m.confusion == Confusion{40, 10, 10, 40});
  CHECK(m.accuracy == doctest::Approx(0.8));
  CHECK(m.precision == doctest::Approx(0.8));
  CHECK(m.recall == doctest::Approx(0.8));
  CHECK(m.f1 == doctest::Approx(0.8));
  const auto r = compute_metrics(preds, Label::REAL);
  CHECK(r.confusion == Confusion{40, 10, 10, 40});
}

TEST_CASE("metrics conventions for empty denominators") {
  const auto none = metrics_from_confusion({0, 0, 0, 0}, Label::FAKE);
  CHECK(none.accuracy == 0.0);
  CHECK(none.f1 == 0.0);
  const auto no_pos_pred = metrics_from_confusion({0, 0, 5, 5}, Label::FAKE);
  CHECK(no_pos_pred.precision == 0.0);
  CHECK(no_pos_pred.recall == 0.0);
  CHECK(no_pos_pred.f1 == 0.0);
  const auto no_pos_gold = metrics_from_confusion({0, 3, 0, 7}, Label::FAKE);
  CHECK(no_pos_gold.recall == 0.0);
  CHECK(no_pos_gold.accuracy == doctest::Approx(0.7));
  CHECK(error_of([] { compute_metrics({{"x", Label::FAKE, std::nullopt}}, Label::FAKE); }).code ==
        ErrorCode::MISSING_GOLD);
}

TEST_CASE("run records round-trip through their files") {
  ScriptedBackend b;
  test::install(b);
  b.on_contains("Determine whether", "VERDICT: REAL");
  const PromptRegistry prompts;
  Dataset ds;
  ds.items = {Claim::make("x2", "Second claim text", Label::REAL), Claim::make("x1", "First claim text", Label::FAKE)};
  RunConfig cfg;
  cfg.parallelism = 2;
  const auto rec = run_dataset(b, prompts, ds, cfg, MethodSpec{});
  REQUIRE(rec.items.size() == 2);
  CHECK(rec.items[0].claim_id == "x1");
  CHECK(rec.counters.backend_calls == 2 * (1 + 14 + 8 + 8 + 6));
  CHECK(rec.metrics.n_evaluated == 2);

  const auto dir = temp_dir("record");
  write_run_record(dir.string(), rec);
  for (const char* f : {"config.json", "results.jsonl", "metrics.json", "run_info.json"}) CHECK(fs::exists(dir / f));
  CHECK(read_run_record(dir.string()) == rec);

  const auto zs = run_dataset(b, prompts, ds, cfg, MethodSpec::parse("ZS"));
  write_run_record((dir / "zs").string(), zs);
  CHECK(read_run_record((dir / "zs").string()) == zs);
  CHECK(zs.metrics.accuracy == doctest::Approx(0.5));
}

TEST_CASE("canonical result files are identical across runs") {
  const PromptRegistry prompts;
  Dataset ds;
  for (int i = 0; i < 4; ++i) ds.items.push_back(Claim::make("k" + std::to_string(i), "Claim " + std::to_string(i), Label::FAKE));
  std::vector<fs::path> dirs;
  for (int run = 0; run < 2; ++run) {
    ScriptedBackend b;
    test::install(b);
    RunConfig cfg;
    cfg.parallelism = 3;
    const auto rec = run_dataset(b, prompts, ds, cfg, MethodSpec{});
    dirs.push_back(temp_dir("canon" + std::to_string(run)));
    write_run_record(dirs.back().string(), rec);
  }
  for (const char* f : {"config.json", "results.jsonl", "metrics.json"}) {
    CHECK(slurp(dirs[0] / f) == slurp(dirs[1] / f));
  }
}

TEST_CASE("failed items are recorded and excluded from metrics") {
  ScriptedBackend b;
  b.set_fallback([](const ChatRequest& r) -> std::optional<std::string> {
    if (test::contains(r.messages[0].content, "poison") && test::kind_of(r) == test::Kind::CLOSING) return std::nullopt;
    return test::debate_reply(r, {});
  });
  const PromptRegistry prompts;
  Dataset ds;
  ds.items = {Claim::make("ok", "A normal claim", Label::FAKE), Claim::make("bad", "A poison claim", Label::FAKE)};
  const auto rec = run_dataset(b, prompts, ds, RunConfig{}, MethodSpec{});
  CHECK(rec.metrics.n_evaluated == 1);
  CHECK(rec.metrics.n_failed == 1);
  const auto& bad = rec.items[0];
  REQUIRE(bad.failure.has_value());
  CHECK(bad.failure->code == ErrorCode::NO_SCRIPT_MATCH);
  CHECK(bad.failure->partial_transcript.size() == 6);
  CHECK_FALSE(bad.predicted.has_value());

  const auto dir = temp_dir("failed");
  write_run_record(dir.string(), rec);
  CHECK(read_run_record(dir.string()) == rec);
}

TEST_CASE("config files keep defaults for absent keys") {
  const auto dir = temp_dir("cfg");
  std::ofstream(dir / "c.json") << R"({"rounds": 3, "models": {"default": "m", "stages": {"CLOSING": "big"}},
                                       "variant": "NO_MULTI_JUDGE"})";
  const auto c = load_run_config((dir / "c.json").string());
  CHECK(c.rounds == 3);
  CHECK(c.variant == Variant::NO_MULTI_JUDGE);
  CHECK(c.models.for_stage(Stage::CLOSING) == "big");
  CHECK(c.models.for_stage(Stage::OPENING) == "m");
  CHECK(c.temperatures == Temperatures{});
  CHECK(c.positive_class == Label::FAKE);
}

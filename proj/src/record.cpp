#include "d2d/record.hpp"

#include <filesystem>
#include <fstream>

namespace d2d {

namespace {

template <typename T>
std::optional<T> opt(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

template <typename T>
json opt_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

std::optional<Label> opt_label(const json& j, const char* key) {
  if (auto s = opt<std::string>(j, key)) return parse_label(*s);
  return std::nullopt;
}

json opt_label_json(const std::optional<Label>& l) { return l ? json(to_string(*l)) : json(nullptr); }

json score_map(const std::vector<DimensionScore>& entries) {
  json scores = json::object();
  for (const auto& e : entries) {
    scores[std::string(to_string(e.dimension))] = {{"affirmative", e.affirmative}, {"negative", e.negative}};
  }
  return scores;
}

std::vector<DimensionScore> score_entries(const json& scores) {
  std::vector<DimensionScore> out;
  for (Dimension d : kAllDimensions) {
    const auto key = std::string(to_string(d));
    if (!scores.contains(key)) continue;
    out.push_back(DimensionScore::make(d, scores[key].at("affirmative").get<int>(),
                                       scores[key].at("negative").get<int>()));
  }
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IO_ERROR, "cannot write " + path.string());
  out << text;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IO_ERROR, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SCHEMA_ERROR, path.string() + ": " + e.what());
  }
}

}  // namespace

void to_json(json& j, const RunConfig& c) {
  json stages = json::object();
  for (const auto& [stage, model] : c.models.stage) stages[std::string(to_string(stage))] = model;
  j = json{
      {"rounds", c.rounds},
      {"variant", to_string(c.variant)},
      {"models",
       {{"default", c.models.default_model},
        {"stages", stages},
        {"domain", c.models.domain},
        {"profile", c.models.profile},
        {"memory", c.models.memory}}},
      {"temperatures",
       {{"domain", c.temperatures.domain}, {"debate", c.temperatures.debate}, {"judge", c.temperatures.judge}}},
      {"order_reversed", c.order_reversed},
      {"neutral_labels", c.neutral_labels},
      {"positive_class", to_string(c.positive_class)},
      {"parallelism", c.parallelism},
      {"cache_path", opt_json(c.cache_path)},
      {"compress_per_stage", c.compress_per_stage},
      {"synopsis_to_scorers", c.synopsis_to_scorers},
      {"score_retry_cap", c.score_retry_cap},
      {"self_reflect_max_iters", c.self_reflect_max_iters},
      {"drop_longest_fraction", c.drop_longest_fraction},
  };
}

void from_json(const json& j, RunConfig& c) {
  c.rounds = j.value("rounds", c.rounds);
  if (j.contains("variant")) c.variant = parse_variant(j.at("variant").get<std::string>());
  if (j.contains("models")) {
    const auto& m = j.at("models");
    c.models.default_model = m.value("default", c.models.default_model);
    c.models.domain = m.value("domain", c.models.domain);
    c.models.profile = m.value("profile", c.models.profile);
    c.models.memory = m.value("memory", c.models.memory);
    if (m.contains("stages")) {
      c.models.stage.clear();
      for (const auto& [k, v] : m.at("stages").items()) c.models.stage[parse_stage(k)] = v.get<std::string>();
    }
  }
  if (j.contains("temperatures")) {
    const auto& t = j.at("temperatures");
    c.temperatures.domain = t.value("domain", c.temperatures.domain);
    c.temperatures.debate = t.value("debate", c.temperatures.debate);
    c.temperatures.judge = t.value("judge", c.temperatures.judge);
  }
  c.order_reversed = j.value("order_reversed", c.order_reversed);
  c.neutral_labels = j.value("neutral_labels", c.neutral_labels);
  if (j.contains("positive_class")) c.positive_class = parse_label(j.at("positive_class").get<std::string>());
  c.parallelism = j.value("parallelism", c.parallelism);
  if (j.contains("cache_path")) c.cache_path = opt<std::string>(j, "cache_path");
  c.compress_per_stage = j.value("compress_per_stage", c.compress_per_stage);
  c.synopsis_to_scorers = j.value("synopsis_to_scorers", c.synopsis_to_scorers);
  c.score_retry_cap = j.value("score_retry_cap", c.score_retry_cap);
  c.self_reflect_max_iters = j.value("self_reflect_max_iters", c.self_reflect_max_iters);
  c.drop_longest_fraction = j.value("drop_longest_fraction", c.drop_longest_fraction);
}

void from_json(const json& j, HttpBackendOptions& o) {
  o.base_url = j.value("base_url", o.base_url);
  o.path = j.value("path", o.path);
  o.api_key_env = j.value("api_key_env", o.api_key_env);
  o.max_attempts = j.value("max_attempts", o.max_attempts);
  o.initial_backoff = std::chrono::milliseconds(j.value("initial_backoff_ms", o.initial_backoff.count()));
  o.backoff_multiplier = j.value("backoff_multiplier", o.backoff_multiplier);
  o.max_backoff = std::chrono::milliseconds(j.value("max_backoff_ms", o.max_backoff.count()));
  o.connect_timeout = std::chrono::seconds(j.value("connect_timeout_s", o.connect_timeout.count()));
  o.read_timeout = std::chrono::seconds(j.value("read_timeout_s", o.read_timeout.count()));
}

void to_json(json& j, const Turn& t) {
  j = json{{"index", t.index},       {"stage", to_string(t.stage)}, {"side", to_string(t.side)},
           {"agent_id", t.agent_id}, {"content", t.content},        {"digest", t.memory_digest_used}};
}

void from_json(const json& j, Turn& t) {
  t.index = j.at("index").get<int>();
  t.stage = parse_stage(j.at("stage").get<std::string>());
  t.side = parse_stance(j.at("side").get<std::string>());
  t.agent_id = j.at("agent_id").get<std::string>();
  t.content = j.at("content").get<std::string>();
  t.memory_digest_used = j.at("digest").get<std::string>();
}

void to_json(json& j, const AgentProfile& p) {
  j = json{{"agent_id", p.agent_id},
           {"role", p.role == AgentRole::DEBATER ? "DEBATER" : "JUDGE"},
           {"side", p.side ? json(to_string(*p.side)) : json(nullptr)},
           {"stage", p.stage ? json(to_string(*p.stage)) : json(nullptr)},
           {"dimension", p.dimension ? json(to_string(*p.dimension)) : json(nullptr)},
           {"profile", p.profile_text}};
}

void from_json(const json& j, AgentProfile& p) {
  p.agent_id = j.at("agent_id").get<std::string>();
  p.role = j.at("role").get<std::string>() == "DEBATER" ? AgentRole::DEBATER : AgentRole::JUDGE;
  p.side.reset();
  p.stage.reset();
  p.dimension.reset();
  if (auto s = opt<std::string>(j, "side")) p.side = parse_stance(*s);
  if (auto s = opt<std::string>(j, "stage")) p.stage = parse_stage(*s);
  if (auto s = opt<std::string>(j, "dimension")) p.dimension = parse_dimension(*s);
  p.profile_text = j.at("profile").get<std::string>();
}

void to_json(json& j, const Roster& r) { j = json{{"debaters", r.debaters}, {"judges", r.judges}}; }

void from_json(const json& j, Roster& r) {
  r.debaters = j.at("debaters").get<std::vector<AgentProfile>>();
  r.judges = j.at("judges").get<std::vector<AgentProfile>>();
}

void to_json(json& j, const JudgmentTrace& t) {
  json dims = json::object();
  for (const auto& [dim, d] : t.per_dimension) {
    dims[std::string(to_string(dim))] = {{"raw_affirmative", d.raw.affirmative_raw},
                                         {"raw_negative", d.raw.negative_raw},
                                         {"source_text", d.raw.source_text},
                                         {"affirmative", d.score.affirmative},
                                         {"negative", d.score.negative},
                                         {"repair_applied", d.repair_applied},
                                         {"retries_used", d.retries_used}};
  }
  j = json{{"synopsis", t.synopsis}, {"dimensions", dims}};
}

void from_json(const json& j, JudgmentTrace& t) {
  t.synopsis = j.at("synopsis").get<std::string>();
  t.per_dimension.clear();
  for (const auto& [k, v] : j.at("dimensions").items()) {
    const auto dim = parse_dimension(k);
    DimensionTrace d;
    d.raw = RawScorePair{v.at("raw_affirmative").get<double>(), v.at("raw_negative").get<double>(),
                         v.at("source_text").get<std::string>()};
    d.score = DimensionScore::make(dim, v.at("affirmative").get<int>(), v.at("negative").get<int>());
    d.repair_applied = v.at("repair_applied").get<bool>();
    d.retries_used = v.at("retries_used").get<int>();
    t.per_dimension.emplace(dim, std::move(d));
  }
}

void to_json(json& j, const DebateResult& r) {
  j = json{{"claim_id", r.claim_id},
           {"domain", r.domain},
           {"roster", r.roster},
           {"turns", r.transcript},
           {"digests", r.digests},
           {"synopsis", r.verdict.synopsis},
           {"scores", score_map(r.verdict.sheet.entries)},
           {"totals", {{"affirmative", r.verdict.sheet.affirmative_total}, {"negative", r.verdict.sheet.negative_total}}},
           {"verdict", to_string(r.verdict.label)},
           {"trace", r.trace},
           {"config", r.config_echo}};
}

void from_json(const json& j, DebateResult& r) {
  r.claim_id = j.at("claim_id").get<std::string>();
  r.domain = j.at("domain").get<std::string>();
  r.roster = j.at("roster").get<Roster>();
  r.transcript = j.at("turns").get<std::vector<Turn>>();
  r.digests = j.at("digests").get<std::vector<std::string>>();
  r.verdict = aggregate_verdict(score_entries(j.at("scores")), j.at("synopsis").get<std::string>());
  if (to_string(r.verdict.label) != j.at("verdict").get<std::string>()) {
    throw Error(ErrorCode::SCHEMA_ERROR, "verdict of " + r.claim_id + " disagrees with its scores");
  }
  r.trace = j.at("trace").get<JudgmentTrace>();
  r.config_echo = j.at("config").get<RunConfig>();
}

void to_json(json& j, const BaselineResult& r) {
  j = json{{"claim_id", r.claim_id},
           {"method", to_string(r.method)},
           {"label", to_string(r.label)},
           {"raw_outputs", r.raw_outputs},
           {"iterations", r.iterations},
           {"turns", r.transcript},
           {"judge_score", r.judge_score ? json{{"affirmative", r.judge_score->affirmative},
                                                {"negative", r.judge_score->negative}}
                                         : json(nullptr)}};
}

void from_json(const json& j, BaselineResult& r) {
  r.claim_id = j.at("claim_id").get<std::string>();
  r.method = parse_method(j.at("method").get<std::string>());
  r.label = parse_label(j.at("label").get<std::string>());
  r.raw_outputs = j.at("raw_outputs").get<std::vector<std::string>>();
  r.iterations = j.at("iterations").get<int>();
  r.transcript = j.value("turns", std::vector<Turn>{});
  r.judge_score.reset();
  if (j.contains("judge_score") && !j.at("judge_score").is_null()) {
    const auto& s = j.at("judge_score");
    r.judge_score = DimensionScore::make(Dimension::FACTUALITY, s.at("affirmative").get<int>(),
                                         s.at("negative").get<int>());
  }
}

void to_json(json& j, const MetricsReport& m) {
  j = json{{"accuracy", m.accuracy},
           {"precision", m.precision},
           {"recall", m.recall},
           {"f1", m.f1},
           {"confusion", {{"tp", m.confusion.tp}, {"fp", m.confusion.fp}, {"fn", m.confusion.fn}, {"tn", m.confusion.tn}}},
           {"positive_class", to_string(m.positive_class)},
           {"n_evaluated", m.n_evaluated},
           {"n_failed", m.n_failed}};
}

void from_json(const json& j, MetricsReport& m) {
  m.accuracy = j.at("accuracy").get<double>();
  m.precision = j.at("precision").get<double>();
  m.recall = j.at("recall").get<double>();
  m.f1 = j.at("f1").get<double>();
  const auto& c = j.at("confusion");
  m.confusion = Confusion{c.at("tp").get<long>(), c.at("fp").get<long>(), c.at("fn").get<long>(), c.at("tn").get<long>()};
  m.positive_class = parse_label(j.at("positive_class").get<std::string>());
  m.n_evaluated = j.at("n_evaluated").get<long>();
  m.n_failed = j.at("n_failed").get<long>();
}

void to_json(json& j, const PerturbationReport& r) {
  j = json{{"claim_id", r.claim_id},
           {"kind", to_string(r.kind)},
           {"original_aff_total", r.original_aff_total},
           {"perturbed_aff_total", r.perturbed_aff_total},
           {"delta", r.delta},
           {"verdict_consistent", r.verdict_consistent},
           {"bucket", to_string(r.bucket)},
           {"original_label", opt_label_json(r.original_label)},
           {"perturbed_label", opt_label_json(r.perturbed_label)},
           {"failure", opt_json(r.failure)}};
}

void from_json(const json& j, PerturbationReport& r) {
  r.claim_id = j.at("claim_id").get<std::string>();
  r.kind = parse_perturbation(j.at("kind").get<std::string>());
  r.original_aff_total = j.at("original_aff_total").get<int>();
  r.perturbed_aff_total = j.at("perturbed_aff_total").get<int>();
  r.delta = j.at("delta").get<int>();
  r.verdict_consistent = j.at("verdict_consistent").get<bool>();
  r.bucket = bucket_for(r.delta);
  r.original_label = opt_label(j, "original_label");
  r.perturbed_label = opt_label(j, "perturbed_label");
  r.failure = opt<std::string>(j, "failure");
}

void to_json(json& j, const SweepPoint& p) {
  j = json{{"rounds", p.rounds}, {"length_bin", to_string(p.length_bin)}, {"f1", p.f1}, {"n", p.n},
           {"n_failed", p.n_failed}};
}

void from_json(const json& j, SweepPoint& p) {
  p.rounds = j.at("rounds").get<int>();
  const auto bin = j.at("length_bin").get<std::string>();
  bool found = false;
  for (LengthBin b : kAllLengthBins) {
    if (to_string(b) == bin) {
      p.length_bin = b;
      found = true;
    }
  }
  if (!found) throw Error(ErrorCode::SCHEMA_ERROR, "unknown length bin " + bin);
  p.f1 = j.at("f1").get<double>();
  p.n = j.at("n").get<long>();
  p.n_failed = j.at("n_failed").get<long>();
}

void to_json(json& j, const ItemRecord& r) {
  j = json{{"claim_id", r.claim_id},
           {"gold", opt_label_json(r.gold)},
           {"predicted", opt_label_json(r.predicted)},
           {"debate", opt_json(r.debate)},
           {"baseline", opt_json(r.baseline)},
           {"failure", r.failure ? json{{"code", to_string(r.failure->code)},
                                        {"message", r.failure->message},
                                        {"partial_transcript", r.failure->partial_transcript}}
                                 : json(nullptr)}};
}

void from_json(const json& j, ItemRecord& r) {
  r.claim_id = j.at("claim_id").get<std::string>();
  r.gold = opt_label(j, "gold");
  r.predicted = opt_label(j, "predicted");
  r.debate = opt<DebateResult>(j, "debate");
  r.baseline = opt<BaselineResult>(j, "baseline");
  r.failure.reset();
  if (j.contains("failure") && !j.at("failure").is_null()) {
    const auto& f = j.at("failure");
    ItemFailure failure;
    const auto code = f.at("code").get<std::string>();
    for (int c = 0; c <= static_cast<int>(ErrorCode::MISSING_GOLD); ++c) {
      if (to_string(static_cast<ErrorCode>(c)) == code) failure.code = static_cast<ErrorCode>(c);
    }
    failure.message = f.at("message").get<std::string>();
    failure.partial_transcript = f.at("partial_transcript").get<std::vector<Turn>>();
    r.failure = std::move(failure);
  }
}

void write_run_record(const std::string& dir, const RunRecord& record) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IO_ERROR, "cannot create " + dir + ": " + ec.message());

  write_file(fs::path(dir) / "config.json", json{{"method", record.method}, {"config", record.config}}.dump(2) + "\n");
  std::string lines;
  for (const auto& item : record.items) lines += json(item).dump() + "\n";
  write_file(fs::path(dir) / "results.jsonl", lines);
  write_file(fs::path(dir) / "metrics.json", json(record.metrics).dump(2) + "\n");
  write_file(fs::path(dir) / "run_info.json", json{{"backend_calls", record.counters.backend_calls},
                                                   {"cache_hits", record.counters.cache_hits},
                                                   {"wall_seconds", record.counters.wall_seconds},
                                                   {"started_at", record.counters.started_at}}
                                                      .dump(2) + "\n");
}

RunRecord read_run_record(const std::string& dir) {
  namespace fs = std::filesystem;
  RunRecord record;
  const auto cfg = read_json_file(fs::path(dir) / "config.json");
  record.method = cfg.at("method").get<std::string>();
  record.config = cfg.at("config").get<RunConfig>();

  const auto results_path = fs::path(dir) / "results.jsonl";
  std::ifstream in(results_path);
  if (!in) throw Error(ErrorCode::IO_ERROR, "cannot open " + results_path.string());
  std::string line;
  for (size_t n = 1; std::getline(in, line); ++n) {
    if (line.empty()) continue;
    try {
      record.items.push_back(json::parse(line).get<ItemRecord>());
    } catch (const json::exception& e) {
      throw Error(ErrorCode::SCHEMA_ERROR, results_path.string() + ":" + std::to_string(n) + ": " + e.what());
    }
  }

  record.metrics = read_json_file(fs::path(dir) / "metrics.json").get<MetricsReport>();
  if (fs::exists(fs::path(dir) / "run_info.json")) {
    const auto info = read_json_file(fs::path(dir) / "run_info.json");
    record.counters.backend_calls = info.value("backend_calls", 0L);
    record.counters.cache_hits = info.value("cache_hits", 0L);
    record.counters.wall_seconds = info.value("wall_seconds", 0.0);
    record.counters.started_at = info.value("started_at", std::string());
  }
  return record;
}

RunConfig load_run_config(const std::string& path) {
  const auto j = read_json_file(path);
  RunConfig c;
  try {
    c = j.get<RunConfig>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SCHEMA_ERROR, path + ": " + e.what());
  }
  c.validate();
  return c;
}

}  // namespace d2d

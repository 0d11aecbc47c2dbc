#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "d2d/backend.hpp"
#include "d2d/baselines.hpp"
#include "d2d/dataset.hpp"
#include "d2d/engine.hpp"
#include "d2d/experiments.hpp"
#include "d2d/metrics.hpp"

namespace d2d {

using json = nlohmann::json;

// JSON mappings for the persisted types. from_json is lenient for RunConfig:
// absent keys keep their defaults, so partial config files work.
void to_json(json& j, const RunConfig& c);
void from_json(const json& j, RunConfig& c);
void to_json(json& j, const Turn& t);
void from_json(const json& j, Turn& t);
void to_json(json& j, const AgentProfile& p);
void from_json(const json& j, AgentProfile& p);
void to_json(json& j, const Roster& r);
void from_json(const json& j, Roster& r);
void to_json(json& j, const JudgmentTrace& t);
void from_json(const json& j, JudgmentTrace& t);
void to_json(json& j, const DebateResult& r);
void from_json(const json& j, DebateResult& r);
void to_json(json& j, const BaselineResult& r);
void from_json(const json& j, BaselineResult& r);
void to_json(json& j, const MetricsReport& m);
void from_json(const json& j, MetricsReport& m);
void to_json(json& j, const PerturbationReport& r);
void from_json(const json& j, PerturbationReport& r);
void to_json(json& j, const SweepPoint& p);
void from_json(const json& j, SweepPoint& p);

/// Backend settings read from the "backend" section of a config file.
void from_json(const json& j, HttpBackendOptions& o);

struct ItemFailure {
  ErrorCode code = ErrorCode::ITEM_FAILED;
  std::string message;
  std::vector<Turn> partial_transcript;

  bool operator==(const ItemFailure&) const = default;
};

struct ItemRecord {
  std::string claim_id;
  std::optional<Label> gold;
  std::optional<Label> predicted;
  std::optional<DebateResult> debate;
  std::optional<BaselineResult> baseline;
  std::optional<ItemFailure> failure;

  bool operator==(const ItemRecord&) const = default;
};

void to_json(json& j, const ItemRecord& r);
void from_json(const json& j, ItemRecord& r);

struct RunCounters {
  long backend_calls = 0;
  long cache_hits = 0;
  double wall_seconds = 0.0;
  std::string started_at;

  bool operator==(const RunCounters&) const = default;
};

/// One method over one dataset. "method" is "D2D" or a baseline name.
struct RunRecord {
  std::string method = "D2D";
  RunConfig config;
  std::vector<ItemRecord> items;  // sorted by claim id
  MetricsReport metrics;
  RunCounters counters;

  bool operator==(const RunRecord&) const = default;
};

/// Writes config.json, results.jsonl (one item per line) and metrics.json,
/// which depend only on the inputs, plus run_info.json with timings.
void write_run_record(const std::string& dir, const RunRecord& record);
RunRecord read_run_record(const std::string& dir);

/// Loads a config file (JSON). Missing keys keep their defaults.
RunConfig load_run_config(const std::string& path);

}  // namespace d2d

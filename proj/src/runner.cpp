#include "d2d/runner.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>

#include "d2d/parallel.hpp"

namespace d2d {

namespace {

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

MethodSpec MethodSpec::parse(std::string_view s) {
  std::string u(s);
  for (auto& c : u) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (u == "D2D") return MethodSpec{};
  return MethodSpec{parse_method(u)};
}

MetricsReport recompute_metrics(const RunRecord& record, Label positive_class) {
  std::vector<Prediction> preds;
  long failed = 0;
  for (const auto& item : record.items) {
    if (!item.predicted) {
      ++failed;
      continue;
    }
    if (!item.gold) continue;
    preds.push_back({item.claim_id, *item.predicted, item.gold});
  }
  return compute_metrics(preds, positive_class, failed);
}

RunRecord run_dataset(Backend& backend, const PromptRegistry& prompts, const Dataset& dataset,
                      const RunConfig& config, const MethodSpec& method) {
  config.validate();
  const auto started = std::chrono::steady_clock::now();
  CountingBackend counting(backend);

  RunRecord record;
  record.method = method.name();
  record.config = config;
  record.counters.started_at = utc_now();

  const DebateEngine engine(counting, prompts, config);
  const Baselines baselines(counting, prompts, config);

  std::vector<ItemRecord> items(dataset.items.size());
  parallel_for(items.size(), config.parallelism, [&](size_t i) {
    const auto& claim = dataset.items[i];
    auto& item = items[i];
    item.claim_id = claim.id;
    item.gold = claim.gold_label;
    try {
      if (method.baseline) {
        item.baseline = baselines.run(*method.baseline, claim);
        item.predicted = item.baseline->label;
      } else {
        item.debate = engine.run_debate(claim);
        item.predicted = item.debate->verdict.label;
      }
    } catch (const ItemFailed& e) {
      item.failure = ItemFailure{e.cause, e.what(), e.partial_transcript};
    } catch (const Error& e) {
      item.failure = ItemFailure{e.code, e.what(), {}};
    } catch (const std::exception& e) {
      item.failure = ItemFailure{ErrorCode::ITEM_FAILED, e.what(), {}};
    }
  });

  std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) { return a.claim_id < b.claim_id; });
  record.items = std::move(items);
  record.metrics = recompute_metrics(record, config.positive_class);
  record.counters.backend_calls = counting.calls();
  record.counters.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return record;
}

}  // namespace d2d

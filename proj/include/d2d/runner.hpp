#pragma once

#include <optional>
#include <string>

#include "d2d/record.hpp"

namespace d2d {

/// Which pipeline a dataset run uses: the debate or one of the baselines.
struct MethodSpec {
  std::optional<Method> baseline;  // nullopt = D2D

  std::string name() const { return baseline ? std::string(to_string(*baseline)) : "D2D"; }
  static MethodSpec parse(std::string_view s);
};

/// Runs every item with up to config.parallelism workers. Failed items are
/// recorded with their error and partial transcript, never dropped. Items come
/// back sorted by id and metrics cover the items that completed with a gold label.
RunRecord run_dataset(Backend& backend, const PromptRegistry& prompts, const Dataset& dataset,
                      const RunConfig& config, const MethodSpec& method);

/// Recomputes metrics from stored item predictions.
MetricsReport recompute_metrics(const RunRecord& record, Label positive_class);

}  // namespace d2d

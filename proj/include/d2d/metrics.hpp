#pragma once

#include <optional>
#include <string>
#include <vector>

#include "d2d/core.hpp"

namespace d2d {

struct Prediction {
  std::string claim_id;
  Label predicted = Label::FAKE;
  std::optional<Label> gold;
};

struct Confusion {
  long tp = 0, fp = 0, fn = 0, tn = 0;

  long total() const { return tp + fp + fn + tn; }
  bool operator==(const Confusion&) const = default;
};

struct MetricsReport {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  Confusion confusion;
  Label positive_class = Label::FAKE;
  long n_evaluated = 0;
  long n_failed = 0;

  bool operator==(const MetricsReport&) const = default;
};

/// Accuracy, precision, recall and F1 with positive_class as the positive label.
/// Zero denominators yield 0. Throws MISSING_GOLD listing ids without a gold label.
MetricsReport compute_metrics(const std::vector<Prediction>& results, Label positive_class, long n_failed = 0);

MetricsReport metrics_from_confusion(const Confusion& c, Label positive_class, long n_failed = 0);

}  // namespace d2d

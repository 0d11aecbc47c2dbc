#include "d2d/metrics.hpp"

namespace d2d {

namespace {

double ratio(long num, long den) { return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den); }

}  // namespace

MetricsReport metrics_from_confusion(const Confusion& c, Label positive_class, long n_failed) {
  MetricsReport m;
  m.confusion = c;
  m.positive_class = positive_class;
  m.n_evaluated = c.total();
  m.n_failed = n_failed;
  m.accuracy = ratio(c.tp + c.tn, c.total());
  m.precision = ratio(c.tp, c.tp + c.fp);
  m.recall = ratio(c.tp, c.tp + c.fn);
  m.f1 = m.precision + m.recall > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
  return m;
}

MetricsReport compute_metrics(const std::vector<Prediction>& results, Label positive_class, long n_failed) {
  std::string missing;
  Confusion c;
  for (const auto& r : results) {
    if (!r.gold) {
      missing += (missing.empty() ? "" : ", ") + r.claim_id;
      continue;
    }
    const bool pred_pos = r.predicted == positive_class;
    const bool gold_pos = *r.gold == positive_class;
    if (pred_pos && gold_pos) ++c.tp;
    else if (pred_pos) ++c.fp;
    else if (gold_pos) ++c.fn;
    else ++c.tn;
  }
  if (!missing.empty()) throw Error(ErrorCode::MISSING_GOLD, "items without gold label: " + missing);
  return metrics_from_confusion(c, positive_class, n_failed);
}

}  // namespace d2d

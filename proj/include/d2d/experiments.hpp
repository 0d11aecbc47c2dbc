#pragma once

#include <optional>
#include <string>
#include <vector>

#include "d2d/engine.hpp"
#include "d2d/metrics.hpp"

namespace d2d {

enum class Perturbation { ORDER, RELABEL };
std::string_view to_string(Perturbation p);
Perturbation parse_perturbation(std::string_view s);

enum class ConsistencyBucket { STRONG, MODERATE, LARGE };
std::string_view to_string(ConsistencyBucket b);

/// STRONG for delta <= 5, MODERATE for 5 < delta <= 10, LARGE above.
ConsistencyBucket bucket_for(int delta);

struct PerturbationReport {
  std::string claim_id;
  Perturbation kind = Perturbation::ORDER;
  int original_aff_total = 0;
  int perturbed_aff_total = 0;
  int delta = 0;
  bool verdict_consistent = true;
  ConsistencyBucket bucket = ConsistencyBucket::STRONG;
  std::optional<Label> original_label;
  std::optional<Label> perturbed_label;
  std::optional<std::string> failure;  // set when either run failed; totals are then meaningless

  bool failed() const { return failure.has_value(); }
  bool operator==(const PerturbationReport&) const = default;
};

/// Builds a report from the Affirmative totals and labels of the two runs.
PerturbationReport make_perturbation_report(std::string claim_id, Perturbation kind, int original_aff_total,
                                            Label original_label, int perturbed_aff_total, Label perturbed_label);

/// Returns config with the flag for `kind` flipped.
RunConfig perturb_config(const RunConfig& config, Perturbation kind);

/// Debates the claim as configured, then again with one flag flipped, reusing
/// the first run's domain and roster. Failures land in report.failure.
/// Precondition: neither perturbation flag is set in config.
PerturbationReport run_perturbation(Backend& backend, const PromptRegistry& prompts, const Claim& claim,
                                    const RunConfig& config, Perturbation kind,
                                    DebateResult* original_out = nullptr, DebateResult* perturbed_out = nullptr);

/// Same config with `model` serving `stage`. JUDGEMENT covers the synopsis and
/// every scoring call.
RunConfig substitute_stage_model(const RunConfig& config, Stage stage, const std::string& model);

enum class LengthBin { W0_100, W100_200, W200_300, W300_400 };
inline constexpr std::array<LengthBin, 4> kAllLengthBins = {LengthBin::W0_100, LengthBin::W100_200,
                                                            LengthBin::W200_300, LengthBin::W300_400};
std::string_view to_string(LengthBin b);  // "0-100", ...

/// Half-open [lo, hi) bins; nullopt at 400 words and above.
std::optional<LengthBin> length_bin_for(int word_count);

struct SweepPoint {
  int rounds = 4;
  LengthBin length_bin = LengthBin::W0_100;
  double f1 = 0.0;
  long n = 0;
  long n_failed = 0;

  bool operator==(const SweepPoint&) const = default;
};

struct SweepOptions {
  std::vector<int> rounds = {1, 2, 3, 4, 5, 6};
};

/// F1 per (length bin, rounds) cell. Items of 400+ words and failed debates are
/// left out; empty cells are not reported.
std::vector<SweepPoint> sweep_rounds(Backend& backend, const PromptRegistry& prompts, const std::vector<Claim>& items,
                                     const RunConfig& config, const SweepOptions& options = {});

}  // namespace d2d

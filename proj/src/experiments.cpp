#include "d2d/experiments.hpp"

#include <cstdlib>
#include <iostream>
#include <map>

#include "d2d/parallel.hpp"

namespace d2d {

std::string_view to_string(Perturbation p) { return p == Perturbation::ORDER ? "ORDER" : "RELABEL"; }

Perturbation parse_perturbation(std::string_view s) {
  std::string u(s);
  for (auto& c : u) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (u == "ORDER") return Perturbation::ORDER;
  if (u == "RELABEL") return Perturbation::RELABEL;
  throw Error(ErrorCode::INVALID_ARGUMENT, "unknown perturbation '" + std::string(s) + "'");
}

std::string_view to_string(ConsistencyBucket b) {
  switch (b) {
    case ConsistencyBucket::STRONG: return "STRONG";
    case ConsistencyBucket::MODERATE: return "MODERATE";
    case ConsistencyBucket::LARGE: return "LARGE";
  }
  return "?";
}

ConsistencyBucket bucket_for(int delta) {
  if (delta <= 5) return ConsistencyBucket::STRONG;
  if (delta <= 10) return ConsistencyBucket::MODERATE;
  return ConsistencyBucket::LARGE;
}

PerturbationReport make_perturbation_report(std::string claim_id, Perturbation kind, int original_aff_total,
                                            Label original_label, int perturbed_aff_total, Label perturbed_label) {
  PerturbationReport r;
  r.claim_id = std::move(claim_id);
  r.kind = kind;
  r.original_aff_total = original_aff_total;
  r.perturbed_aff_total = perturbed_aff_total;
  r.delta = std::abs(original_aff_total - perturbed_aff_total);
  r.bucket = bucket_for(r.delta);
  r.original_label = original_label;
  r.perturbed_label = perturbed_label;
  r.verdict_consistent = original_label == perturbed_label;
  return r;
}

RunConfig perturb_config(const RunConfig& config, Perturbation kind) {
  auto out = config;
  if (kind == Perturbation::ORDER) out.order_reversed = !out.order_reversed;
  else out.neutral_labels = !out.neutral_labels;
  return out;
}

PerturbationReport run_perturbation(Backend& backend, const PromptRegistry& prompts, const Claim& claim,
                                    const RunConfig& config, Perturbation kind, DebateResult* original_out,
                                    DebateResult* perturbed_out) {
  if (config.order_reversed || config.neutral_labels) {
    throw Error(ErrorCode::PRECONDITION, "perturbation runs start from the unperturbed configuration");
  }
  PerturbationReport failed;
  failed.claim_id = claim.id;
  failed.kind = kind;
  failed.verdict_consistent = false;

  DebateResult original;
  try {
    original = DebateEngine(backend, prompts, config).run_debate(claim);
  } catch (const Error& e) {
    failed.failure = std::string("original run: ") + e.what();
    return failed;
  }
  failed.original_aff_total = original.verdict.sheet.affirmative_total;
  failed.original_label = original.verdict.label;

  DebateResult perturbed;
  try {
    perturbed = DebateEngine(backend, prompts, perturb_config(config, kind)).run_debate(claim, original.domain,
                                                                                        original.roster);
  } catch (const Error& e) {
    failed.failure = std::string("perturbed run: ") + e.what();
    if (original_out) *original_out = std::move(original);
    return failed;
  }

  auto report = make_perturbation_report(claim.id, kind, original.verdict.sheet.affirmative_total,
                                         original.verdict.label, perturbed.verdict.sheet.affirmative_total,
                                         perturbed.verdict.label);
  if (original_out) *original_out = std::move(original);
  if (perturbed_out) *perturbed_out = std::move(perturbed);
  return report;
}

RunConfig substitute_stage_model(const RunConfig& config, Stage stage, const std::string& model) {
  auto out = config;
  if (model == config.models.default_model) {
    out.models.stage.erase(stage);
  } else {
    out.models.stage[stage] = model;
  }
  return out;
}

std::string_view to_string(LengthBin b) {
  switch (b) {
    case LengthBin::W0_100: return "0-100";
    case LengthBin::W100_200: return "100-200";
    case LengthBin::W200_300: return "200-300";
    case LengthBin::W300_400: return "300-400";
  }
  return "?";
}

std::optional<LengthBin> length_bin_for(int word_count) {
  if (word_count < 0 || word_count >= 400) return std::nullopt;
  return kAllLengthBins[static_cast<size_t>(word_count / 100)];
}

std::vector<SweepPoint> sweep_rounds(Backend& backend, const PromptRegistry& prompts, const std::vector<Claim>& items,
                                     const RunConfig& config, const SweepOptions& options) {
  std::map<LengthBin, std::vector<const Claim*>> bins;
  long out_of_range = 0;
  for (const auto& item : items) {
    if (!item.gold_label) throw Error(ErrorCode::MISSING_GOLD, "sweep item '" + item.id + "' has no gold label");
    if (auto bin = length_bin_for(item.word_count)) bins[*bin].push_back(&item);
    else ++out_of_range;
  }
  if (out_of_range > 0) std::cerr << "sweep-rounds: " << out_of_range << " item(s) of 400+ words skipped\n";

  std::vector<SweepPoint> points;
  for (const auto& [bin, members] : bins) {
    for (int rounds : options.rounds) {
      auto cfg = config;
      cfg.rounds = rounds;
      DebateEngine engine(backend, prompts, cfg);

      std::vector<std::optional<Label>> predicted(members.size());
      parallel_for(members.size(), cfg.parallelism, [&](size_t i) {
        try {
          predicted[i] = engine.run_debate(*members[i]).verdict.label;
        } catch (const Error&) {
        }
      });

      std::vector<Prediction> preds;
      long failed = 0;
      for (size_t i = 0; i < members.size(); ++i) {
        if (predicted[i]) preds.push_back({members[i]->id, *predicted[i], members[i]->gold_label});
        else ++failed;
      }
      if (failed > 0) {
        std::cerr << "sweep-rounds: bin " << to_string(bin) << " rounds " << rounds << ": " << failed
                  << " failed item(s) excluded\n";
      }
      if (preds.empty()) continue;
      const auto m = compute_metrics(preds, cfg.positive_class, failed);
      points.push_back(SweepPoint{rounds, bin, m.f1, m.n_evaluated, failed});
    }
  }
  return points;
}

}  // namespace d2d

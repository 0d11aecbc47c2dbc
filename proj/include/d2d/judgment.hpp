#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "d2d/agents.hpp"
#include "d2d/backend.hpp"
#include "d2d/prompts.hpp"

namespace d2d {

struct RawScorePair {
  double affirmative_raw = 0.0;
  double negative_raw = 0.0;
  std::string source_text;

  bool operator==(const RawScorePair&) const = default;
};

/// Extracts the first brace-delimited object carrying both side scores.
/// Keys may be bare or quoted and are matched case-insensitively; both
/// {Affirmative, Negative} and {Supporter, Skeptic} are accepted, so a judge that
/// answers in the "wrong" vocabulary after relabeling still parses.
/// Throws UNPARSEABLE.
RawScorePair parse_scores(const std::string& text, bool neutral_labels);

struct RepairedScore {
  DimensionScore score;
  bool repair_applied = false;
};

/// Projects a raw pair onto the 7-point simplex: a' = clamp(round(7a/(a+b)), 0, 7).
/// Throws IRREPARABLE for non-finite values or a non-positive sum.
RepairedScore repair_scores(Dimension dim, const RawScorePair& raw);

struct DimensionTrace {
  RawScorePair raw;
  DimensionScore score;
  bool repair_applied = false;
  int retries_used = 0;

  bool operator==(const DimensionTrace&) const = default;
};

struct JudgmentTrace {
  std::string synopsis;
  std::map<Dimension, DimensionTrace> per_dimension;

  bool operator==(const JudgmentTrace&) const = default;
};

/// Runs the two-step judgment: neutral synopsis, then per-dimension zero-sum
/// scoring. All calls use the JUDGEMENT model at judge temperature.
class Judge {
 public:
  Judge(Backend& backend, const PromptRegistry& prompts, const RunConfig& config)
      : backend_(backend), prompts_(prompts), config_(config) {}

  /// Precondition: the transcript holds every planned turn (2 per round).
  std::string synthesize(const std::string& memory_digest, const Roster& roster,
                         const std::vector<Turn>& transcript) const;

  /// Re-queries on an unusable reply up to retry_cap times, feeding the bad
  /// reply back as conversation context. Throws DIMENSION_FAILED afterwards.
  DimensionTrace score_dimension(Dimension dim, const std::string& memory_digest,
                                 const std::string& synopsis, const AgentProfile& judge,
                                 int retry_cap) const;

  /// FULL-style variants: synopsis, five concurrent dimension scores, aggregate.
  /// NO_MULTI_JUDGE: a single FACTUALITY score and no synopsis.
  std::pair<Verdict, JudgmentTrace> judge_debate(const std::string& memory_digest, const Roster& roster,
                                                 const std::vector<Turn>& transcript) const;

 private:
  Backend& backend_;
  const PromptRegistry& prompts_;
  const RunConfig& config_;
};

/// Scores-only parse-and-repair loop shared with the single-judge baseline.
DimensionTrace query_score(Backend& backend, ChatRequest request, Dimension dim, bool neutral_labels,
                           int retry_cap);

}  // namespace d2d

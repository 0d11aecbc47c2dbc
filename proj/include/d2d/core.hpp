#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace d2d {

enum class ErrorCode {
  OUT_OF_RANGE,
  INVALID_SHEET,
  INVALID_ARGUMENT,
  BACKEND_UNAVAILABLE,
  NO_SCRIPT_MATCH,
  AUTH_ERROR,
  MISSING_PLACEHOLDER,
  UNKNOWN_ID,
  UNPARSEABLE,
  IRREPARABLE,
  DIMENSION_FAILED,
  LABEL_UNPARSEABLE,
  ITEM_FAILED,
  PRECONDITION,
  IO_ERROR,
  SCHEMA_ERROR,
  MISSING_GOLD,
};

std::string_view to_string(ErrorCode code);

struct Error : public std::runtime_error {
  ErrorCode code;
  Error(ErrorCode code_, const std::string& message)
      : std::runtime_error(std::string(to_string(code_)) + ": " + message), code(code_) {}
};

enum class Label { REAL, FAKE };

enum class Stance { AFFIRMATIVE_REAL, NEGATIVE_FAKE };

enum class Stage { OPENING, REBUTTAL, FREE_DEBATE, CLOSING, JUDGEMENT };

enum class Dimension { FACTUALITY, SOURCE_RELIABILITY, REASONING_QUALITY, CLARITY, ETHICS };

inline constexpr std::array<Dimension, 5> kAllDimensions = {
    Dimension::FACTUALITY, Dimension::SOURCE_RELIABILITY, Dimension::REASONING_QUALITY,
    Dimension::CLARITY, Dimension::ETHICS};

inline constexpr std::array<Stage, 4> kSpeakingStages = {Stage::OPENING, Stage::REBUTTAL,
                                                         Stage::FREE_DEBATE, Stage::CLOSING};

inline constexpr std::array<Stance, 2> kStances = {Stance::AFFIRMATIVE_REAL, Stance::NEGATIVE_FAKE};

inline constexpr int kPointsPerDimension = 7;

// Enum names as used in files and on the command line ("OPENING", "FAKE", ...).
std::string_view to_string(Label v);
std::string_view to_string(Stance v);
std::string_view to_string(Stage v);
std::string_view to_string(Dimension v);

Label parse_label(std::string_view s);  // case-insensitive, throws INVALID_ARGUMENT
Stance parse_stance(std::string_view s);
Stage parse_stage(std::string_view s);
Dimension parse_dimension(std::string_view s);  // also accepts the "Accuracy" synonym

// Human-facing names that go into prompts.
std::string_view display_name(Stage v);      // "Opening Statement"
std::string_view display_name(Dimension v);  // "Source Reliability"

inline Label verdict_of(Stance s) { return s == Stance::AFFIRMATIVE_REAL ? Label::REAL : Label::FAKE; }
inline Stance opponent(Stance s) {
  return s == Stance::AFFIRMATIVE_REAL ? Stance::NEGATIVE_FAKE : Stance::AFFIRMATIVE_REAL;
}

/// Whitespace token count. A single token containing CJK characters is
/// counted per code point instead, so unsegmented Chinese text gets a
/// meaningful length.
int count_words(std::string_view text);

struct Claim {
  std::string id;
  std::string text;
  std::optional<Label> gold_label;
  int word_count = 0;

  /// Validates nonempty text and derives word_count.
  static Claim make(std::string id, std::string text, std::optional<Label> gold = std::nullopt);

  bool operator==(const Claim&) const = default;
};

struct RoundPlan {
  int rounds = 0;
  std::vector<Stage> stages;

  bool operator==(const RoundPlan&) const = default;
};

/// Stage list for 1..6 rounds:
///   1 Opening | 2 +Closing | 3 +Rebuttal | 4 +Free Debate | 5,6 extra Free Debate rounds.
RoundPlan plan_rounds(int rounds);

struct Turn {
  int index = 0;
  Stage stage = Stage::OPENING;
  Stance side = Stance::AFFIRMATIVE_REAL;
  std::string agent_id;
  std::string content;
  std::string memory_digest_used;

  bool operator==(const Turn&) const = default;
};

struct DimensionScore {
  Dimension dimension = Dimension::FACTUALITY;
  int affirmative = 0;
  int negative = 0;

  /// Throws INVALID_SHEET unless both sides are in [0,7] and sum to 7.
  static DimensionScore make(Dimension dim, int affirmative, int negative);

  bool operator==(const DimensionScore&) const = default;
};

struct ScoreSheet {
  std::vector<DimensionScore> entries;
  int affirmative_total = 0;
  int negative_total = 0;

  bool operator==(const ScoreSheet&) const = default;
};

struct Verdict {
  Label label = Label::FAKE;
  ScoreSheet sheet;
  std::string synopsis;

  bool operator==(const Verdict&) const = default;
};

/// Sums per-side totals over 5 (or 1) zero-sum entries. The grand total is odd,
/// so the label is never a tie: REAL iff the Affirmative total is larger.
Verdict aggregate_verdict(const std::vector<DimensionScore>& entries, std::string synopsis);

enum class Variant { FULL, NO_DOMAIN_PROFILE, NO_STAGE_DESIGN, NO_MULTI_JUDGE };

inline constexpr std::array<Variant, 4> kAllVariants = {Variant::FULL, Variant::NO_DOMAIN_PROFILE,
                                                        Variant::NO_STAGE_DESIGN, Variant::NO_MULTI_JUDGE};

std::string_view to_string(Variant v);
Variant parse_variant(std::string_view s);

struct Temperatures {
  double domain = 0.0;
  double debate = 0.7;
  double judge = 0.2;

  bool operator==(const Temperatures&) const = default;
};

struct ModelMap {
  std::string default_model = "gpt-4o";
  std::map<Stage, std::string> stage;  // overrides; JUDGEMENT covers synopsis and scoring
  std::string domain;                  // empty = default_model
  std::string profile;
  std::string memory;

  const std::string& for_stage(Stage s) const;
  const std::string& for_domain() const { return domain.empty() ? default_model : domain; }
  const std::string& for_profile() const { return profile.empty() ? default_model : profile; }
  const std::string& for_memory() const { return memory.empty() ? default_model : memory; }

  bool operator==(const ModelMap&) const = default;
};

struct RunConfig {
  int rounds = 4;
  Variant variant = Variant::FULL;
  ModelMap models;
  Temperatures temperatures;
  bool order_reversed = false;
  bool neutral_labels = false;
  Label positive_class = Label::FAKE;
  int parallelism = 1;
  std::optional<std::string> cache_path;

  // Knobs without a counterpart in the published protocol.
  bool compress_per_stage = false;     // compress once per stage instead of before every turn
  bool synopsis_to_scorers = true;     // append the neutral synopsis to scoring prompts
  int score_retry_cap = 2;
  int self_reflect_max_iters = 3;
  double drop_longest_fraction = 0.05;

  /// Throws INVALID_ARGUMENT on out-of-range fields.
  void validate() const;

  /// Round plan actually executed. NO_STAGE_DESIGN always runs four undifferentiated rounds.
  int effective_rounds() const { return variant == Variant::NO_STAGE_DESIGN ? 4 : rounds; }

  bool operator==(const RunConfig&) const = default;
};

}  // namespace d2d

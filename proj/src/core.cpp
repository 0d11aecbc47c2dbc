#include "d2d/core.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace d2d {

namespace {

std::string upper(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  std::replace(out.begin(), out.end(), '-', '_');
  std::replace(out.begin(), out.end(), ' ', '_');
  return out;
}

// Decodes one UTF-8 sequence starting at s[i]; malformed bytes decode as themselves.
char32_t next_code_point(std::string_view s, size_t& i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  int len = 1;
  char32_t cp = b0;
  if (b0 >= 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else if (b0 >= 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if (b0 >= 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  }
  if (i + len > s.size()) {
    ++i;
    return b0;
  }
  for (int k = 1; k < len; ++k) cp = (cp << 6) | (static_cast<unsigned char>(s[i + k]) & 0x3F);
  i += len;
  return cp;
}

bool is_cjk(char32_t cp) {
  return (cp >= 0x3000 && cp <= 0x303F) || (cp >= 0x3400 && cp <= 0x4DBF) ||
         (cp >= 0x4E00 && cp <= 0x9FFF) || (cp >= 0xF900 && cp <= 0xFAFF) ||
         (cp >= 0xFF00 && cp <= 0xFFEF) || (cp >= 0x20000 && cp <= 0x2FA1F);
}

}  // namespace

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::OUT_OF_RANGE: return "OUT_OF_RANGE";
    case ErrorCode::INVALID_SHEET: return "INVALID_SHEET";
    case ErrorCode::INVALID_ARGUMENT: return "INVALID_ARGUMENT";
    case ErrorCode::BACKEND_UNAVAILABLE: return "BACKEND_UNAVAILABLE";
    case ErrorCode::NO_SCRIPT_MATCH: return "NO_SCRIPT_MATCH";
    case ErrorCode::AUTH_ERROR: return "AUTH_ERROR";
    case ErrorCode::MISSING_PLACEHOLDER: return "MISSING_PLACEHOLDER";
    case ErrorCode::UNKNOWN_ID: return "UNKNOWN_ID";
    case ErrorCode::UNPARSEABLE: return "UNPARSEABLE";
    case ErrorCode::IRREPARABLE: return "IRREPARABLE";
    case ErrorCode::DIMENSION_FAILED: return "DIMENSION_FAILED";
    case ErrorCode::LABEL_UNPARSEABLE: return "LABEL_UNPARSEABLE";
    case ErrorCode::ITEM_FAILED: return "ITEM_FAILED";
    case ErrorCode::PRECONDITION: return "PRECONDITION";
    case ErrorCode::IO_ERROR: return "IO_ERROR";
    case ErrorCode::SCHEMA_ERROR: return "SCHEMA_ERROR";
    case ErrorCode::MISSING_GOLD: return "MISSING_GOLD";
  }
  return "UNKNOWN";
}

std::string_view to_string(Label v) { return v == Label::REAL ? "REAL" : "FAKE"; }

std::string_view to_string(Stance v) {
  return v == Stance::AFFIRMATIVE_REAL ? "AFFIRMATIVE_REAL" : "NEGATIVE_FAKE";
}

std::string_view to_string(Stage v) {
  switch (v) {
    case Stage::OPENING: return "OPENING";
    case Stage::REBUTTAL: return "REBUTTAL";
    case Stage::FREE_DEBATE: return "FREE_DEBATE";
    case Stage::CLOSING: return "CLOSING";
    case Stage::JUDGEMENT: return "JUDGEMENT";
  }
  return "?";
}

std::string_view to_string(Dimension v) {
  switch (v) {
    case Dimension::FACTUALITY: return "FACTUALITY";
    case Dimension::SOURCE_RELIABILITY: return "SOURCE_RELIABILITY";
    case Dimension::REASONING_QUALITY: return "REASONING_QUALITY";
    case Dimension::CLARITY: return "CLARITY";
    case Dimension::ETHICS: return "ETHICS";
  }
  return "?";
}

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::FULL: return "FULL";
    case Variant::NO_DOMAIN_PROFILE: return "NO_DOMAIN_PROFILE";
    case Variant::NO_STAGE_DESIGN: return "NO_STAGE_DESIGN";
    case Variant::NO_MULTI_JUDGE: return "NO_MULTI_JUDGE";
  }
  return "?";
}

Label parse_label(std::string_view s) {
  const auto u = upper(s);
  if (u == "REAL") return Label::REAL;
  if (u == "FAKE") return Label::FAKE;
  throw Error(ErrorCode::INVALID_ARGUMENT, "unknown label '" + std::string(s) + "'");
}

Stance parse_stance(std::string_view s) {
  const auto u = upper(s);
  if (u == "AFFIRMATIVE_REAL" || u == "AFFIRMATIVE") return Stance::AFFIRMATIVE_REAL;
  if (u == "NEGATIVE_FAKE" || u == "NEGATIVE") return Stance::NEGATIVE_FAKE;
  throw Error(ErrorCode::INVALID_ARGUMENT, "unknown stance '" + std::string(s) + "'");
}

Stage parse_stage(std::string_view s) {
  const auto u = upper(s);
  for (Stage st : {Stage::OPENING, Stage::REBUTTAL, Stage::FREE_DEBATE, Stage::CLOSING, Stage::JUDGEMENT}) {
    if (u == to_string(st)) return st;
  }
  if (u == "FREE") return Stage::FREE_DEBATE;
  if (u == "JUDGMENT") return Stage::JUDGEMENT;
  throw Error(ErrorCode::INVALID_ARGUMENT, "unknown stage '" + std::string(s) + "'");
}

Dimension parse_dimension(std::string_view s) {
  const auto u = upper(s);
  for (Dimension d : kAllDimensions) {
    if (u == to_string(d)) return d;
  }
  if (u == "ACCURACY") return Dimension::FACTUALITY;
  if (u == "REASONING") return Dimension::REASONING_QUALITY;
  throw Error(ErrorCode::INVALID_ARGUMENT, "unknown dimension '" + std::string(s) + "'");
}

Variant parse_variant(std::string_view s) {
  const auto u = upper(s);
  for (Variant v : kAllVariants) {
    if (u == to_string(v)) return v;
  }
  if (u == "NO_DP") return Variant::NO_DOMAIN_PROFILE;
  if (u == "NO_SD") return Variant::NO_STAGE_DESIGN;
  if (u == "NO_MJ") return Variant::NO_MULTI_JUDGE;
  throw Error(ErrorCode::INVALID_ARGUMENT, "unknown variant '" + std::string(s) + "'");
}

std::string_view display_name(Stage v) {
  switch (v) {
    case Stage::OPENING: return "Opening Statement";
    case Stage::REBUTTAL: return "Rebuttal";
    case Stage::FREE_DEBATE: return "Free Debate";
    case Stage::CLOSING: return "Closing Statement";
    case Stage::JUDGEMENT: return "Judgement";
  }
  return "?";
}

std::string_view display_name(Dimension v) {
  switch (v) {
    case Dimension::FACTUALITY: return "Factuality";
    case Dimension::SOURCE_RELIABILITY: return "Source Reliability";
    case Dimension::REASONING_QUALITY: return "Reasoning Quality";
    case Dimension::CLARITY: return "Clarity";
    case Dimension::ETHICS: return "Ethics";
  }
  return "?";
}

int count_words(std::string_view text) {
  int tokens = 0;
  bool in_token = false;
  size_t single_begin = 0, single_end = 0;
  for (size_t i = 0; i < text.size(); ++i) {
    const bool space = std::isspace(static_cast<unsigned char>(text[i])) != 0;
    if (!space && !in_token) {
      ++tokens;
      single_begin = i;
    }
    if (space && in_token) single_end = i;
    in_token = !space;
  }
  if (in_token) single_end = text.size();
  if (tokens != 1) return tokens;

  const auto token = text.substr(single_begin, single_end - single_begin);
  int code_points = 0;
  bool has_cjk = false;
  for (size_t i = 0; i < token.size();) {
    has_cjk = is_cjk(next_code_point(token, i)) || has_cjk;
    ++code_points;
  }
  return has_cjk ? code_points : 1;
}

Claim Claim::make(std::string id, std::string text, std::optional<Label> gold) {
  const bool blank = std::all_of(text.begin(), text.end(),
                                 [](unsigned char c) { return std::isspace(c) != 0; });
  if (blank) throw Error(ErrorCode::PRECONDITION, "claim '" + id + "' has empty text");
  Claim c;
  c.word_count = count_words(text);
  c.id = std::move(id);
  c.text = std::move(text);
  c.gold_label = gold;
  return c;
}

RoundPlan plan_rounds(int rounds) {
  if (rounds < 1 || rounds > 6) {
    throw Error(ErrorCode::OUT_OF_RANGE, "rounds must be in [1,6], got " + std::to_string(rounds));
  }
  RoundPlan plan{rounds, {Stage::OPENING}};
  if (rounds >= 3) plan.stages.push_back(Stage::REBUTTAL);
  for (int i = 4; i <= rounds; ++i) plan.stages.push_back(Stage::FREE_DEBATE);
  if (rounds >= 2) plan.stages.push_back(Stage::CLOSING);
  return plan;
}

DimensionScore DimensionScore::make(Dimension dim, int affirmative, int negative) {
  if (affirmative < 0 || affirmative > kPointsPerDimension || negative < 0 ||
      negative > kPointsPerDimension || affirmative + negative != kPointsPerDimension) {
    throw Error(ErrorCode::INVALID_SHEET, std::string(to_string(dim)) + " split " +
                                              std::to_string(affirmative) + ":" +
                                              std::to_string(negative) + " is not a 7-point split");
  }
  return DimensionScore{dim, affirmative, negative};
}

Verdict aggregate_verdict(const std::vector<DimensionScore>& entries, std::string synopsis) {
  if (entries.size() != 5 && entries.size() != 1) {
    throw Error(ErrorCode::INVALID_SHEET,
                "expected 5 or 1 dimension entries, got " + std::to_string(entries.size()));
  }
  Verdict v;
  for (const auto& e : entries) {
    // Re-validate: entries may have been built by aggregate initialisation.
    v.sheet.entries.push_back(DimensionScore::make(e.dimension, e.affirmative, e.negative));
    v.sheet.affirmative_total += e.affirmative;
    v.sheet.negative_total += e.negative;
  }
  for (size_t i = 0; i < entries.size(); ++i) {
    for (size_t j = i + 1; j < entries.size(); ++j) {
      if (entries[i].dimension == entries[j].dimension) {
        throw Error(ErrorCode::INVALID_SHEET,
                    "duplicate dimension " + std::string(to_string(entries[i].dimension)));
      }
    }
  }
  v.label = v.sheet.affirmative_total > v.sheet.negative_total ? Label::REAL : Label::FAKE;
  v.synopsis = std::move(synopsis);
  return v;
}

const std::string& ModelMap::for_stage(Stage s) const {
  const auto it = stage.find(s);
  return it == stage.end() || it->second.empty() ? default_model : it->second;
}

void RunConfig::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::INVALID_ARGUMENT, m); };
  if (rounds < 1 || rounds > 6) fail("rounds must be in [1,6]");
  for (double t : {temperatures.domain, temperatures.debate, temperatures.judge}) {
    if (!(t >= 0.0 && t <= 2.0)) fail("temperatures must be in [0,2]");
  }
  if (parallelism < 1) fail("parallelism must be >= 1");
  if (score_retry_cap < 0) fail("score_retry_cap must be >= 0");
  if (self_reflect_max_iters < 1) fail("self_reflect_max_iters must be >= 1");
  if (!(drop_longest_fraction >= 0.0 && drop_longest_fraction < 1.0)) {
    fail("drop_longest_fraction must be in [0,1)");
  }
  if (models.default_model.empty()) fail("default model id is empty");
}

}  // namespace d2d

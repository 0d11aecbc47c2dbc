#include "d2d/judgment.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <future>
#include <optional>
#include <regex>

namespace d2d {

namespace {

enum class Key { AFF, NEG, SUPPORTER, SKEPTIC };

std::optional<Key> classify_key(std::string k) {
  for (auto& c : k) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (k == "affirmative") return Key::AFF;
  if (k == "negative") return Key::NEG;
  if (k == "supporter") return Key::SUPPORTER;
  if (k == "skeptic") return Key::SKEPTIC;
  return std::nullopt;
}

std::string retry_instruction(bool neutral_labels) {
  std::string text =
      "Your previous reply could not be read as a valid score. Reply again with two integer scores that "
      "add up to exactly 7, in the following JSON format:{Affirmative: X, Negative: Y}.";
  return neutral_labels ? relabel_neutral(text) : text;
}

}  // namespace

RawScorePair parse_scores(const std::string& text, bool neutral_labels) {
  static const std::regex kPair(
      R"re((["']?)(affirmative|negative|supporter|skeptic)\1\s*:\s*([-+]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][-+]?\d+)?))re",
      std::regex::icase);

  size_t pos = 0;
  while ((pos = text.find('{', pos)) != std::string::npos) {
    const auto close = text.find('}', pos + 1);
    if (close == std::string::npos) break;
    const std::string body = text.substr(pos + 1, close - pos - 1);

    std::map<Key, double> found;
    for (std::sregex_iterator it(body.begin(), body.end(), kPair), end; it != end; ++it) {
      if (auto key = classify_key((*it)[2].str())) found.try_emplace(*key, std::stod((*it)[3].str()));
    }
    auto pick = [&](Key primary, Key alternate) -> std::optional<double> {
      if (auto f = found.find(primary); f != found.end()) return f->second;
      if (auto f = found.find(alternate); f != found.end()) return f->second;
      return std::nullopt;
    };
    const auto aff = neutral_labels ? pick(Key::SUPPORTER, Key::AFF) : pick(Key::AFF, Key::SUPPORTER);
    const auto neg = neutral_labels ? pick(Key::SKEPTIC, Key::NEG) : pick(Key::NEG, Key::SKEPTIC);
    if (aff && neg) return RawScorePair{*aff, *neg, text.substr(pos, close - pos + 1)};
    pos = close + 1;
  }
  throw Error(ErrorCode::UNPARSEABLE, "no score object in judge reply");
}

RepairedScore repair_scores(Dimension dim, const RawScorePair& raw) {
  const double a = raw.affirmative_raw;
  const double b = raw.negative_raw;
  if (!std::isfinite(a) || !std::isfinite(b) || !(a + b > 0.0)) {
    throw Error(ErrorCode::IRREPARABLE, "cannot rescale score pair (" + std::to_string(a) + ", " +
                                            std::to_string(b) + ")");
  }
  const bool already_valid = a == std::floor(a) && b == std::floor(b) && a >= 0 && b >= 0 &&
                             a + b == kPointsPerDimension;
  const double scaled = kPointsPerDimension * a / (a + b);
  if (!std::isfinite(scaled)) {
    throw Error(ErrorCode::IRREPARABLE, "score pair overflows when rescaled");
  }
  const auto aff = static_cast<int>(std::clamp(std::llround(scaled), 0LL, static_cast<long long>(kPointsPerDimension)));
  return RepairedScore{DimensionScore::make(dim, aff, kPointsPerDimension - aff), !already_valid};
}

DimensionTrace query_score(Backend& backend, ChatRequest request, Dimension dim, bool neutral_labels,
                           int retry_cap) {
  std::string last_error;
  for (int attempt = 0; attempt <= retry_cap; ++attempt) {
    const auto reply = backend.complete(request);
    try {
      auto raw = parse_scores(reply, neutral_labels);
      const auto repaired = repair_scores(dim, raw);
      return DimensionTrace{std::move(raw), repaired.score, repaired.repair_applied, attempt};
    } catch (const Error& e) {
      if (e.code != ErrorCode::UNPARSEABLE && e.code != ErrorCode::IRREPARABLE) throw;
      last_error = e.what();
    }
    request.messages.push_back({Role::ASSISTANT, reply});
    request.messages.push_back({Role::USER, retry_instruction(neutral_labels)});
  }
  throw Error(ErrorCode::DIMENSION_FAILED, std::string(to_string(dim)) + " after " +
                                               std::to_string(retry_cap) + " retries: " + last_error);
}

std::string Judge::synthesize(const std::string& memory_digest, const Roster& roster,
                              const std::vector<Turn>& transcript) const {
  const auto expected = static_cast<size_t>(2 * config_.effective_rounds());
  if (transcript.size() != expected) {
    throw Error(ErrorCode::PRECONDITION, "synopsis requested after " + std::to_string(transcript.size()) +
                                             " of " + std::to_string(expected) + " turns");
  }
  ChatRequest req{config_.models.for_stage(Stage::JUDGEMENT),
                  prompts_.render(PromptId::JUDGE_SUMMARY,
                                  {{"Profile", roster.synopsis_judge().profile_text},
                                   {"Shared_Memory", memory_digest}},
                                  config_.neutral_labels),
                  config_.temperatures.judge};
  return backend_.complete(req);
}

DimensionTrace Judge::score_dimension(Dimension dim, const std::string& memory_digest,
                                      const std::string& synopsis, const AgentProfile& judge,
                                      int retry_cap) const {
  if (judge.dimension != dim) {
    throw Error(ErrorCode::PRECONDITION, "judge " + judge.agent_id + " does not score " +
                                             std::string(to_string(dim)));
  }
  std::string memory = memory_digest;
  if (config_.synopsis_to_scorers && !synopsis.empty()) memory += "\n\nNeutral synopsis: " + synopsis;

  ChatRequest req{config_.models.for_stage(Stage::JUDGEMENT),
                  prompts_.render(PromptId::JUDGE_EVALUATION,
                                  {{"Profile", judge.profile_text},
                                   {"Shared_Memory", memory},
                                   {"dimension_name", std::string(display_name(dim))}},
                                  config_.neutral_labels),
                  config_.temperatures.judge};
  return query_score(backend_, std::move(req), dim, config_.neutral_labels, retry_cap);
}

std::pair<Verdict, JudgmentTrace> Judge::judge_debate(const std::string& memory_digest, const Roster& roster,
                                                      const std::vector<Turn>& transcript) const {
  JudgmentTrace trace;
  std::vector<DimensionScore> entries;

  if (config_.variant == Variant::NO_MULTI_JUDGE) {
    const auto expected = static_cast<size_t>(2 * config_.effective_rounds());
    if (transcript.size() != expected) throw Error(ErrorCode::PRECONDITION, "judgment before debate end");
    auto t = score_dimension(Dimension::FACTUALITY, memory_digest, "",
                             roster.scoring_judge(Dimension::FACTUALITY), config_.score_retry_cap);
    entries.push_back(t.score);
    trace.per_dimension.emplace(Dimension::FACTUALITY, std::move(t));
    return {aggregate_verdict(entries, ""), std::move(trace)};
  }

  trace.synopsis = synthesize(memory_digest, roster, transcript);

  std::vector<std::future<DimensionTrace>> pending;
  for (Dimension dim : kAllDimensions) {
    pending.push_back(std::async(std::launch::async, [&, dim] {
      return score_dimension(dim, memory_digest, trace.synopsis, roster.scoring_judge(dim),
                             config_.score_retry_cap);
    }));
  }
  // Wait for every call before rethrowing so no task outlives this frame.
  std::exception_ptr first_error;
  for (size_t i = 0; i < pending.size(); ++i) {
    try {
      auto t = pending[i].get();
      entries.push_back(t.score);
      trace.per_dimension.emplace(kAllDimensions[i], std::move(t));
    } catch (...) {
      if (!first_error) first_error = std::current_exception();
    }
  }
  if (first_error) std::rethrow_exception(first_error);
  return {aggregate_verdict(entries, trace.synopsis), std::move(trace)};
}

}  // namespace d2d

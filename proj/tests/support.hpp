#pragma once

// Deterministic responder that plays every role of a debate from the prompt
// text alone, so tests can run whole debates without a model.

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "d2d/agents.hpp"
#include "d2d/backend.hpp"
#include "d2d/core.hpp"

namespace d2d::test {

inline bool contains(const std::string& s, std::string_view needle) { return s.find(needle) != std::string::npos; }

inline std::string between(const std::string& s, std::string_view open, std::string_view close) {
  const auto a = s.find(open);
  if (a == std::string::npos) return "";
  const auto b = s.find(close, a + open.size());
  if (b == std::string::npos) return s.substr(a + open.size());
  return s.substr(a + open.size(), b - a - open.size());
}

// Template fingerprints. The memory template is checked before the debater
// ones because its history text quotes earlier turns.
inline constexpr std::string_view kDomainNeedle = "Classify the domain of the following claim";
inline constexpr std::string_view kProfileNeedle = "Provide a brief professional profile";
inline constexpr std::string_view kMemoryNeedle = "Given the following debate history:";
inline constexpr std::string_view kSummaryNeedle = "responsible for summarizing the key points";
inline constexpr std::string_view kEvalNeedle = "evaluating the quality and validity";
inline constexpr std::string_view kOpeningNeedle = "well-structured opening statement";
inline constexpr std::string_view kRebuttalNeedle = "well-structured rebuttal";
inline constexpr std::string_view kFreeNeedle = "well-structured continuation";
inline constexpr std::string_view kClosingNeedle = "The final evaluation is approaching";

enum class Kind { DOMAIN, PROFILE, MEMORY, SUMMARY, EVAL, OPENING, REBUTTAL, FREE, CLOSING, OTHER };

inline const std::string& first_user(const ChatRequest& r) {
  for (const auto& m : r.messages) {
    if (m.role == Role::USER) return m.content;
  }
  return r.messages.front().content;
}

inline Kind kind_of(const ChatRequest& r) {
  const auto& p = first_user(r);
  if (contains(p, kDomainNeedle)) return Kind::DOMAIN;
  if (contains(p, kProfileNeedle)) return Kind::PROFILE;
  if (p.rfind(kMemoryNeedle, 0) == 0) return Kind::MEMORY;
  if (contains(p, kSummaryNeedle)) return Kind::SUMMARY;
  if (contains(p, kEvalNeedle)) return Kind::EVAL;
  if (contains(p, kOpeningNeedle)) return Kind::OPENING;
  if (contains(p, kRebuttalNeedle)) return Kind::REBUTTAL;
  if (contains(p, kFreeNeedle)) return Kind::FREE;
  if (contains(p, kClosingNeedle)) return Kind::CLOSING;
  return Kind::OTHER;
}

inline bool is_debater(Kind k) {
  return k == Kind::OPENING || k == Kind::REBUTTAL || k == Kind::FREE || k == Kind::CLOSING;
}
inline bool is_judgment(Kind k) { return k == Kind::SUMMARY || k == Kind::EVAL; }

inline std::vector<ChatRequest> of_kind(const std::vector<ChatRequest>& log, Kind k) {
  std::vector<ChatRequest> out;
  for (const auto& r : log) {
    if (kind_of(r) == k) out.push_back(r);
  }
  return out;
}

inline size_t count_kind(const std::vector<ChatRequest>& log, Kind k) { return of_kind(log, k).size(); }

// Digest the script returns for a history of n lines ending in last_line.
inline std::string scripted_digest(size_t n, const std::string& last_line) {
  return "Digest of " + std::to_string(n) + " statements, latest " + last_line;
}

using ScoreTable = std::map<Dimension, std::pair<int, int>>;

inline ScoreTable reference_scores() {
  return {{Dimension::FACTUALITY, {2, 5}},
          {Dimension::SOURCE_RELIABILITY, {1, 6}},
          {Dimension::REASONING_QUALITY, {2, 5}},
          {Dimension::CLARITY, {3, 4}},
          {Dimension::ETHICS, {2, 5}}};
}

struct DebateScript {
  std::string domain_reply = "Politics and elections";
  std::string synopsis = "Both sides disputed the vote count.";
  ScoreTable scores = reference_scores();
};

inline std::optional<std::string> debate_reply(const ChatRequest& r, const DebateScript& script) {
  const auto& p = first_user(r);
  const bool neutral = contains(p, "Supporter");
  switch (kind_of(r)) {
    case Kind::DOMAIN:
      return script.domain_reply;
    case Kind::PROFILE: {
      // Side names are swapped for pro/con so profiles carry no role lexeme.
      auto stage = between(p, "for a debater in ", " stage role");
      for (auto [from, to] : {std::pair{"Affirmative", "pro"}, {"Negative", "con"}, {"Supporter", "pro"},
                              {"Skeptic", "con"}}) {
        if (auto at = stage.find(from); at != std::string::npos) stage.replace(at, std::string(from).size(), to);
      }
      return "Seasoned " + between(p, "The domain is ", ".") + " analyst for " + stage + ".";
    }
    case Kind::MEMORY: {
      const auto history = between(p, "Given the following debate history: ", "\n\nSummarize");
      size_t n = 1;
      for (char c : history) n += c == '\n';
      return scripted_digest(n, history.substr(history.rfind('\n') == std::string::npos ? 0 : history.rfind('\n') + 1));
    }
    case Kind::SUMMARY:
      return script.synopsis;
    case Kind::EVAL: {
      const auto name = between(p, "based on the ", " dimension");
      for (Dimension d : kAllDimensions) {
        if (display_name(d) != name) continue;
        const auto [a, b] = script.scores.at(d);
        return neutral ? "{Supporter: " + std::to_string(a) + ", Skeptic: " + std::to_string(b) + "}"
                       : "{\"Affirmative\": " + std::to_string(a) + ", \"Negative\": " + std::to_string(b) + "}";
      }
      return std::nullopt;
    }
    case Kind::OPENING:
    case Kind::REBUTTAL:
    case Kind::FREE:
    case Kind::CLOSING: {
      const auto stance = between(p, "Your assigned stance is ", ":");
      const auto k = kind_of(r);
      const char* stage = k == Kind::OPENING ? "opening" : k == Kind::REBUTTAL ? "rebuttal" : k == Kind::FREE ? "free" : "closing";
      return stance + " " + stage + " argument.";
    }
    case Kind::OTHER:
      return std::nullopt;
  }
  return std::nullopt;
}

inline void install(ScriptedBackend& backend, DebateScript script = {}) {
  backend.set_fallback([script](const ChatRequest& r) { return debate_reply(r, script); });
}

// "[Opening Statement] [Affirmative]: text", written out independently of the library.
inline std::string history_line(const Turn& t, bool neutral) {
  static const std::map<Stage, std::string> names = {{Stage::OPENING, "Opening Statement"},
                                                     {Stage::REBUTTAL, "Rebuttal"},
                                                     {Stage::FREE_DEBATE, "Free Debate"},
                                                     {Stage::CLOSING, "Closing Statement"}};
  const bool aff = t.side == Stance::AFFIRMATIVE_REAL;
  const std::string side = neutral ? (aff ? "Supporter" : "Skeptic") : (aff ? "Affirmative" : "Negative");
  return "[" + names.at(t.stage) + "] [" + side + "]: " + t.content;
}

// Replaces the memory slot of a debater or judge prompt so prompts from runs
// with different histories can be compared.
inline std::string mask_memory(std::string prompt) {
  const std::string open = "The previous argument presented was: ";
  const auto a = prompt.find(open);
  if (a == std::string::npos) return prompt;
  size_t b = std::string::npos;
  for (std::string_view next : {".\n\nIdentify", ".\n\nBuilding", ".\n\nUsing", ".\n\nFocus", ".\n\nYour task"}) {
    b = std::min(b, prompt.find(next, a + open.size()));
  }
  if (b == std::string::npos) return prompt;
  prompt.replace(a + open.size(), b - a - open.size(), "<MEM>");
  return prompt;
}

inline Claim sample_claim() {
  return Claim::make("c1", "The city council approved a budget that doubles road funding next year.", Label::FAKE);
}

}  // namespace d2d::test

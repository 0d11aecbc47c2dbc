#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "d2d/backend.hpp"

namespace d2d {

enum class PromptId {
  DOMAIN_INFERENCE,
  PROFILE_GENERATION,
  SHARED_MEMORY,
  OPENING,
  REBUTTAL,
  FREE_DEBATE,
  CLOSING,
  JUDGE_SUMMARY,
  JUDGE_EVALUATION,
  // Baseline prompts; not part of the debate protocol.
  ZS_CLASSIFY,
  COT_CLASSIFY,
  SELF_REFLECT,
  SELF_REVISE,
  SMAD_TURN,
  SMAD_JUDGE,
};

inline constexpr std::array<PromptId, 15> kAllPromptIds = {
    PromptId::DOMAIN_INFERENCE, PromptId::PROFILE_GENERATION, PromptId::SHARED_MEMORY,
    PromptId::OPENING,          PromptId::REBUTTAL,           PromptId::FREE_DEBATE,
    PromptId::CLOSING,          PromptId::JUDGE_SUMMARY,      PromptId::JUDGE_EVALUATION,
    PromptId::ZS_CLASSIFY,      PromptId::COT_CLASSIFY,       PromptId::SELF_REFLECT,
    PromptId::SELF_REVISE,      PromptId::SMAD_TURN,          PromptId::SMAD_JUDGE};

std::string_view to_string(PromptId id);
PromptId parse_prompt_id(std::string_view s);  // throws UNKNOWN_ID

/// True for the baseline prompts, which have no published wording.
bool is_synthetic(PromptId id);

/// Template for the debater speaking in a stage. JUDGEMENT has none.
PromptId prompt_for_stage(Stage stage);

/// placeholder name -> value, e.g. {"input", claim text}.
using RenderContext = std::map<std::string, std::string>;

/// Placeholders that may be bound to an empty string (history slots before
/// anything has been said). All others must be nonempty.
bool placeholder_may_be_empty(std::string_view name);

/// Sentinel the self-reflection critique emits once no revision is needed.
inline constexpr std::string_view kNoFurtherRevision = "NO FURTHER REVISION";

/// Replaces every "Affirmative" with "Supporter" and "Negative" with "Skeptic".
std::string relabel_neutral(std::string_view text);

class PromptRegistry {
 public:
  /// Built-in templates only.
  PromptRegistry();

  /// Built-in templates, overridden by any "<PROMPT_ID>.txt" files in dir.
  static PromptRegistry with_overrides(const std::string& dir);

  const std::string& template_text(PromptId id) const;
  void set_template(PromptId id, std::string text);

  /// Placeholder names a template demands, in order of first appearance.
  std::vector<std::string> placeholders(PromptId id) const;

  /// Substitutes ctx into the template and returns it as a single user
  /// message. With neutral_labels the side names in the template text (not in
  /// substituted values) are rewritten by relabel_neutral first.
  /// Throws MISSING_PLACEHOLDER naming every absent or empty placeholder.
  std::vector<ChatMessage> render(PromptId id, const RenderContext& ctx, bool neutral_labels) const;

  std::string render_text(PromptId id, const RenderContext& ctx, bool neutral_labels) const;

 private:
  std::map<PromptId, std::string> templates_;
};

}  // namespace d2d

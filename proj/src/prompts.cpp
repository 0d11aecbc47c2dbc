#include "d2d/prompts.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace d2d {

namespace {

const std::map<PromptId, std::string>& builtin_templates() {
  static const std::map<PromptId, std::string> kTemplates = {
      {PromptId::DOMAIN_INFERENCE,
       "Classify the domain of the following claim in one or two words (e.g., politics, finance, "
       "sports, technology, health). Claim:{input}"},

      {PromptId::PROFILE_GENERATION,
       "The domain is {domain}. Provide a brief professional profile (3-4 sentences) for a debater "
       "in {stage_name} stage role relevant to this domain."},

      {PromptId::SHARED_MEMORY,
       "Given the following debate history: {debate_history}\n"
       "\n"
       "Summarize the key points from both the Affirmative and Negative sides, ensuring the "
       "following aspects are preserved:\n"
       "1. The main claim and its justification.\n"
       "2. Key arguments and supporting evidence from both sides.\n"
       "3. Notable rebuttals and counterarguments.\n"
       "4. Any unresolved contradictions or logical conflicts.\n"
       "\n"
       "Your summary should be concise yet comprehensive, allowing future agents to understand the "
       "debate's progression without losing important context. Aim to reduce redundancy while "
       "maintaining logical coherence."},

      {PromptId::OPENING,
       "{Profile}\n"
       "\n"
       "The claim under discussion is: {input}.\n"
       "Your assigned stance is {fixed_stance}.\n"
       "\n"
       "Based on your designated role and the available argument history, construct a "
       "well-structured opening statement that convincingly defends your stance.\n"
       "Make sure to employ logical reasoning, relevant evidence, and clear argumentation to "
       "support your position."},

      {PromptId::REBUTTAL,
       "{Profile}\n"
       "\n"
       "The claim under discussion is: {input}.\n"
       "Your assigned stance is {fixed_stance}.\n"
       "The previous argument presented was: {Shared_Memory}.\n"
       "\n"
       "Identify the key weaknesses or logical inconsistencies in the opponent's argument and "
       "provide a well-structured rebuttal.\n"
       "Leverage relevant evidence and logical reasoning to effectively counter the claims made. "
       "Aim to challenge the validity of the argument while reinforcing your own position."},

      {PromptId::FREE_DEBATE,
       "{Profile}\n"
       "\n"
       "The claim under discussion is: {input}.\n"
       "Your assigned stance is {fixed_stance}.\n"
       "The previous argument presented was: {Shared_Memory}.\n"
       "\n"
       "Building on your previous arguments and responding to the latest claims, provide a "
       "well-structured continuation of the debate.\n"
       "Focus on addressing any unresolved contradictions, introducing new evidence if necessary, "
       "and strengthening your stance with logical reasoning."},

      {PromptId::CLOSING,
       "{Profile}\n"
       "\n"
       "The claim under discussion is: {input}.\n"
       "Your assigned stance is {fixed_stance}.\n"
       "The final evaluation is approaching. The previous argument presented was: "
       "{Shared_Memory}.\n"
       "\n"
       "Using this information, summarize your key arguments and highlight the most compelling "
       "evidence presented throughout the debate.\n"
       "Emphasize the logical coherence of your stance, address any lingering concerns or "
       "contradictions raised by the opposition, and consolidate your position.\n"
       "Conclude with a clear and decisive statement that reinforces your stance as the more "
       "rational and evidence-based perspective."},

      {PromptId::JUDGE_SUMMARY,
       "{Profile}\n"
       "\n"
       "You are assigned the role of a Judge responsible for summarizing the key points presented "
       "during the debate. Your task is to produce a concise and neutral summary that accurately "
       "reflects the main arguments from both the Affirmative and Negative sides.\n"
       "\n"
       "The previous argument presented was: {Shared_Memory}.\n"
       "\n"
       "Focus on the following aspects:\n"
       "\n"
       "1. The main claim and its context.\n"
       "\n"
       "2. Key supporting arguments presented by the Affirmative side.\n"
       "\n"
       "3. Key counterarguments raised by the Negative side.\n"
       "\n"
       "4. Notable rebuttals and their logical coherence.\n"
       "\n"
       "5. Any unresolved contradictions or gaps in reasoning."},

      {PromptId::JUDGE_EVALUATION,
       "{Profile}\n"
       "\n"
       "You are assigned the role of a Judge, responsible for evaluating the quality and validity "
       "of the arguments presented during the debate. Affirmatives defend the claim as factual, and "
       "Negatives argue that the claim is misleading or fake.\n"
       "\n"
       "The previous argument presented was: {Shared_Memory}.\n"
       "\n"
       "Your task is to assess the arguments from both the Affirmative and Negative sides based on "
       "the {dimension_name} dimension.\n"
       "\n"
       "For this dimension, assign an integer score to each side based on how convincingly they "
       "support their position relative to the truth. The two scores must add up to exactly 7.\n"
       "\n"
       "Return the following JSON format:{Affirmative: X, Negative: Y}."},

      {PromptId::ZS_CLASSIFY,
       "Determine whether the following news claim is real or fake.\n"
       "\n"
       "Claim: {input}\n"
       "\n"
       "End your answer with a final line that is exactly \"VERDICT: REAL\" or \"VERDICT: FAKE\"."},

      {PromptId::COT_CLASSIFY,
       "Determine whether the following news claim is real or fake.\n"
       "\n"
       "Claim: {input}\n"
       "\n"
       "Let's think step by step. Reason explicitly about the claim's plausibility, its likely "
       "sources and any internal inconsistencies before deciding.\n"
       "End your answer with a final line that is exactly \"VERDICT: REAL\" or \"VERDICT: FAKE\"."},

      {PromptId::SELF_REFLECT,
       "Claim: {input}\n"
       "\n"
       "An earlier answer assessed whether this claim is real or fake:\n"
       "{previous_answer}\n"
       "\n"
       "Critique this answer. Point out factual errors, unsupported reasoning steps or overlooked "
       "evidence. If the answer is sound and needs no changes, reply with exactly \"NO FURTHER "
       "REVISION\"."},

      {PromptId::SELF_REVISE,
       "Claim: {input}\n"
       "\n"
       "Earlier answer:\n"
       "{previous_answer}\n"
       "\n"
       "Critique of that answer:\n"
       "{critique}\n"
       "\n"
       "Write a revised answer that addresses the critique.\n"
       "End your answer with a final line that is exactly \"VERDICT: REAL\" or \"VERDICT: FAKE\"."},

      {PromptId::SMAD_TURN,
       "{Profile}\n"
       "\n"
       "The claim under discussion is: {input}.\n"
       "Your assigned stance is {fixed_stance}.\n"
       "The debate so far: {debate_history}\n"
       "\n"
       "Present your next argument in defense of your stance, responding to your opponent where "
       "relevant."},

      {PromptId::SMAD_JUDGE,
       "{Profile}\n"
       "\n"
       "You are the judge of a debate on the claim: {input}.\n"
       "The Affirmative side argued that the claim is real and the Negative side argued that it is "
       "fake.\n"
       "\n"
       "Debate transcript: {debate_history}\n"
       "\n"
       "Decide which side argued more convincingly relative to the truth. Assign an integer score to "
       "each side. The two scores must add up to exactly 7.\n"
       "\n"
       "Return the following JSON format:{Affirmative: X, Negative: Y}."},
  };
  return kTemplates;
}

bool is_ident_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

// Calls on_placeholder(name) for every "{identifier}" span and on_text for the rest.
template <typename Text, typename Placeholder>
void scan_template(std::string_view tpl, Text&& on_text, Placeholder&& on_placeholder) {
  size_t i = 0;
  while (i < tpl.size()) {
    const auto open = tpl.find('{', i);
    if (open == std::string_view::npos) break;
    size_t j = open + 1;
    while (j < tpl.size() && is_ident_char(tpl[j])) ++j;
    if (j < tpl.size() && tpl[j] == '}' && j > open + 1) {
      on_text(tpl.substr(i, open - i));
      on_placeholder(tpl.substr(open + 1, j - open - 1));
      i = j + 1;
    } else {
      on_text(tpl.substr(i, open + 1 - i));
      i = open + 1;
    }
  }
  on_text(tpl.substr(i));
}

std::string replace_all(std::string_view text, std::string_view from, std::string_view to) {
  std::string out;
  size_t i = 0;
  while (true) {
    const auto pos = text.find(from, i);
    if (pos == std::string_view::npos) break;
    out.append(text.substr(i, pos - i));
    out.append(to);
    i = pos + from.size();
  }
  out.append(text.substr(i));
  return out;
}

}  // namespace

std::string_view to_string(PromptId id) {
  switch (id) {
    case PromptId::DOMAIN_INFERENCE: return "DOMAIN_INFERENCE";
    case PromptId::PROFILE_GENERATION: return "PROFILE_GENERATION";
    case PromptId::SHARED_MEMORY: return "SHARED_MEMORY";
    case PromptId::OPENING: return "OPENING";
    case PromptId::REBUTTAL: return "REBUTTAL";
    case PromptId::FREE_DEBATE: return "FREE_DEBATE";
    case PromptId::CLOSING: return "CLOSING";
    case PromptId::JUDGE_SUMMARY: return "JUDGE_SUMMARY";
    case PromptId::JUDGE_EVALUATION: return "JUDGE_EVALUATION";
    case PromptId::ZS_CLASSIFY: return "ZS_CLASSIFY";
    case PromptId::COT_CLASSIFY: return "COT_CLASSIFY";
    case PromptId::SELF_REFLECT: return "SELF_REFLECT";
    case PromptId::SELF_REVISE: return "SELF_REVISE";
    case PromptId::SMAD_TURN: return "SMAD_TURN";
    case PromptId::SMAD_JUDGE: return "SMAD_JUDGE";
  }
  return "?";
}

PromptId parse_prompt_id(std::string_view s) {
  for (PromptId id : kAllPromptIds) {
    if (s == to_string(id)) return id;
  }
  throw Error(ErrorCode::UNKNOWN_ID, "unknown prompt id '" + std::string(s) + "'");
}

bool is_synthetic(PromptId id) {
  switch (id) {
    case PromptId::ZS_CLASSIFY:
    case PromptId::COT_CLASSIFY:
    case PromptId::SELF_REFLECT:
    case PromptId::SELF_REVISE:
    case PromptId::SMAD_TURN:
    case PromptId::SMAD_JUDGE:
      return true;
    default:
      return false;
  }
}

PromptId prompt_for_stage(Stage stage) {
  switch (stage) {
    case Stage::OPENING: return PromptId::OPENING;
    case Stage::REBUTTAL: return PromptId::REBUTTAL;
    case Stage::FREE_DEBATE: return PromptId::FREE_DEBATE;
    case Stage::CLOSING: return PromptId::CLOSING;
    case Stage::JUDGEMENT: break;
  }
  throw Error(ErrorCode::INVALID_ARGUMENT, "JUDGEMENT is not a speaking stage");
}

bool placeholder_may_be_empty(std::string_view name) {
  return name == "Shared_Memory" || name == "debate_history";
}

std::string relabel_neutral(std::string_view text) {
  return replace_all(replace_all(text, "Affirmative", "Supporter"), "Negative", "Skeptic");
}

PromptRegistry::PromptRegistry() : templates_(builtin_templates()) {}

PromptRegistry PromptRegistry::with_overrides(const std::string& dir) {
  namespace fs = std::filesystem;
  PromptRegistry reg;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw Error(ErrorCode::IO_ERROR, "template directory not found: " + dir);
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
    const auto id = parse_prompt_id(entry.path().stem().string());
    std::ifstream in(entry.path(), std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    reg.set_template(id, ss.str());
  }
  return reg;
}

const std::string& PromptRegistry::template_text(PromptId id) const {
  const auto it = templates_.find(id);
  if (it == templates_.end()) {
    throw Error(ErrorCode::UNKNOWN_ID, "no template for id " + std::to_string(static_cast<int>(id)));
  }
  return it->second;
}

void PromptRegistry::set_template(PromptId id, std::string text) { templates_[id] = std::move(text); }

std::vector<std::string> PromptRegistry::placeholders(PromptId id) const {
  std::vector<std::string> names;
  scan_template(
      template_text(id), [](std::string_view) {},
      [&](std::string_view name) {
        if (std::find(names.begin(), names.end(), name) == names.end()) names.emplace_back(name);
      });
  return names;
}

std::string PromptRegistry::render_text(PromptId id, const RenderContext& ctx, bool neutral_labels) const {
  const std::string tpl = neutral_labels ? relabel_neutral(template_text(id)) : template_text(id);

  std::vector<std::string> missing;
  for (const auto& name : placeholders(id)) {
    const auto it = ctx.find(name);
    if (it == ctx.end() || (it->second.empty() && !placeholder_may_be_empty(name))) missing.push_back(name);
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    throw Error(ErrorCode::MISSING_PLACEHOLDER, std::string(to_string(id)) + " needs " + list);
  }

  std::string out;
  scan_template(
      tpl, [&](std::string_view text) { out.append(text); },
      [&](std::string_view name) { out.append(ctx.at(std::string(name))); });
  return out;
}

std::vector<ChatMessage> PromptRegistry::render(PromptId id, const RenderContext& ctx, bool neutral_labels) const {
  return {ChatMessage{Role::USER, render_text(id, ctx, neutral_labels)}};
}

}  // namespace d2d

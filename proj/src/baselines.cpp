#include "d2d/baselines.hpp"

#include <regex>

#include "d2d/judgment.hpp"

namespace d2d {

namespace {

constexpr std::string_view kVerdictReminder =
    "Your answer did not end with a verdict line. Reply with a final line that is exactly "
    "\"VERDICT: REAL\" or \"VERDICT: FAKE\".";

std::string smad_history(const std::vector<Turn>& turns, bool neutral_labels) {
  std::string out;
  for (const auto& t : turns) {
    if (!out.empty()) out += '\n';
    out += "[Round " + std::to_string(t.index / 2 + 1) + "] [" + side_label(t.side, neutral_labels) +
           "]: " + t.content;
  }
  return out;
}

BaselineResult empty_result(const std::string& id, Method m) {
  BaselineResult r;
  r.claim_id = id;
  r.method = m;
  return r;
}

}  // namespace

std::string_view to_string(Method m) {
  switch (m) {
    case Method::ZS: return "ZS";
    case Method::COT: return "COT";
    case Method::SR: return "SR";
    case Method::SMAD: return "SMAD";
  }
  return "?";
}

Method parse_method(std::string_view s) {
  std::string u(s);
  for (auto& c : u) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  for (Method m : kAllMethods) {
    if (u == to_string(m)) return m;
  }
  throw Error(ErrorCode::INVALID_ARGUMENT, "unknown baseline method '" + std::string(s) + "'");
}

std::optional<Label> parse_verdict_line(const std::string& text) {
  static const std::regex kVerdict(R"(verdict\s*\**\s*:[\s*]*(real|fake)\b)", std::regex::icase);
  std::optional<Label> label;
  for (std::sregex_iterator it(text.begin(), text.end(), kVerdict), end; it != end; ++it) {
    label = parse_label((*it)[1].str());
  }
  return label;
}

Baselines::Baselines(Backend& backend, const PromptRegistry& prompts, RunConfig config)
    : backend_(backend), prompts_(prompts), config_(std::move(config)) {
  config_.validate();
}

ChatRequest Baselines::request_for(PromptId id, const RenderContext& ctx, double temperature) const {
  return ChatRequest{config_.models.default_model, prompts_.render(id, ctx, config_.neutral_labels), temperature};
}

Label Baselines::classify(ChatRequest request, std::vector<std::string>& raw) const {
  for (int attempt = 0; attempt < 2; ++attempt) {
    raw.push_back(backend_.complete(request));
    if (auto label = parse_verdict_line(raw.back())) return *label;
    request.messages.push_back({Role::ASSISTANT, raw.back()});
    request.messages.push_back({Role::USER, std::string(kVerdictReminder)});
  }
  throw Error(ErrorCode::LABEL_UNPARSEABLE, "no verdict line after one re-query");
}

BaselineResult Baselines::run_zero_shot(const Claim& claim) const {
  auto r = empty_result(claim.id, Method::ZS);
  r.label = classify(request_for(PromptId::ZS_CLASSIFY, {{"input", claim.text}}, config_.temperatures.judge),
                     r.raw_outputs);
  return r;
}

BaselineResult Baselines::run_cot(const Claim& claim) const {
  auto r = empty_result(claim.id, Method::COT);
  r.label = classify(request_for(PromptId::COT_CLASSIFY, {{"input", claim.text}}, config_.temperatures.judge),
                     r.raw_outputs);
  return r;
}

BaselineResult Baselines::run_self_reflect(const Claim& claim, int max_iters) const {
  if (max_iters < 1) throw Error(ErrorCode::INVALID_ARGUMENT, "max_iters must be >= 1");
  const double temp = config_.temperatures.judge;
  auto r = empty_result(claim.id, Method::SR);

  auto current_request = request_for(PromptId::COT_CLASSIFY, {{"input", claim.text}}, temp);
  std::string current = backend_.complete(current_request);
  r.raw_outputs.push_back(current);

  r.iterations = 0;
  while (r.iterations < max_iters) {
    ++r.iterations;
    const auto critique = backend_.complete(
        request_for(PromptId::SELF_REFLECT, {{"input", claim.text}, {"previous_answer", current}}, temp));
    r.raw_outputs.push_back(critique);
    if (critique.find(kNoFurtherRevision) != std::string::npos) break;

    current_request = request_for(
        PromptId::SELF_REVISE, {{"input", claim.text}, {"previous_answer", current}, {"critique", critique}}, temp);
    current = backend_.complete(current_request);
    r.raw_outputs.push_back(current);
  }

  if (auto label = parse_verdict_line(current)) {
    r.label = *label;
    return r;
  }
  current_request.messages.push_back({Role::ASSISTANT, current});
  current_request.messages.push_back({Role::USER, std::string(kVerdictReminder)});
  r.raw_outputs.push_back(backend_.complete(current_request));
  if (auto label = parse_verdict_line(r.raw_outputs.back())) {
    r.label = *label;
    return r;
  }
  throw Error(ErrorCode::LABEL_UNPARSEABLE, "self-reflection ended without a verdict line");
}

BaselineResult Baselines::run_smad(const Claim& claim) const {
  constexpr int kRounds = 4;
  auto r = empty_result(claim.id, Method::SMAD);
  r.iterations = kRounds;
  const bool neutral = config_.neutral_labels;

  for (int round = 0; round < kRounds; ++round) {
    for (Stance side : kStances) {
      auto req = request_for(PromptId::SMAD_TURN,
                             {{"Profile", std::string(kGenericProfile)},
                              {"input", claim.text},
                              {"fixed_stance", stance_text(side, neutral)},
                              {"debate_history", smad_history(r.transcript, neutral)}},
                             config_.temperatures.debate);
      auto content = backend_.complete(req);
      r.raw_outputs.push_back(content);
      r.transcript.push_back(Turn{static_cast<int>(r.transcript.size()), Stage::FREE_DEBATE, side,
                                  side == Stance::AFFIRMATIVE_REAL ? "smad-aff" : "smad-neg",
                                  std::move(content), ""});
    }
  }

  auto judge_req = request_for(PromptId::SMAD_JUDGE,
                               {{"Profile", std::string(kGenericProfile)},
                                {"input", claim.text},
                                {"debate_history", smad_history(r.transcript, neutral)}},
                               config_.temperatures.judge);
  const auto trace = query_score(backend_, std::move(judge_req), Dimension::FACTUALITY, neutral,
                                 config_.score_retry_cap);
  r.raw_outputs.push_back(trace.raw.source_text);
  r.judge_score = trace.score;
  r.label = trace.score.affirmative > trace.score.negative ? Label::REAL : Label::FAKE;
  return r;
}

BaselineResult Baselines::run(Method method, const Claim& claim) const {
  switch (method) {
    case Method::ZS: return run_zero_shot(claim);
    case Method::COT: return run_cot(claim);
    case Method::SR: return run_self_reflect(claim, config_.self_reflect_max_iters);
    case Method::SMAD: return run_smad(claim);
  }
  throw Error(ErrorCode::INVALID_ARGUMENT, "unknown method");
}

}  // namespace d2d

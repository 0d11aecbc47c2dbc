#pragma once

#include <optional>
#include <string>
#include <vector>

#include "d2d/agents.hpp"
#include "d2d/backend.hpp"
#include "d2d/prompts.hpp"

namespace d2d {

enum class Method { ZS, COT, SR, SMAD };

inline constexpr std::array<Method, 4> kAllMethods = {Method::ZS, Method::COT, Method::SR, Method::SMAD};

std::string_view to_string(Method m);
Method parse_method(std::string_view s);

struct BaselineResult {
  std::string claim_id;
  Method method = Method::ZS;
  Label label = Label::FAKE;
  std::vector<std::string> raw_outputs;
  int iterations = 1;
  std::vector<Turn> transcript;  // SMAD only
  std::optional<DimensionScore> judge_score;  // SMAD only

  bool operator==(const BaselineResult&) const = default;
};

/// Label from the last "VERDICT: REAL|FAKE" in a reply, case-insensitive.
std::optional<Label> parse_verdict_line(const std::string& text);

/// Prompting baselines on the default model. Classification calls and the SMAD
/// judge run at judge temperature, SMAD debaters at debate temperature.
class Baselines {
 public:
  Baselines(Backend& backend, const PromptRegistry& prompts, RunConfig config);

  BaselineResult run_zero_shot(const Claim& claim) const;
  BaselineResult run_cot(const Claim& claim) const;
  /// Draft, then critique and revise until the critique returns the
  /// no-revision sentinel or max_iters critiques have been made.
  BaselineResult run_self_reflect(const Claim& claim, int max_iters) const;
  /// Two generic debaters, four rounds of raw-history exchange, one judge.
  BaselineResult run_smad(const Claim& claim) const;

  BaselineResult run(Method method, const Claim& claim) const;

 private:
  // One re-query on an unparseable verdict, then LABEL_UNPARSEABLE.
  Label classify(ChatRequest request, std::vector<std::string>& raw) const;
  ChatRequest request_for(PromptId id, const RenderContext& ctx, double temperature) const;

  Backend& backend_;
  const PromptRegistry& prompts_;
  RunConfig config_;
};

}  // namespace d2d

#include "d2d/engine.hpp"

#include <sstream>

namespace d2d {

namespace {

std::string first_two_tokens(const std::string& reply) {
  std::istringstream in(reply);
  std::string word, out;
  for (int i = 0; i < 2 && in >> word; ++i) out += (out.empty() ? "" : " ") + word;
  return out;
}

[[noreturn]] void fail_item(const Claim& claim, const std::vector<Turn>& partial) {
  try {
    throw;
  } catch (const ItemFailed&) {
    throw;
  } catch (const Error& e) {
    throw ItemFailed(claim.id, e.code, e.what(), partial);
  } catch (const std::exception& e) {
    throw ItemFailed(claim.id, ErrorCode::BACKEND_UNAVAILABLE, e.what(), partial);
  }
}

}  // namespace

DebateEngine::DebateEngine(Backend& backend, const PromptRegistry& prompts, RunConfig config)
    : backend_(backend), prompts_(prompts), config_(std::move(config)) {
  config_.validate();
}

std::string DebateEngine::infer_domain(const Claim& claim) const {
  if (claim.text.empty()) throw Error(ErrorCode::PRECONDITION, "claim '" + claim.id + "' has empty text");
  ChatRequest req{config_.models.for_domain(),
                  prompts_.render(PromptId::DOMAIN_INFERENCE, {{"input", claim.text}}, config_.neutral_labels),
                  config_.temperatures.domain};
  auto domain = first_two_tokens(backend_.complete(req));
  if (domain.empty()) throw Error(ErrorCode::BACKEND_UNAVAILABLE, "domain inference returned an empty reply");
  return domain;
}

Roster DebateEngine::build_roster(const std::string& domain) const {
  if (domain.empty()) throw Error(ErrorCode::PRECONDITION, "domain is empty");
  const bool generic = config_.variant == Variant::NO_DOMAIN_PROFILE;
  const bool neutral = config_.neutral_labels;

  auto generate = [&](const std::string& stage_name) {
    if (generic) return std::string(kGenericProfile);
    ChatRequest req{config_.models.for_profile(),
                    prompts_.render(PromptId::PROFILE_GENERATION,
                                    {{"domain", domain}, {"stage_name", stage_name}}, neutral),
                    config_.temperatures.debate};
    return backend_.complete(req);
  };

  Roster roster;
  for (Stance side : kStances) {
    const auto label = side_label(side, neutral);
    std::string shared;
    if (config_.variant == Variant::NO_STAGE_DESIGN) {
      shared = generate(std::string(display_name(Stage::FREE_DEBATE)) + " (" + label + ")");
    }
    for (Stage stage : kSpeakingStages) {
      auto text = config_.variant == Variant::NO_STAGE_DESIGN
                      ? shared
                      : generate(std::string(display_name(stage)) + " (" + label + ")");
      roster.debaters.push_back(
          AgentProfile{agent_id_for(side, stage), AgentRole::DEBATER, side, stage, std::nullopt, std::move(text)});
    }
  }
  const std::string judgement(display_name(Stage::JUDGEMENT));
  roster.judges.push_back(AgentProfile{std::string(kSynopsisJudgeId), AgentRole::JUDGE, std::nullopt,
                                       std::nullopt, std::nullopt, generate(judgement + " (Neutral Synopsis)")});
  for (Dimension dim : kAllDimensions) {
    roster.judges.push_back(AgentProfile{agent_id_for(dim), AgentRole::JUDGE, std::nullopt, std::nullopt, dim,
                                         generate(judgement + " (" + std::string(display_name(dim)) + ")")});
  }
  roster.validate();
  return roster;
}

std::string DebateEngine::compress_memory(const SharedMemory& memory) const {
  if (memory.full_history.empty()) return "";
  ChatRequest req{config_.models.for_memory(),
                  prompts_.render(PromptId::SHARED_MEMORY,
                                  {{"debate_history", serialize_history(memory.full_history, config_.neutral_labels)}},
                                  config_.neutral_labels),
                  config_.temperatures.judge};
  return backend_.complete(req);
}

std::string DebateEngine::speak(const Claim& claim, const AgentProfile& agent, Stage stage, Stance side,
                                const std::string& digest) const {
  const auto id = config_.variant == Variant::NO_STAGE_DESIGN ? PromptId::FREE_DEBATE : prompt_for_stage(stage);
  ChatRequest req{config_.models.for_stage(stage),
                  prompts_.render(id,
                                  {{"Profile", agent.profile_text},
                                   {"input", claim.text},
                                   {"fixed_stance", stance_text(side, config_.neutral_labels)},
                                   {"Shared_Memory", digest}},
                                  config_.neutral_labels),
                  config_.temperatures.debate};
  return backend_.complete(req);
}

DebateResult DebateEngine::run_debate(const Claim& claim) const {
  std::string domain;
  Roster roster;
  try {
    domain = infer_domain(claim);
    roster = build_roster(domain);
  } catch (...) {
    fail_item(claim, {});
  }
  return run_debate(claim, domain, roster);
}

DebateResult DebateEngine::run_debate(const Claim& claim, const std::string& domain, const Roster& roster) const {
  roster.validate();
  std::vector<Stage> stages;
  if (config_.variant == Variant::NO_STAGE_DESIGN) {
    stages.assign(4, Stage::FREE_DEBATE);
  } else {
    stages = plan_rounds(config_.rounds).stages;
  }
  const Stance first = config_.order_reversed ? Stance::NEGATIVE_FAKE : Stance::AFFIRMATIVE_REAL;

  DebateResult result;
  result.claim_id = claim.id;
  result.domain = domain;
  result.roster = roster;
  result.config_echo = config_;

  SharedMemory memory;
  try {
    for (Stage stage : stages) {
      for (Stance side : {first, opponent(first)}) {
        if (!config_.compress_per_stage || side == first) memory.digest = compress_memory(memory);
        const auto& agent = roster.debater(side, stage);
        Turn turn{static_cast<int>(memory.full_history.size()), stage, side, agent.agent_id,
                  speak(claim, agent, stage, side, memory.digest), memory.digest};
        result.digests.push_back(memory.digest);
        memory.full_history.push_back(std::move(turn));
      }
    }
    memory.digest = compress_memory(memory);
    result.digests.push_back(memory.digest);
    result.transcript = memory.full_history;

    Judge judge(backend_, prompts_, config_);
    auto [verdict, trace] = judge.judge_debate(memory.digest, roster, result.transcript);
    result.verdict = std::move(verdict);
    result.trace = std::move(trace);
  } catch (...) {
    fail_item(claim, memory.full_history);
  }
  return result;
}

}  // namespace d2d
